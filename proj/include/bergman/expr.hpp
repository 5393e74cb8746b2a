#pragma once

// Operator recipes: finite sums of finite products of Toeplitz generators
// (the shape of the dense subalgebra of the Toeplitz algebra).  A recipe can
// be assembled as a compression at any degree, so estimators that need a
// finer basis near the boundary can re-assemble instead of extending a fixed
// matrix; products are assembled at an internally lifted degree so that the
// result is the compression of the composed operator, not a composition of
// compressions (the latter has spurious rank at the truncation edge).
//
// Holomorphic polynomial symbols keep their coefficient list: multiplication
// by a holomorphic series is degree-triangular for n = 1, so those factors
// and their Moebius translates a o phi_z assemble in closed form.

#include <map>
#include <optional>
#include <utility>

#include "bergman/lattice.hpp"
#include "bergman/operators.hpp"
#include "bergman/translate.hpp"

namespace bergman {

struct Generator {
    // MobiusBump is the symbol 1 - |phi_c(w)|^2; its Toeplitz entries have a
    // closed form on the disk and the family is closed under translation
    // (rho-invariance gives 1 - |phi_c(phi_z(w))|^2 = 1 - |phi_{phi_z(c)}(w)|^2),
    // so the translated operators assemble exactly at any degree.
    enum class Kind { Identity, Symbol, HoloPoly, MobiusBump, MeasureT };
    Kind kind = Kind::Identity;
    SymbolFunction symbol;                    // Kind::Symbol
    std::vector<Complex> holo;                // Kind::HoloPoly: a(w) = sum holo[m] w^m
    bool holo_conj = false;                   // symbol is conj(a): T = (T_a)^*
    std::optional<BallPoint> composed_with;   // HoloPoly translated: a o phi_z
    BallPoint bump_center;                    // Kind::MobiusBump
    std::shared_ptr<const Measure> measure;   // Kind::MeasureT

    static Generator identity() { return {}; }

    static Generator toeplitz(SymbolFunction s) {
        Generator g;
        g.kind = Kind::Symbol;
        g.symbol = std::move(s);
        return g;
    }

    static Generator holo_poly(std::vector<Complex> coeffs, std::string name,
                               bool conjugated = false) {
        Generator g;
        g.kind = Kind::HoloPoly;
        g.holo = std::move(coeffs);
        g.holo_conj = conjugated;
        g.symbol.name = std::move(name);
        return g;
    }

    static Generator mobius_bump(const BallPoint& c) {
        Generator g;
        g.kind = Kind::MobiusBump;
        g.bump_center = c;
        g.symbol.name = "bump";
        return g;
    }

    // degree slack a product factor needs for exact compression
    int raise_degree(int default_slack) const {
        switch (kind) {
            case Kind::Identity: return 0;
            case Kind::MeasureT: return 0;
            case Kind::MobiusBump: return 0;
            case Kind::HoloPoly:
                // conjugated series lower the degree, plain ones raise it
                if (holo_conj) return 0;
                return composed_with ? 0 : static_cast<int>(holo.size()) - 1;
            case Kind::Symbol: return symbol.radial ? 0 : default_slack;
        }
        return default_slack;
    }
};

struct Word {
    Complex coeff{1.0, 0.0};
    std::vector<Generator> gens;
};

struct OperatorExpr {
    std::vector<Word> words;
    std::string label;

    static OperatorExpr identity(std::string label = "I") {
        OperatorExpr e;
        e.words.push_back({Complex(1.0, 0.0), {}});
        e.label = std::move(label);
        return e;
    }

    static OperatorExpr from_generator(Generator g, std::string label) {
        OperatorExpr e;
        e.words.push_back({Complex(1.0, 0.0), {std::move(g)}});
        e.label = std::move(label);
        return e;
    }
};

inline OperatorExpr expr_product(const OperatorExpr& a, const OperatorExpr& b,
                                 std::string label = {}) {
    OperatorExpr e;
    for (const Word& wa : a.words)
        for (const Word& wb : b.words) {
            Word w;
            w.coeff = wa.coeff * wb.coeff;
            w.gens = wa.gens;
            w.gens.insert(w.gens.end(), wb.gens.begin(), wb.gens.end());
            e.words.push_back(std::move(w));
        }
    e.label = label.empty() ? a.label + "*" + b.label : std::move(label);
    return e;
}

inline OperatorExpr expr_sum(const OperatorExpr& a, const OperatorExpr& b, Complex cb,
                             std::string label = {}) {
    OperatorExpr e = a;
    for (Word w : b.words) {
        w.coeff *= cb;
        e.words.push_back(std::move(w));
    }
    e.label = label.empty() ? a.label + "+" + b.label : std::move(label);
    return e;
}

// Caches bases per degree so repeated assemblies share grids.
class AssemblyContext {
public:
    AssemblyContext(int n, double alpha, int angular_slack = 0)
        : n_(n), alpha_(alpha), angular_slack_(angular_slack) {}

    BasisPtr basis(int degree) {
        auto it = cache_.find(degree);
        if (it != cache_.end()) return it->second;
        GridPtr grid;
        if (n_ == 1 && angular_slack_ > 0)
            grid = build_disk_grid(alpha_, degree + 6, 2 * degree + 8 + angular_slack_);
        BasisPtr b = make_basis(n_, alpha_, degree, grid);
        cache_.emplace(degree, b);
        return b;
    }

    int n() const { return n_; }
    double alpha() const { return alpha_; }

private:
    int n_;
    double alpha_;
    int angular_slack_;  // extra angular points for composed (a o phi_z) symbols
    std::map<int, BasisPtr> cache_;
};

namespace expr_detail {

// power series of phi_z on the disk: phi_z(w) = z - (1-|z|^2) sum_{m>=1} conj(z)^{m-1} w^m
inline std::vector<Complex> phi_series(const BallPoint& z, int degree) {
    std::vector<Complex> f(degree + 1, Complex(0.0, 0.0));
    const Complex z0 = z[0];
    f[0] = z0;
    const double omz = 1.0 - std::norm(z0);
    Complex zbar_pow(1.0, 0.0);
    for (int m = 1; m <= degree; ++m) {
        f[m] = -omz * zbar_pow;
        zbar_pow *= std::conj(z0);
    }
    return f;
}

inline std::vector<Complex> truncated_product(const std::vector<Complex>& a,
                                              const std::vector<Complex>& b, int degree) {
    std::vector<Complex> c(degree + 1, Complex(0.0, 0.0));
    for (int i = 0; i < static_cast<int>(a.size()) && i <= degree; ++i) {
        if (a[i] == Complex(0.0, 0.0)) continue;
        const int jmax = std::min<int>(degree - i, static_cast<int>(b.size()) - 1);
        for (int j = 0; j <= jmax; ++j) c[i + j] += a[i] * b[j];
    }
    return c;
}

// a o phi_z as a power series to the given degree (Horner on the polynomial a)
inline std::vector<Complex> composed_series(const std::vector<Complex>& a,
                                            const BallPoint& z, int degree) {
    const std::vector<Complex> f = phi_series(z, degree);
    std::vector<Complex> acc(degree + 1, Complex(0.0, 0.0));
    for (int m = static_cast<int>(a.size()) - 1; m >= 0; --m) {
        if (m == static_cast<int>(a.size()) - 1) {
            acc[0] = a[m];
        } else {
            acc = truncated_product(acc, f, degree);
            acc[0] += a[m];
        }
    }
    return acc;
}

// T_c for a holomorphic series c on the disk: degree-triangular with entries
// c_{j-k} ||w^j|| / ||w^k||, exact at any truncation.
inline Eigen::MatrixXcd holo_toeplitz(const std::vector<Complex>& series,
                                      const BasisSpec& basis) {
    const std::size_t dim = basis.size();
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::size_t k = 0; k < dim; ++k)
        for (std::size_t j = k; j < dim; ++j) {
            const std::size_t m = j - k;
            if (m < series.size())
                M(j, k) = series[m] * basis.norms[j] / basis.norms[k];
        }
    return M;
}

// T_{1-|phi_c|^2} on the disk, any alpha > -1.  With t = |c|^2 and j >= k,
//   <(1-|phi_c|^2) e_k, e_j> = (1-t) conj(c)^{j-k} S_j / (||w^j|| ||w^k||),
//   S_j = c_alpha sum_b t^b B(b+j+1, alpha+2),
// from the binomial expansion of |1 - conj(c) w|^{-2}; the series only
// depends on j, so assembly is O(dim L + dim^2).
inline Eigen::MatrixXcd mobius_bump_toeplitz(const BallPoint& c, const BasisSpec& basis) {
    if (basis.n != 1)
        throw std::domain_error("mobius_bump_toeplitz: closed form is n = 1 only");
    const double alpha = basis.alpha;
    const double t = c.norm_sq();
    const Complex cb = std::conj(c[0]);
    const std::size_t dim = basis.size();
    const double ca = c_alpha(1, alpha);
    std::vector<double> S(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        double term = ca * std::exp(std::lgamma(j + 1.0) + std::lgamma(alpha + 2.0) -
                                    std::lgamma(j + alpha + 3.0));
        double acc = term;
        for (int b = 1; b < 200000; ++b) {
            term *= t * (j + b) / (j + b + alpha + 2.0);
            acc += term;
            if (term < 1e-18 * acc) break;
        }
        S[j] = acc;
    }
    Eigen::MatrixXcd M(dim, dim);
    for (std::size_t k = 0; k < dim; ++k) {
        Complex cpow(1.0, 0.0);
        for (std::size_t j = k; j < dim; ++j) {
            M(j, k) = (1.0 - t) * cpow * S[j] / (basis.norms[j] * basis.norms[k]);
            if (j > k) M(k, j) = std::conj(M(j, k));
            else M(k, j) = M(j, k);
            cpow *= cb;
        }
    }
    return M;
}

inline Eigen::MatrixXcd generator_matrix(const Generator& g, BasisPtr basis) {
    switch (g.kind) {
        case Generator::Kind::Identity:
            return Eigen::MatrixXcd::Identity(basis->size(), basis->size());
        case Generator::Kind::Symbol:
            return toeplitz_matrix(g.symbol, basis).mat;
        case Generator::Kind::MeasureT:
            return tmu_matrix(*g.measure, basis).mat;
        case Generator::Kind::MobiusBump:
            return mobius_bump_toeplitz(g.bump_center, *basis);
        case Generator::Kind::HoloPoly: {
            if (basis->n != 1)
                throw std::domain_error("HoloPoly generators are n = 1 only");
            std::vector<Complex> series = g.holo;
            if (g.composed_with)
                series = composed_series(g.holo, *g.composed_with, basis->degree);
            // stored coefficients are those of the holomorphic a; the symbol
            // is conj(a) when holo_conj, and T_{conj(a)} = (T_a)^*
            if (g.holo_conj) return holo_toeplitz(series, *basis).adjoint();
            return holo_toeplitz(series, *basis);
        }
    }
    throw std::logic_error("generator_matrix: unreachable");
}

}  // namespace expr_detail

// Compression P_d (sum_w coeff_w prod gens) P_d, each word assembled at the
// lifted degree d + sum of factor raises and cropped back to the graded
// leading block.
inline OperatorMatrix assemble(const OperatorExpr& expr, BasisPtr basis, AssemblyContext& ctx,
                               int default_slack = 12) {
    const std::size_t dim = basis->size();
    OperatorMatrix op;
    op.basis = basis;
    op.label = expr.label;
    op.mat = Eigen::MatrixXcd::Zero(dim, dim);
    for (const Word& w : expr.words) {
        int slack = 0;
        for (const Generator& g : w.gens) slack += g.raise_degree(default_slack);
        BasisPtr inner = slack == 0 ? basis : ctx.basis(basis->degree + slack);
        Eigen::MatrixXcd prod =
            Eigen::MatrixXcd::Identity(inner->size(), inner->size());
        for (const Generator& g : w.gens)
            prod = prod * expr_detail::generator_matrix(g, inner);
        op.mat += w.coeff * prod.topLeftCorner(dim, dim);
    }
    return op;
}

// p = 2 translation: (T_a)_z = T_{a o phi_z}, atoms push forward with the
// |J_z|^2 weight (1-|z|^2)^{n+1+alpha} |1-<w,z>|^{-2(n+1+alpha)}, densities
// against v_alpha compose like symbols.
inline OperatorExpr translate_expr(const OperatorExpr& expr, const BallPoint& z,
                                   double alpha) {
    OperatorExpr out;
    out.label = expr.label + "_z";
    const double s = n_plus(z.dim(), alpha);
    for (const Word& w : expr.words) {
        Word tw;
        tw.coeff = w.coeff;
        for (const Generator& g : w.gens) {
            switch (g.kind) {
                case Generator::Kind::Identity:
                    tw.gens.push_back(g);
                    break;
                case Generator::Kind::HoloPoly: {
                    Generator t = g;
                    if (t.composed_with)
                        throw std::domain_error("translate_expr: already translated");
                    t.composed_with = z;
                    tw.gens.push_back(std::move(t));
                    break;
                }
                case Generator::Kind::MobiusBump: {
                    Generator t = g;
                    t.bump_center = mobius(z, g.bump_center);
                    tw.gens.push_back(std::move(t));
                    break;
                }
                case Generator::Kind::Symbol: {
                    Generator t;
                    t.kind = Generator::Kind::Symbol;
                    const SymbolFunction base = g.symbol;
                    BallPoint zz = z;
                    t.symbol = {[base, zz](const BallPoint& w_) {
                                    return base.eval(mobius(zz, w_));
                                },
                                base.sup_bound, false, base.name + ".phi_z"};
                    tw.gens.push_back(std::move(t));
                    break;
                }
                case Generator::Kind::MeasureT: {
                    Generator t;
                    t.kind = Generator::Kind::MeasureT;
                    const Measure& mu = *g.measure;
                    if (mu.kind() == Measure::Kind::Atomic) {
                        std::vector<Atom> atoms;
                        atoms.reserve(mu.atoms().size());
                        for (const Atom& a : mu.atoms()) {
                            const double jac =
                                std::pow(1.0 - z.norm_sq(), s) /
                                std::pow(std::norm(1.0 - inner(a.location, z)), s);
                            atoms.push_back(Atom{mobius(z, a.location), a.mass * jac, -1});
                        }
                        t.measure = std::make_shared<Measure>(
                            Measure::atomic(std::move(atoms), mu.dim(), mu.name() + "_z"));
                    } else {
                        // density m dv_alpha translates to the composed symbol m o phi_z
                        if (!mu.density_fn())
                            throw std::domain_error(
                                "translate_expr: sampled density lacks a callable form");
                        BallPoint zz = z;
                        auto fn = mu.density_fn();
                        t.kind = Generator::Kind::Symbol;
                        t.symbol = {[fn, zz](const BallPoint& w_) { return fn(mobius(zz, w_)); },
                                    1.0, false, mu.name() + "_z"};
                    }
                    tw.gens.push_back(std::move(t));
                    break;
                }
            }
        }
        out.words.push_back(std::move(tw));
    }
    return out;
}

}  // namespace bergman
