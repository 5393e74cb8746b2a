#pragma once

// Operators on A^p_alpha as degree-d compressions over a BasisSpec: Toeplitz
// matrices T_a = P_alpha M_a, measure Toeplitz operators T_mu, reproducing
// kernel vectors k_lambda^{(p,alpha)}, the Berezin transform, rank-one
// operators and norms.  Matrix entry (j,k) is always <T e_k, e_j>_{A^2_alpha}.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <string>
#include <vector>

#include "bergman/basis.hpp"
#include "bergman/carleson.hpp"
#include "bergman/core.hpp"
#include "bergman/measure.hpp"

namespace bergman {

struct OperatorMatrix {
    Eigen::MatrixXcd mat;
    BasisPtr basis;
    double p = 2.0;
    std::string label;
    std::vector<std::string> flags;

    std::size_t dim() const { return static_cast<std::size_t>(mat.rows()); }
};

inline OperatorMatrix identity_matrix(BasisPtr basis, double p = 2.0) {
    OperatorMatrix op;
    op.mat = Eigen::MatrixXcd::Identity(basis->size(), basis->size());
    op.basis = std::move(basis);
    op.p = p;
    op.label = "I";
    return op;
}

namespace detail {

constexpr std::size_t kNodeBlock = 2048;

// Gram-type accumulation  sum_nu  m(nu) w_nu  conj(e_j) e_k  over grid nodes.
template <typename NodeFactor>
Eigen::MatrixXcd weighted_gram(const BasisSpec& basis, NodeFactor&& factor) {
    const QuadratureGrid& g = *basis.grid;
    const std::size_t dim = basis.size();
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(dim, dim);
    Eigen::VectorXcd scale(kNodeBlock);
    for (std::size_t start = 0; start < g.size(); start += kNodeBlock) {
        const std::size_t count = std::min(kNodeBlock, g.size() - start);
        Eigen::MatrixXcd E = basis.eval_nodes(start, count);
        for (std::size_t i = 0; i < count; ++i)
            scale[i] = g.weights[start + i] * factor(start + i);
        M.noalias() += E.adjoint() * scale.head(count).asDiagonal() * E;
    }
    return M;
}

// Runs of consecutive nodes sharing per-coordinate moduli (the tensor grids
// are built that way), used by the radial-symbol diagonal fast path.
inline bool same_modulus(const QuadratureGrid& g, std::size_t a, std::size_t b) {
    for (int j = 0; j < g.n; ++j)
        if (std::abs(std::abs(g.coord(a, j)) - std::abs(g.coord(b, j))) > 1e-14)
            return false;
    return true;
}

}  // namespace detail

// T_a = P_alpha M_a compressed to degree d; radial symbols assemble as
// diagonal matrices from one node per modulus ring.
inline OperatorMatrix toeplitz_matrix(const SymbolFunction& a, BasisPtr basis) {
    OperatorMatrix op;
    op.basis = basis;
    op.label = a.name.empty() ? "T_a" : "T_" + a.name;
    const BasisSpec& B = *basis;
    if (a.radial) {
        const QuadratureGrid& g = *B.grid;
        Eigen::VectorXcd diag = Eigen::VectorXcd::Zero(B.size());
        std::size_t i = 0;
        while (i < g.size()) {
            std::size_t jend = i + 1;
            double wsum = g.weights[i];
            while (jend < g.size() && detail::same_modulus(g, i, jend)) {
                wsum += g.weights[jend];
                ++jend;
            }
            const Complex av = a(g.node(i));
            const Eigen::VectorXcd e = B.eval_point(g.node(i));
            for (std::size_t j = 0; j < B.size(); ++j)
                diag[j] += wsum * av * std::norm(e[j]);
            i = jend;
        }
        op.mat = diag.asDiagonal();
        return op;
    }
    std::vector<Complex> vals(B.grid->size());
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = a(B.grid->node(i));
    op.mat = detail::weighted_gram(B, [&](std::size_t i) { return vals[i]; });
    return op;
}

// T_mu, entries  int e_k conj(e_j) dmu.  Densities ride the quadrature
// weights; atoms are exact rank-one contributions.
inline OperatorMatrix tmu_matrix(const Measure& mu, BasisPtr basis,
                                 bool check_carleson = false) {
    OperatorMatrix op;
    op.basis = basis;
    op.label = mu.name().empty() ? "T_mu" : "T_" + mu.name();
    const BasisSpec& B = *basis;
    if (mu.kind() == Measure::Kind::Density) {
        if (mu.grid() != B.grid)
            throw std::domain_error("tmu_matrix: density must be sampled on the basis grid");
        const auto& vals = mu.values();
        op.mat = detail::weighted_gram(B, [&](std::size_t i) { return vals[i]; });
    } else {
        op.mat = Eigen::MatrixXcd::Zero(B.size(), B.size());
        for (const Atom& a : mu.atoms()) {
            const Eigen::VectorXcd v = B.eval_point(a.location);
            op.mat.noalias() += a.mass * v.conjugate() * v.transpose();
        }
    }
    if (check_carleson && !mu.variation_carleson(carleson_probe_check(B.alpha)))
        op.flags.push_back("carleson-warning");
    return op;
}

// P_mu f expanded over the basis: coefficient j is  int f conj(e_j) dmu.
// T_mu factors as P_mu composed with the embedding A^p -> L^p(mu).
template <typename F>
Eigen::VectorXcd p_mu_coeffs(const Measure& mu, F&& f, const BasisSpec& basis) {
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(basis.size());
    if (mu.kind() == Measure::Kind::Density) {
        const QuadratureGrid& g = *mu.grid();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const BallPoint w = g.node(i);
            c += (g.weights[i] * mu.values()[i] * f(w)) * basis.eval_point(w).conjugate();
        }
    } else {
        for (const Atom& a : mu.atoms())
            c += (a.mass * f(a.location)) * basis.eval_point(a.location).conjugate();
    }
    return c;
}

// Truncated k_lambda^{(p,alpha)}.  The raw expansion of K_lambda over e_a is
// conj(lambda^a)/||z^a||; the pair (v_p, v_q) is scaled jointly so that
// <v_p, v_q>_{A^2} = 1 exactly, which for p = 2 is plain unit normalization.
// `tail` records the kernel energy fraction lost to truncation.
struct KernelVector {
    Eigen::VectorXcd coeffs;
    BallPoint lambda;
    double p = 2.0;
    double tail = 0.0;
    bool tail_ok = true;
};

inline KernelVector kernel_vector(const BallPoint& lambda, double p, const BasisSpec& basis,
                                  double tail_warn = 1e-6) {
    KernelVector kv;
    kv.lambda = lambda;
    kv.p = p;
    Eigen::VectorXcd raw = basis.eval_point(lambda).conjugate();  // conj(e_a(lambda)) = conj(lambda^a)/||z^a||
    const double s = n_plus(basis.n, basis.alpha);
    const double omz = 1.0 - lambda.norm_sq();
    const double full_energy = std::pow(omz, -s);  // ||K_lambda||^2
    const double trunc_energy = raw.squaredNorm();
    kv.tail = std::max(0.0, 1.0 - trunc_energy / full_energy);
    kv.tail_ok = kv.tail <= tail_warn;
    const double q = p / (p - 1.0);
    const double scale = std::pow(omz, s * (1.0 / q - 0.5)) / raw.norm();
    kv.coeffs = scale * raw;
    return kv;
}

// B(S)(z) = <S k_z^{(p,alpha)}, k_z^{(q,alpha)}>_{A^2_alpha}
inline Complex berezin(const OperatorMatrix& S, const BallPoint& z) {
    const double q = S.p / (S.p - 1.0);
    const KernelVector vp = kernel_vector(z, S.p, *S.basis);
    const KernelVector vq = kernel_vector(z, q, *S.basis);
    return (vq.coeffs.adjoint() * (S.mat * vp.coeffs))(0);
}

// (f (x) g) h = <h,g> f
inline OperatorMatrix rank_one(const Eigen::VectorXcd& f, const Eigen::VectorXcd& g,
                               BasisPtr basis, double p = 2.0) {
    if (f.size() != static_cast<Eigen::Index>(basis->size()) || f.size() != g.size())
        throw std::domain_error("rank_one: coefficient size mismatch");
    OperatorMatrix op;
    op.mat = f * g.adjoint();
    op.basis = std::move(basis);
    op.p = p;
    op.label = "rank_one";
    return op;
}

// Largest singular value; the exact operator norm of the compression for p=2.
inline double op_norm(const OperatorMatrix& S) {
    if (S.mat.rows() == 0) return 0.0;
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(S.mat);
    return svd.singularValues()(0);
}

// For p != 2 only a lower bound is reported: max of ||Sf||_p / ||f||_p over
// the basis vectors plus random coefficient vectors, with L^p norms by
// quadrature.
inline double op_norm_lower(const OperatorMatrix& S, double p, int random_samples = 8,
                            std::uint64_t seed = 99) {
    const BasisSpec& B = *S.basis;
    const QuadratureGrid& g = *B.grid;
    auto lp_norm = [&](const Eigen::VectorXcd& c) {
        double acc = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const Complex v = B.eval_point(g.node(i)).transpose() * c;
            acc += g.weights[i] * std::pow(std::abs(v), p);
        }
        return std::pow(acc, 1.0 / p);
    };
    Rng rng(seed);
    double best = 0.0;
    const std::size_t dim = B.size();
    std::vector<Eigen::VectorXcd> samples;
    for (std::size_t j = 0; j < dim; ++j)
        samples.push_back(Eigen::VectorXcd::Unit(dim, j));
    for (int s = 0; s < random_samples; ++s) {
        Eigen::VectorXcd c(dim);
        for (std::size_t j = 0; j < dim; ++j)
            c[j] = Complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        samples.push_back(c);
    }
    for (const auto& c : samples) {
        const double den = lp_norm(c);
        if (den > 0.0) best = std::max(best, lp_norm(S.mat * c) / den);
    }
    return best;
}

// Conjugate transpose; for p = 2 the matrix of S^* (T_conj(a) for Toeplitz).
inline OperatorMatrix adjoint(const OperatorMatrix& S) {
    OperatorMatrix op;
    op.mat = S.mat.adjoint();
    op.basis = S.basis;
    op.p = S.p / (S.p - 1.0);
    op.label = S.label + "*";
    return op;
}

// Gram matrix of the normalized basis under the grid inner product; the test
// suite checks it against the identity.
inline Eigen::MatrixXcd gram_matrix(const BasisSpec& basis) {
    return detail::weighted_gram(basis, [](std::size_t) { return 1.0; });
}

}  // namespace bergman
