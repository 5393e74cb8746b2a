#pragma once

// Essential-norm machinery: the three intrinsic size quantities
//   a_S(r) = limsup_{|z|->1} sup { ||Sf|| : f in T_{mu 1_D(z,r)}(A^p), ||f|| <= 1 }
//   b_S    = sup_r limsup_{|z|->1} ||M_{1_D(z,r)} S||_{A^p -> L^p}
//   c_S    = lim_{r->1} ||M_{1_{(rB)^c}} S||_{A^p -> L^p},
// the segmented approximation  S T_mu ~ sum_j M_{1_F_j} S T_{mu 1_G_j},  and
// the boundary-translate estimators for ||S||_e and the essential spectral
// radius in the Hilbert case.
//
// Every limsup_{|z|->1} is sampled on finitely many shells; a shell is
// "reliable" when the reproducing kernel at that radius fits in the working
// degree, so the working degree is lifted per shell (recipes re-assemble at
// the lifted degree).  Reported values are taken at the outermost reliable
// shell and curves are kept so trends stay visible.

#include <Eigen/Eigenvalues>
#include <functional>
#include <optional>

#include "bergman/expr.hpp"

namespace bergman {

// ||f -> 1_E (Sf)||, p = 2: the exact largest singular value of the masked
// evaluation map, via the node-weighted Gram of E S.
template <typename Pred>
double masked_map_norm(const OperatorMatrix& S, const QuadratureGrid& g, Pred&& node_in) {
    const BasisSpec& B = *S.basis;
    const std::size_t dim = B.size();
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(dim, dim);
    constexpr std::size_t blk = detail::kNodeBlock;
    Eigen::MatrixXcd E(blk, dim);
    Eigen::VectorXd wm(blk);
    bool any = false;
    for (std::size_t start = 0; start < g.size(); start += blk) {
        const std::size_t count = std::min(blk, g.size() - start);
        std::size_t used = 0;
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t node = start + i;
            if (!node_in(node)) continue;
            E.row(used) = B.eval_point(g.node(node)).transpose();
            wm[used] = g.weights[node];
            ++used;
        }
        if (used == 0) continue;
        any = true;
        const Eigen::MatrixXcd ES = E.topRows(used) * S.mat;
        G.noalias() += ES.adjoint() * wm.head(used).asDiagonal() * ES;
    }
    if (!any) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

// c_S sampled on a cutoff list; the estimate is the value at the largest
// cutoff, the curve carries the trend.
inline std::vector<double> c_s(const OperatorMatrix& S, const std::vector<double>& cutoffs,
                               const QuadratureGrid* grid_override = nullptr) {
    const QuadratureGrid& g = grid_override ? *grid_override : *S.basis->grid;
    std::vector<double> out;
    out.reserve(cutoffs.size());
    for (double r : cutoffs) {
        if (r <= 0.0 || r >= 1.0) throw std::domain_error("c_s: cutoff outside (0,1)");
        const double r2 = r * r;
        out.push_back(
            masked_map_norm(S, g, [&](std::size_t i) { return g.radius_sq[i] > r2; }));
    }
    return out;
}

// ||M_{1_D(z,r)} S|| maximized over the probe set.
inline double b_s(const OperatorMatrix& S, double r, const std::vector<BallPoint>& probes,
                  const QuadratureGrid* grid_override = nullptr) {
    const QuadratureGrid& g = grid_override ? *grid_override : *S.basis->grid;
    double best = 0.0;
    const double t2 = std::tanh(r) * std::tanh(r);
    for (const BallPoint& z : probes) {
        const double v = masked_map_norm(
            S, g, [&](std::size_t i) { return rho_sq(z, g.node(i)) <= t2; });
        best = std::max(best, v);
    }
    return best;
}

// sup ||Sf|| over the unit ball of the span of truncated kernels at the atoms
// of mu inside D(z,r); probes with no atoms contribute 0 and are flagged.
// Atoms whose kernel loses more than tail_filter of its energy to truncation
// are excluded: their truncated kernels are no longer boundary-concentrated,
// so they would pad the span with arbitrary low-degree directions and push
// the estimate toward the plain norm of S.
struct ASResult {
    double value = 0.0;
    std::vector<double> per_probe;
    int empty_probes = 0;
    int filtered_atoms = 0;
};

inline ASResult a_s(const OperatorMatrix& S, double r, const std::vector<BallPoint>& probes,
                    const Measure& mu, double tail_filter = 1.0,
                    double span_threshold = 0.5) {
    if (mu.kind() != Measure::Kind::Atomic)
        throw std::domain_error("a_s: mu must be atomic");
    const BasisSpec& B = *S.basis;
    ASResult res;
    for (const BallPoint& z : probes) {
        const HyperbolicDisk disk(z, r);
        std::vector<Eigen::VectorXcd> cols;
        for (const Atom& a : mu.atoms()) {
            if (!disk.contains(a.location)) continue;
            const KernelVector kv = kernel_vector(a.location, 2.0, B);
            if (kv.tail > tail_filter) {
                ++res.filtered_atoms;
                continue;
            }
            cols.push_back(kv.coeffs);
        }
        if (cols.empty()) {
            res.per_probe.push_back(0.0);
            ++res.empty_probes;
            continue;
        }
        Eigen::MatrixXcd K(B.size(), cols.size());
        for (std::size_t c = 0; c < cols.size(); ++c) K.col(c) = cols[c];
        // The unit ball of the raw span admits near-null combinations of the
        // kernel frame, which can imitate interior functions with huge
        // coefficients; the size characterization bounds the coefficients of
        // unit-norm range elements, so the span is cut at a conditioning
        // threshold that mirrors that bound.
        Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr;
        qr.setThreshold(span_threshold);
        qr.compute(K);
        const auto rank = static_cast<Eigen::Index>(qr.rank());
        if (rank == 0) {
            res.per_probe.push_back(0.0);
            ++res.empty_probes;
            continue;
        }
        Eigen::MatrixXcd Q = qr.householderQ() *
                             Eigen::MatrixXcd::Identity(B.size(), rank);
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(S.mat * Q);
        res.per_probe.push_back(svd.singularValues()(0));
    }
    for (double v : res.per_probe) res.value = std::max(res.value, v);
    return res;
}

// ||1_{D(z,r)} (S khat_z)|| maximized over probes: the kernel-direction
// variant of b_s used by the shell driver, where the full masked sup is
// truncation-limited but the kernel direction stays representable at the
// lifted shell degree.
inline double b_s_kernel_direction(const OperatorMatrix& S, double r,
                                   const std::vector<BallPoint>& probes) {
    const BasisSpec& B = *S.basis;
    const QuadratureGrid& g = *B.grid;
    double best = 0.0;
    const double t2 = std::tanh(r) * std::tanh(r);
    for (const BallPoint& z : probes) {
        const Eigen::VectorXcd img = S.mat * kernel_vector(z, 2.0, B).coeffs;
        double acc = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (rho_sq(z, g.node(i)) > t2) continue;
            const Complex v = B.eval_point(g.node(i)).transpose() * img;
            acc += g.weights[i] * std::norm(v);
        }
        best = std::max(best, std::sqrt(acc));
    }
    return best;
}

// Segmented approximation  sum_j M_{1_F_j} S T_{mu 1_G_j}  with F_j the base
// cells and G_j the outermost expansions of a covering family.  Returns the
// compression of the segmented operator and the A^p -> L^p norm of its
// difference from S T_mu, both over the covering grid.
struct SegmentedResult {
    OperatorMatrix segmented;
    double error = 0.0;
};

inline SegmentedResult segmented_approx(const OperatorMatrix& S, const Measure& mu,
                                        const CoveringFamily& cov) {
    const BasisSpec& B = *S.basis;
    const QuadratureGrid& g = *cov.grid;
    const std::size_t dim = B.size();
    const std::size_t ncells = cov.levels[0].size();

    // mu restricted to G_j = levels[k+1][j]
    const auto& outer = cov.levels.back();
    auto restrict_measure = [&](const NodeSet& keep) -> Measure {
        if (mu.kind() == Measure::Kind::Atomic) {
            std::vector<Atom> atoms;
            for (const Atom& a : mu.atoms()) {
                if (a.node_hint < 0)
                    throw std::domain_error(
                        "segmented_approx: atomic measure must carry node hints");
                if (std::binary_search(keep.begin(), keep.end(),
                                       static_cast<std::uint32_t>(a.node_hint)))
                    atoms.push_back(a);
            }
            return Measure::atomic(std::move(atoms), mu.dim(), mu.name());
        }
        if (mu.grid().get() != &g)
            throw std::domain_error("segmented_approx: density must live on the covering grid");
        std::vector<Complex> vals(g.size(), Complex(0.0, 0.0));
        for (std::uint32_t v : keep) vals[v] = mu.values()[v];
        return Measure::density(mu.grid(), std::move(vals), mu.name());
    };

    const Eigen::MatrixXcd Tfull = tmu_matrix(mu, S.basis).mat;
    const Eigen::MatrixXcd Mfull = S.mat * Tfull;

    // node -> base cell (the base level partitions the node set)
    std::vector<std::int32_t> cell_of(g.size(), -1);
    for (std::size_t j = 0; j < ncells; ++j)
        for (std::uint32_t v : cov.levels[0][j]) cell_of[v] = static_cast<std::int32_t>(j);

    Eigen::MatrixXcd Gdiff = Eigen::MatrixXcd::Zero(dim, dim);
    Eigen::MatrixXcd Cseg = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::size_t j = 0; j < ncells; ++j) {
        const Measure muj = restrict_measure(outer[j]);
        const Eigen::MatrixXcd Mj = S.mat * tmu_matrix(muj, S.basis).mat;
        // masked Gram of the base cell
        Eigen::MatrixXcd Gj = Eigen::MatrixXcd::Zero(dim, dim);
        const NodeSet& cell = cov.levels[0][j];
        constexpr std::size_t blk = detail::kNodeBlock;
        Eigen::MatrixXcd E(blk, dim);
        Eigen::VectorXd w(blk);
        for (std::size_t start = 0; start < cell.size(); start += blk) {
            const std::size_t count = std::min(blk, cell.size() - start);
            for (std::size_t i = 0; i < count; ++i) {
                const std::uint32_t node = cell[start + i];
                E.row(i) = B.eval_point(g.node(node)).transpose();
                w[i] = g.weights[node];
            }
            Gj.noalias() +=
                E.topRows(count).adjoint() * w.head(count).asDiagonal() * E.topRows(count);
        }
        const Eigen::MatrixXcd D = Mfull - Mj;
        Gdiff.noalias() += D.adjoint() * Gj * D;
        Cseg.noalias() += Gj * Mj;
    }
    SegmentedResult out;
    out.segmented.mat = std::move(Cseg);
    out.segmented.basis = S.basis;
    out.segmented.p = S.p;
    out.segmented.label = "segmented(" + S.label + ")";
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Gdiff, Eigen::EigenvaluesOnly);
    out.error = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    return out;
}

struct EssNormConfig {
    std::vector<double> shells{0.90, 0.95, 0.98};
    int directions = 6;
    int f_count = 1;            // boundary-translate test family e_0..e_{f-1}
    int spectral_block = 4;     // leading block for essential spectral radius
    double tail_target = 0.02;  // kernel energy allowed beyond the shell degree
    int degree_cap = 300;
    std::vector<double> cs_cutoffs{0.90, 0.95, 0.98};
    double bs_r = 2.0;
    double as_r = 0.5;
    double as_tail_filter = 0.05;   // kernel-energy loss allowed for a_s atoms
    double as_span_threshold = 0.5; // conditioning cut for the kernel span
    int angular_slack = 200;    // extra angular order for composed symbols
    // compactness verdict thresholds, calibrated on the reference operator
    // family (see README); the Berezin bound is the acceptance-pinned 0.05.
    double berezin_compact_max = 0.05;
    double cs_compact_max = 0.25;
};

// Smallest degree at which the kernel at radius `shell` keeps all but
// tail_target of its energy, but at least `ambient`.
inline int shell_degree(double shell, int n, double alpha, int ambient,
                        const EssNormConfig& cfg, bool* reliable = nullptr) {
    const double u = shell * shell;
    const double s = n_plus(n, alpha);
    const double total = std::pow(1.0 - u, -s);
    // n = 1: sum_k u^k / ||z^k||^2; n = 2 sums over degrees with multiplicity,
    // both via term ratio recurrences
    double term = 1.0;
    double partial = 1.0;
    int d = 0;
    const int cap = (n == 1) ? cfg.degree_cap : 60;
    while (partial < (1.0 - cfg.tail_target) * total && d < cap) {
        ++d;
        if (n == 1)
            term *= u * (d + alpha + 1.0) / d;            // u^d / ||z^d||^2
        else
            term *= u * (d + alpha + 2.0) / d;            // degree-d shell sum
        partial += term;
    }
    if (reliable) *reliable = partial >= (1.0 - cfg.tail_target) * total;
    return std::max(d, ambient);
}

struct TranslateScan {
    std::vector<double> shells;
    std::vector<int> degrees;
    std::vector<bool> reliable;
    std::vector<double> colnorm_max;   // max over directions of ||S_z [e_0..e_f]||
    std::vector<double> specrad_max;   // max spectral radius of S_z compressions
    std::vector<double> berezin_max;   // max |B(S)(z)| over directions
    double translate_estimate = 0.0;   // outermost reliable shell
    double specrad_estimate = 0.0;
    double berezin_estimate = 0.0;
};

inline std::vector<BallPoint> shell_points(double r, int n, int directions) {
    std::vector<BallPoint> pts;
    for (int d = 0; d < directions; ++d) {
        const double th = 2.0 * kPi * d / directions;
        std::array<Complex, BallPoint::kMaxDim> c{};
        c[0] = Complex(r * std::cos(th), r * std::sin(th));
        pts.push_back(BallPoint::unchecked(c.data(), n));
    }
    return pts;
}

// One sweep over shells and directions: translated compressions give the
// boundary-translate norms and spectral radii, the untranslated compression
// gives the Berezin values.  p = 2 path.
inline TranslateScan translate_scan(const OperatorExpr& expr, int ambient_degree,
                                    AssemblyContext& ctx, const EssNormConfig& cfg) {
    TranslateScan scan;
    for (double shell : cfg.shells) {
        bool reliable = false;
        const int D = shell_degree(shell, ctx.n(), ctx.alpha(), ambient_degree, cfg, &reliable);
        BasisPtr basis = ctx.basis(D);
        const OperatorMatrix S_at = assemble(expr, basis, ctx);
        double col = 0.0, rad = 0.0, ber = 0.0;
        for (const BallPoint& z : shell_points(shell, ctx.n(), cfg.directions)) {
            const OperatorExpr ez = translate_expr(expr, z, ctx.alpha());
            const OperatorMatrix Sz = assemble(ez, basis, ctx);
            const int f = std::min<int>(cfg.f_count, static_cast<int>(basis->size()));
            Eigen::BDCSVD<Eigen::MatrixXcd> svd(Sz.mat.leftCols(f));
            col = std::max(col, svd.singularValues()(0));
            // entries of the fixed leading block converge to those of the
            // boundary operator S_x; the full compression would keep the
            // interior spectrum of S instead
            const int m = std::min<int>(cfg.spectral_block, static_cast<int>(basis->size()));
            Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(Sz.mat.topLeftCorner(m, m), false);
            rad = std::max(rad, eig.eigenvalues().cwiseAbs().maxCoeff());
            ber = std::max(ber, std::abs(berezin(S_at, z)));
        }
        scan.shells.push_back(shell);
        scan.degrees.push_back(D);
        scan.reliable.push_back(reliable);
        scan.colnorm_max.push_back(col);
        scan.specrad_max.push_back(rad);
        scan.berezin_max.push_back(ber);
    }
    for (std::size_t i = 0; i < scan.shells.size(); ++i) {
        if (!scan.reliable[i]) continue;
        scan.translate_estimate = scan.colnorm_max[i];
        scan.specrad_estimate = scan.specrad_max[i];
        scan.berezin_estimate = scan.berezin_max[i];
    }
    return scan;
}

struct EssNormP2 {
    double estimate = 0.0;      // boundary-translate headline
    double cs_estimate = 0.0;   // cross-check
    TranslateScan scan;
    std::vector<double> cs_curve;
};

// Spec-facing name for the shell sweep: shells, directions and the f-family
// size live in the config; estimates come from the outermost reliable shell.
inline TranslateScan boundary_translate_norm(const OperatorExpr& expr, int ambient_degree,
                                             AssemblyContext& ctx,
                                             const EssNormConfig& cfg) {
    return translate_scan(expr, ambient_degree, ctx, cfg);
}

inline EssNormP2 ess_norm_p2(const OperatorExpr& expr, int ambient_degree,
                             AssemblyContext& ctx, const EssNormConfig& cfg) {
    EssNormP2 out;
    out.scan = translate_scan(expr, ambient_degree, ctx, cfg);
    out.estimate = out.scan.translate_estimate;
    BasisPtr basis = ctx.basis(ambient_degree);
    const OperatorMatrix S = assemble(expr, basis, ctx);
    out.cs_curve = c_s(S, cfg.cs_cutoffs);
    out.cs_estimate = out.cs_curve.back();
    return out;
}

inline double ess_spectral_radius_p2(const OperatorExpr& expr, int ambient_degree,
                                     AssemblyContext& ctx, const EssNormConfig& cfg) {
    return translate_scan(expr, ambient_degree, ctx, cfg).specrad_estimate;
}

enum class CompactnessVerdict { Compact, NonCompact, Inconclusive, MembershipUnknown };

inline const char* to_string(CompactnessVerdict v) {
    switch (v) {
        case CompactnessVerdict::Compact: return "compact";
        case CompactnessVerdict::NonCompact: return "non-compact";
        case CompactnessVerdict::Inconclusive: return "inconclusive";
        case CompactnessVerdict::MembershipUnknown: return "membership unknown";
    }
    return "?";
}

struct CompactnessResult {
    CompactnessVerdict verdict = CompactnessVerdict::Inconclusive;
    double berezin_max = 0.0;          // outermost reliable shell
    std::vector<double> cs_by_degree;  // c_s at the top cutoff across degrees
    std::vector<int> degrees;
    TranslateScan scan;
};

// Compact iff the Berezin transform dies at the boundary and the exterior
// mass of the image dies with it, with a decreasing trend in the working
// degree.  Membership in the Toeplitz algebra holds by construction for
// recipes.  A precomputed scan can be passed to avoid repeating the sweep.
inline CompactnessResult compactness_test(const OperatorExpr& expr, int ambient_degree,
                                          AssemblyContext& ctx, const EssNormConfig& cfg,
                                          const TranslateScan* precomputed = nullptr) {
    CompactnessResult res;
    res.scan = precomputed ? *precomputed : translate_scan(expr, ambient_degree, ctx, cfg);
    res.berezin_max = res.scan.berezin_estimate;
    for (int d : {ambient_degree - 20, ambient_degree - 10, ambient_degree}) {
        if (d <= 0) continue;
        BasisPtr basis = ctx.basis(d);
        const OperatorMatrix S = assemble(expr, basis, ctx);
        res.cs_by_degree.push_back(c_s(S, {cfg.cs_cutoffs.back()}).front());
        res.degrees.push_back(d);
    }
    const double cs_final = res.cs_by_degree.back();
    bool cs_trend = true;
    for (std::size_t i = 1; i < res.cs_by_degree.size(); ++i)
        if (res.cs_by_degree[i] > res.cs_by_degree[i - 1] + 0.02) cs_trend = false;
    const bool ber_ok = res.berezin_max < cfg.berezin_compact_max;
    const bool cs_ok = cs_final < cfg.cs_compact_max && cs_trend;
    if (ber_ok && cs_ok)
        res.verdict = CompactnessVerdict::Compact;
    else if (res.berezin_max > 2.0 * cfg.berezin_compact_max ||
             cs_final > 2.0 * cfg.cs_compact_max)
        res.verdict = CompactnessVerdict::NonCompact;
    else
        res.verdict = CompactnessVerdict::Inconclusive;
    return res;
}

// Free-form matrices cannot certify membership in the Toeplitz algebra, so
// only the sampled curves are reported.
inline CompactnessResult compactness_test(const OperatorMatrix& S, const EssNormConfig& cfg) {
    CompactnessResult res;
    res.verdict = CompactnessVerdict::MembershipUnknown;
    double ber = 0.0;
    for (double shell : cfg.shells)
        for (const BallPoint& z : shell_points(shell, S.basis->n, cfg.directions))
            ber = std::max(ber, std::abs(berezin(S, z)));
    res.berezin_max = ber;
    res.cs_by_degree.push_back(c_s(S, {cfg.cs_cutoffs.back()}).front());
    res.degrees.push_back(S.basis->degree);
    return res;
}

// Full report for the CLI: every sampled curve in one bundle.
struct EssNormReport {
    std::string label;
    EssNormConfig cfg;
    std::vector<double> cs_curve;
    std::vector<double> bs_shells, bs_values;
    std::vector<double> as_shells, as_values;
    std::vector<int> as_empty;
    TranslateScan scan;
    double ess_norm_estimate = 0.0;
    double specrad_estimate = 0.0;
    double cs_estimate = 0.0;
    CompactnessVerdict verdict = CompactnessVerdict::Inconclusive;
    double berezin_max = 0.0;
};

inline EssNormReport ess_norm_report(const OperatorExpr& expr, int ambient_degree,
                                     AssemblyContext& ctx, const EssNormConfig& cfg,
                                     const Measure* lattice_mu = nullptr) {
    EssNormReport rep;
    rep.label = expr.label;
    rep.cfg = cfg;
    rep.scan = translate_scan(expr, ambient_degree, ctx, cfg);
    rep.ess_norm_estimate = rep.scan.translate_estimate;
    rep.specrad_estimate = rep.scan.specrad_estimate;
    rep.berezin_max = rep.scan.berezin_estimate;
    BasisPtr basis = ctx.basis(ambient_degree);
    const OperatorMatrix S = assemble(expr, basis, ctx);
    rep.cs_curve = c_s(S, cfg.cs_cutoffs);
    rep.cs_estimate = rep.cs_curve.back();
    // a_s and b_s run per shell at the lifted degree, so the kernel spans and
    // kernel test directions stay representable out to the shell
    for (std::size_t si = 0; si < cfg.shells.size(); ++si) {
        const double shell = cfg.shells[si];
        const auto probes = shell_points(shell, ctx.n(), cfg.directions);
        BasisPtr shell_basis = ctx.basis(rep.scan.degrees[si]);
        const OperatorMatrix S_at = assemble(expr, shell_basis, ctx);
        rep.bs_shells.push_back(shell);
        rep.bs_values.push_back(b_s_kernel_direction(S_at, cfg.bs_r, probes));
        if (lattice_mu) {
            const ASResult a = a_s(S_at, cfg.as_r, probes, *lattice_mu,
                                   cfg.as_tail_filter, cfg.as_span_threshold);
            rep.as_shells.push_back(shell);
            rep.as_values.push_back(a.value);
            rep.as_empty.push_back(a.empty_probes);
        }
    }
    const CompactnessResult c = compactness_test(expr, ambient_degree, ctx, cfg, &rep.scan);
    rep.verdict = c.verdict;
    return rep;
}

}  // namespace bergman
