// Acceptance suite: one line per criterion, PASS/FAIL with the measured
// numbers, nonzero exit when any criterion fails.  Desk-scale surrogates for
// the qualitative theorems; every tolerance is pinned here in code.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "bergman/cli.hpp"
#include "bergman/essnorm.hpp"

using namespace bergman;

namespace {

int g_failures = 0;

double now_s() {
    static const auto t0 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report(int idx, const char* name, bool ok, const std::string& detail) {
    if (!ok) ++g_failures;
    std::printf("[%s] criterion %2d %-22s %s\n", ok ? "PASS" : "FAIL", idx, name,
                detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), pattern, args...);
    return buf;
}

double slope_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
    mx /= xs.size();
    my /= ys.size();
    double num = 0, den = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    return num / den;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

int main() {
    now_s();  // anchor the budget clock
    std::printf("acceptance suite, n = 1 focus, alpha = 0 unless stated\n");

    // ---- 1. geometry identities --------------------------------------------
    {
        Timer t;
        double wid = 0, winv = 0, wmet = 0;
        for (int n : {1, 2}) {
            Rng rng(1000 + n);
            for (int i = 0; i < 10000; ++i) {
                const BallPoint z = random_ball_point(rng, n, 0.99);
                const BallPoint w = random_ball_point(rng, n, 0.99);
                const BallPoint u = random_ball_point(rng, n, 0.9);
                wid = std::max(wid, mobius_identity_residual(z, w));
                winv = std::max(winv, rho(mobius(z, mobius(z, w)), w));
                wmet = std::max(wmet,
                                std::abs(rho(mobius(u, z), mobius(u, w)) - rho(z, w)));
            }
        }
        const double secs = t.seconds();
        report(1, "geometry identities",
               wid < 1e-10 && winv < 1e-10 && wmet < 1e-10 && secs < 2.0,
               fmt("residuals %.1e/%.1e/%.1e over 2x10^4 pairs, %.2fs", wid, winv, wmet,
                   secs));
    }

    // ---- 2. v_alpha normalization ------------------------------------------
    {
        bool ok = true;
        std::string detail;
        for (double a : {-0.5, 0.0, 0.5, 2.0}) {
            const double m1 = build_disk_grid(a, 40, 80)->total_mass();
            ok = ok && std::abs(m1 - 1.0) < 1e-8;
            const double m2 = build_ball2_grid(a, 16, 16, 12)->total_mass();
            ok = ok && std::abs(m2 - 1.0) < 1e-5;
            detail += fmt("a=%g:%.1e/%.1e ", a, std::abs(m1 - 1.0), std::abs(m2 - 1.0));
        }
        report(2, "normalization", ok, detail);
    }

    // ---- 3. growth of F_{s,t} ----------------------------------------------
    {
        GridPtr g0 = build_disk_grid(0.0, 280, 6144);
        std::vector<double> xs, ys;
        for (double r : {0.90, 0.95, 0.98, 0.99, 0.995, 0.999}) {
            const double F = f_st(4.0, 0.0, BallPoint(Complex(r, 0.0)), *g0);
            xs.push_back(std::log(1.0 - r * r));
            ys.push_back(std::log(F));
        }
        const double slope = slope_fit(xs, ys);  // expect n+1+t-s = -2
        std::vector<double> bounded;
        for (double r : {0.99, 0.995, 0.999})
            bounded.push_back(f_st(1.0, 0.0, BallPoint(Complex(r, 0.0)), *g0));
        const double var = (*std::max_element(bounded.begin(), bounded.end()) -
                            *std::min_element(bounded.begin(), bounded.end())) /
                           *std::min_element(bounded.begin(), bounded.end());
        report(3, "F_{s,t} growth", std::abs(slope + 2.0) < 0.05 && var < 0.05,
               fmt("slope %.4f (target -2 +/- 0.05), bounded-case variation %.2f%%", slope,
                   100.0 * var));
    }

    // ---- 4. lattice invariants ---------------------------------------------
    {
        Timer t;
        bool ok = true;
        std::string detail;
        for (double rho : {0.3, 1.0}) {
            GridPtr g = build_hyperbolic_disk_grid(0.0, std::min(rho, 0.5), 0.99);
            const Lattice lat = build_lattice(rho, 0.99, g);
            ok = ok && lat.min_separation >= rho / 2.0 - 1e-12 &&
                 lat.covering_radius <= rho + 1e-12;
            detail += fmt("rho=%.1f: sep %.3f cov %.3f (%zu centers) ", rho,
                          lat.min_separation, lat.covering_radius, lat.center_count());
        }
        const double secs = t.seconds();
        ok = ok && secs < 5.0;
        report(4, "lattice invariants", ok, detail + fmt("%.2fs", secs));
    }

    // ---- shared objects for 5/7/10/11 --------------------------------------
    AssemblyContext ctx(1, 0.0, 200);
    BasisPtr b30 = make_basis(1, 0.0, 30);
    GridPtr hg = build_hyperbolic_disk_grid(0.0, 0.25, 0.9985);
    const Lattice lat05 = build_lattice(0.5, 0.9985, hg);
    const Measure murho05 = mu_rho(lat05, 0.0, hg);

    // ---- 5. mu_rho converges to the identity --------------------------------
    {
        std::vector<double> errs;
        std::string detail;
        for (double rho : {1.0, 0.5, 0.25}) {
            const Lattice lat = build_lattice(rho, 0.9985, hg);
            const Measure mu = mu_rho(lat, 0.0, hg);
            const OperatorMatrix T = tmu_matrix(mu, b30);
            OperatorMatrix d;
            d.mat = T.mat - Eigen::MatrixXcd::Identity(b30->size(), b30->size());
            d.basis = b30;
            errs.push_back(op_norm(d));
            detail += fmt("rho=%.2f:%.4f ", rho, errs.back());
        }
        const bool ok = errs[0] > errs[1] && errs[1] > errs[2] && errs[2] < 0.25;
        report(5, "mu_rho -> identity", ok, detail + "(decreasing, final < 1/4)");
    }

    // ---- 6. T_{B_k(mu)} -> T_mu --------------------------------------------
    {
        bool all_ok = true;
        std::string detail;
        // assembly grid fine enough to resolve B_k of the desk-scale lattice
        BasisPtr bfine = make_basis(1, 0.0, 30, build_disk_grid(0.0, 44, 2048));
        GridPtr hg6 = build_hyperbolic_disk_grid(0.0, 1.0, 0.97);
        const Measure mu6 = mu_rho(build_lattice(1.0, 0.97, hg6), 0.0, hg6);
        struct Case {
            const char* name;
            Measure mu;
            bool radial;
        };
        std::vector<Case> cases;
        cases.push_back({"dirac0", Measure::dirac(BallPoint::zero(1)), true});
        cases.push_back({"w2",
                         Measure::density(
                             bfine->grid,
                             [](const BallPoint& w) { return Complex(std::norm(w[0]), 0.0); },
                             "w2"),
                         true});
        cases.push_back({"mu_rho", mu6, false});
        for (const Case& c : cases) {
            const OperatorMatrix T = tmu_matrix(c.mu, bfine);
            std::vector<double> errs;
            for (double off : {0.0, 2.0, 5.0, 10.0, 20.0}) {
                const OperatorMatrix Tk =
                    toeplitz_matrix(bk_symbol(c.mu, off, 0.0, c.radial), bfine);
                OperatorMatrix d;
                d.mat = Tk.mat - T.mat;
                d.basis = bfine;
                errs.push_back(op_norm(d));
            }
            bool mono = true;
            for (std::size_t i = 1; i < errs.size(); ++i)
                mono = mono && errs[i] <= errs[i - 1] * (1.0 + 1e-9);
            const double ratio = errs.back() / errs.front();
            const bool ok = mono && ratio <= 0.1;
            all_ok = all_ok && ok;
            detail += fmt("%s: %.3f->%.3f ratio %.3f%s  ", c.name, errs.front(),
                          errs.back(), ratio, ok ? "" : " <-fail");
        }
        report(6, "T_{B_k(mu)} -> T_mu", all_ok, detail);
    }

    // ---- 7. Carleson equivalence --------------------------------------------
    {
        const double kC = 64.0;  // calibrated equivalence band, frozen
        GridPtr gd = build_disk_grid(0.0, 256, 2048);
        std::vector<std::pair<std::string, Measure>> family;
        family.emplace_back("valpha", Measure::v_alpha(gd));
        family.emplace_back("mu_rho", murho05);
        family.emplace_back("dirac0", Measure::dirac(BallPoint::zero(1)));
        for (double th : {0.0, 1.57, 3.14, 4.71})
            family.emplace_back("atom99", Measure::dirac(BallPoint(std::polar(0.99, th))));
        bool ok = true;
        double lo = 1e300, hi = 0.0;
        for (auto& [name, mu] : family) {
            auto probes = default_probes(1, 9, 4);
            if (mu.kind() == Measure::Kind::Atomic) {
                for (const Atom& a : mu.atoms()) {
                    probes.push_back(a.location);
                    // boundary-pushed probes along the atom direction
                    const double b = std::atanh(a.location.norm());
                    for (double d : {0.5, 1.0}) {
                        const double rr = std::min(std::tanh(b + d), 0.9995);
                        if (a.location.norm() > 0.0)
                            probes.push_back(BallPoint::unchecked(
                                std::array<Complex, 4>{rr * a.location[0] /
                                                       a.location.norm()}
                                    .data(),
                                1));
                    }
                }
            }
            const double rkm = carleson_rkm(mu, 0.0, probes);
            const double geo = carleson_geo(mu, 0.0, 1.0, probes);
            const double ratio = rkm / geo;
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
            ok = ok && ratio > 1.0 / kC && ratio < kC;
        }
        // both quantities diverge together along the boundary-atom family
        std::vector<double> rkms, geos;
        for (double r : {0.9, 0.99, 0.999}) {
            const Measure at = Measure::dirac(BallPoint(Complex(r, 0.0)));
            auto probes = default_probes(1, 9, 4);
            probes.push_back(BallPoint(Complex(r, 0.0)));
            probes.push_back(BallPoint(Complex(std::min(std::tanh(std::atanh(r) + 1.0), 0.9995), 0.0)));
            rkms.push_back(carleson_rkm(at, 0.0, probes));
            geos.push_back(carleson_geo(at, 0.0, 1.0, probes));
        }
        const bool diverge = rkms[1] > 10 * rkms[0] && rkms[2] > 10 * rkms[1] &&
                             geos[1] > 10 * geos[0] && geos[2] > 10 * geos[1];
        ok = ok && diverge;
        report(7, "Carleson equivalence", ok,
               fmt("ratio band [%.3f, %.3f] within [1/%g, %g]; atom family rkm x%.0f/geo "
                   "x%.0f per step",
                   lo, hi, kC, kC, rkms[2] / rkms[1], geos[2] / geos[1]));
    }

    // ---- 8. rank-one identity ----------------------------------------------
    {
        bool ok = true;
        std::string detail;
        for (int d : {10, 20, 40}) {
            BasisPtr b = ctx.basis(d);
            Eigen::VectorXcd e0 = Eigen::VectorXcd::Unit(b->size(), 0);
            const OperatorMatrix R = rank_one(e0, e0, b);
            const OperatorMatrix T = tmu_matrix(Measure::dirac(BallPoint::zero(1)), b);
            const double diff = (R.mat - T.mat).cwiseAbs().maxCoeff();
            ok = ok && diff == 0.0;
            detail += fmt("d=%d:%.0e ", d, diff);
        }
        report(8, "1(x)1 = T_{delta_0}", ok, detail + "(exact)");
    }

    // ---- 9. compactness characterization ------------------------------------
    {
        EssNormConfig cfg;  // spec default shells {0.90, 0.95, 0.98}
        bool ok = true;
        std::string detail;
        struct Want {
            const char* sym;
            CompactnessVerdict v;
        };
        double bump_ber = 0, semi_ber = 0, id_ber = 0;
        for (const Want& w : {Want{"bump", CompactnessVerdict::Compact},
                              Want{"semicommutator", CompactnessVerdict::Compact},
                              Want{"identity", CompactnessVerdict::NonCompact},
                              Want{"coord", CompactnessVerdict::NonCompact}}) {
            const CompactnessResult r = compactness_test(make_expr(w.sym, 1), 40, ctx, cfg);
            ok = ok && r.verdict == w.v;
            if (std::string(w.sym) == "bump") bump_ber = r.berezin_max;
            if (std::string(w.sym) == "semicommutator") semi_ber = r.berezin_max;
            if (std::string(w.sym) == "identity") id_ber = r.berezin_max;
            detail += fmt("%s:%s ", w.sym, to_string(r.verdict));
        }
        ok = ok && bump_ber < 0.05 && semi_ber < 0.05 && std::abs(id_ber - 1.0) < 1e-6;
        report(9, "compactness verdicts", ok,
               detail + fmt("| Berezin bump %.4f semi %.1e id %.9f", bump_ber, semi_ber,
                            id_ber));
    }

    // ---- 10. essential-norm estimates + 12. spectral radius ------------------
    {
        EssNormConfig cfg;
        // documented per-shell degree schedule: one shell beyond the default
        // triple so the compact reference clears its bound
        cfg.shells = {0.90, 0.95, 0.98, 0.99};
        cfg.cs_cutoffs = {0.90, 0.95, 0.98, 0.99};
        struct Row {
            const char* sym;
            EssNormReport rep;
        };
        std::vector<Row> rows;
        for (const char* sym : {"coord", "half-shift", "bump"})
            rows.push_back({sym, ess_norm_report(make_expr(sym, 1), 40, ctx, cfg, &murho05)});

        const double ew = rows[0].rep.ess_norm_estimate;
        const double eh = rows[1].rep.ess_norm_estimate;
        const double eb = rows[2].rep.ess_norm_estimate;
        bool ok10 = std::abs(ew - 1.0) <= 0.1 && std::abs(eh - 1.0) <= 0.1 && eb < 0.05;
        std::string detail =
            fmt("T_w %.4f, T_{(1+w)/2} %.4f, T_bump %.4f | bands ", ew, eh, eb);
        for (const Row& r : rows) {
            const double four[4] = {r.rep.ess_norm_estimate, r.rep.cs_estimate,
                                    r.rep.bs_values.back(), r.rep.as_values.back()};
            double lo = 1e300, hi = 0.0;
            for (double v : four) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            ok10 = ok10 && hi <= 3.0 * lo;
            detail += fmt("%s:%.2f ", r.sym, hi / lo);
        }
        report(10, "essential norms", ok10, detail + "(pairwise factor <= 3)");

        // 11 uses the shared grid; run before 12 to keep the numbering tidy
        {
            const Measure mu1 = mu_rho(build_lattice(1.0, 0.9985, hg), 0.0, hg);
            const OperatorMatrix S = assemble(make_expr("coord*half-shift", 1), b30, ctx);
            std::vector<double> errs;
            std::string d11;
            for (double sg : {1.0, 2.0, 3.0}) {
                const Lattice base = build_lattice(2.0 * sg, 0.9985, hg);
                const CoveringFamily cov = build_covering(sg, 1, base);
                errs.push_back(segmented_approx(S, mu1, cov).error);
                d11 += fmt("s=%.0f:%.4f(%zu cells) ", sg, errs.back(),
                           cov.levels[0].size());
            }
            const bool ok11 = errs[1] <= errs[0] * (1 + 1e-9) &&
                              errs[2] <= errs[1] * (1 + 1e-9) && errs[2] <= 0.5 * errs[0];
            report(11, "segmented approximation", ok11,
                   d11 + fmt("ratio %.3f <= 0.5", errs[2] / std::max(errs[0], 1e-300)));
        }

        const double rw = rows[0].rep.specrad_estimate;
        const double rb = rows[2].rep.specrad_estimate;
        const bool ok12 = std::abs(rw - 1.0) <= 0.15 && std::abs(rb - eb) < 0.05;
        report(12, "essential spectral radius", ok12,
               fmt("r_e(T_w) %.4f (1 +/- 0.15); bump |r_e - ess| = %.4f < 0.05", rw,
                   std::abs(rb - eb)));
    }

    // ---- 13. determinism and budget -----------------------------------------
    {
        namespace fs = std::filesystem;
        const fs::path dir = fs::temp_directory_path() / "bergman_acceptance";
        fs::create_directories(dir);
        bool ok = true;
        for (const char* sub : {"geometry-check", "quadrature-check", "lattice"}) {
            RunConfig cfg;
            cfg.degree = 12;
            cfg.truncation = 0.95;
            cfg.seed = 2718;
            cfg.out = (dir / sub).string();
            ok = ok && run_subcommand(sub, cfg) == 0;
            std::string first_csv = slurp(cfg.out + ".csv");
            std::string first_json = slurp(cfg.out + ".json");
            ok = ok && run_subcommand(sub, cfg) == 0;
            ok = ok && first_csv == slurp(cfg.out + ".csv") &&
                 first_json == slurp(cfg.out + ".json");
        }
        const double total = now_s();
        ok = ok && total < 600.0;
        report(13, "determinism & budget", ok,
               fmt("byte-identical reruns; total %.1fs < 600s", total));
    }

    std::printf("%d/13 criteria passed\n", 13 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
