#pragma once

// Experiment driver behind the CLI.  Every subcommand writes CSV (curves) or
// JSON (reports) with the full configuration and seed embedded, so a rerun
// with the same flags produces byte-identical files.  Exit codes: 0 ok,
// 2 config validation, 3 numerical-reliability flags under --strict.

#include <fstream>
#include <map>

#include "bergman/io.hpp"

namespace bergman {

struct RunConfig {
    int n = 1;
    double alpha = 0.0;
    double p = 2.0;
    int degree = 40;
    std::vector<double> shells{0.90, 0.95, 0.98};
    double rho = 1.0;
    double sigma = 1.0;
    int k = 1;
    std::string symbol = "one";
    std::string measure = "valpha";
    std::uint64_t seed = 42;
    std::string out = "bergman_out";
    bool strict = false;
    // subcommand extras
    double s_exp = 4.0;
    double t_exp = 0.0;
    double truncation = 0.995;
    std::vector<double> rho_list{1.0, 0.5, 0.25};
    std::vector<double> sigma_list{1.0, 2.0, 3.0};

    void validate() const {
        if (n != 1 && n != 2) throw ConfigError("n must be 1 or 2");
        if (!(alpha > -1.0)) throw ConfigError("alpha must be > -1");
        if (!(p > 1.0)) throw ConfigError("p must be in (1, inf)");
        if (degree < 1) throw ConfigError("degree must be >= 1");
        if (!(rho > 0.0)) throw ConfigError("rho must be > 0");
        if (sigma < 0.0) throw ConfigError("sigma must be >= 0");
        if (k < 0) throw ConfigError("k must be >= 0");
        if (!(truncation > 0.0 && truncation < 1.0))
            throw ConfigError("truncation radius must be in (0,1)");
        for (double s : shells)
            if (!(s > 0.0 && s < 1.0)) throw ConfigError("shells must be in (0,1)");
    }

    std::string header() const {
        std::ostringstream ss;
        ss << "n=" << n << " alpha=" << alpha << " p=" << p << " degree=" << degree
           << " rho=" << rho << " sigma=" << sigma << " k=" << k << " symbol=" << symbol
           << " measure=" << measure << " truncation=" << truncation << " seed=" << seed;
        return ss.str();
    }
};

// plain key=value file, '#' comments; flags override afterwards
inline std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::map<std::string, std::string> kv;
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path);
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("bad config line: " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

inline std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

inline void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& val) {
    if (key == "n") cfg.n = std::stoi(val);
    else if (key == "alpha") cfg.alpha = std::stod(val);
    else if (key == "p") cfg.p = std::stod(val);
    else if (key == "degree") cfg.degree = std::stoi(val);
    else if (key == "shells") cfg.shells = parse_list(val);
    else if (key == "rho") cfg.rho = std::stod(val);
    else if (key == "sigma") cfg.sigma = std::stod(val);
    else if (key == "k") cfg.k = std::stoi(val);
    else if (key == "symbol") cfg.symbol = val;
    else if (key == "measure") cfg.measure = val;
    else if (key == "seed") cfg.seed = std::stoull(val);
    else if (key == "out") cfg.out = val;
    else if (key == "strict") cfg.strict = (val == "1" || val == "true");
    else if (key == "s") cfg.s_exp = std::stod(val);
    else if (key == "t") cfg.t_exp = std::stod(val);
    else if (key == "truncation") cfg.truncation = std::stod(val);
    else if (key == "rho_list") cfg.rho_list = parse_list(val);
    else if (key == "sigma_list") cfg.sigma_list = parse_list(val);
    else throw ConfigError("unknown config key: " + key);
}

// --- named symbols ---------------------------------------------------------

inline SymbolFunction make_symbol(const std::string& name) {
    if (name == "one") return symbol_one();
    if (name == "coord")
        return {[](const BallPoint& w) { return w[0]; }, 1.0, false, "coord"};
    if (name == "half-shift")
        return {[](const BallPoint& w) { return 0.5 * (1.0 + w[0]); }, 1.0, false,
                "half-shift"};
    if (name == "bump")
        return {[](const BallPoint& w) { return Complex(1.0 - w.norm_sq(), 0.0); }, 1.0,
                true, "bump"};
    if (name.rfind("indicator-annulus(", 0) == 0) {
        const auto close = name.find(')');
        const auto args = parse_list(name.substr(18, close - 18));
        if (args.size() != 2) throw ConfigError("indicator-annulus needs (r1,r2)");
        const double lo = args[0] * args[0], hi = args[1] * args[1];
        return {[lo, hi](const BallPoint& w) {
                    const double u = w.norm_sq();
                    return Complex(u >= lo && u <= hi ? 1.0 : 0.0, 0.0);
                },
                1.0, true, name};
    }
    throw ConfigError("unknown symbol: " + name);
}

// generator with the closed-form fast paths where they apply
inline Generator make_generator(const std::string& name, int n) {
    if (n == 1 && name == "coord")
        return Generator::holo_poly({Complex(0.0, 0.0), Complex(1.0, 0.0)}, "coord");
    if (n == 1 && name == "half-shift")
        return Generator::holo_poly({Complex(0.5, 0.0), Complex(0.5, 0.0)}, "half-shift");
    if (n == 1 && name == "bump") return Generator::mobius_bump(BallPoint::zero(1));
    if (name == "one") return Generator::identity();
    return Generator::toeplitz(make_symbol(name));
}

// 'a*b*c' products of named symbols; "identity" and "semicommutator" are
// recognized whole.
inline OperatorExpr make_expr(const std::string& spec, int n) {
    if (spec == "identity" || spec == "one") return OperatorExpr::identity();
    if (spec == "semicommutator") {
        if (n != 1) throw ConfigError("semicommutator is a disk example");
        OperatorExpr prod = expr_product(
            OperatorExpr::from_generator(
                Generator::holo_poly({Complex(0.0, 0.0), Complex(1.0, 0.0)}, "conj-coord",
                                     /*conjugated=*/true),
                "T_conj-coord"),
            OperatorExpr::from_generator(make_generator("coord", n), "T_coord"));
        // T_{|w|^2} = I - T_{1-|w|^2}, both sides exact at any degree
        OperatorExpr abs2 = expr_sum(
            OperatorExpr::identity(),
            OperatorExpr::from_generator(Generator::mobius_bump(BallPoint::zero(1)), "T_bump"),
            Complex(-1.0, 0.0), "T_abs2");
        return expr_sum(prod, abs2, Complex(-1.0, 0.0), "semicommutator");
    }
    OperatorExpr e;
    bool first = true;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, '*')) {
        OperatorExpr part = OperatorExpr::from_generator(make_generator(tok, n), "T_" + tok);
        e = first ? part : expr_product(e, part);
        first = false;
    }
    if (first) throw ConfigError("empty symbol spec");
    e.label = spec;
    return e;
}

// --- named measures --------------------------------------------------------

struct MeasureBundle {
    Measure mu;
    std::optional<Lattice> lattice;  // kept when the measure is mu_rho
};

inline MeasureBundle make_measure(const std::string& name, const RunConfig& cfg,
                                  const GridPtr& grid) {
    if (name == "valpha") {
        if (!grid) throw ConfigError("valpha measure needs a grid context");
        return {Measure::v_alpha(grid), std::nullopt};
    }
    if (name == "dirac0") return {Measure::dirac(BallPoint::zero(cfg.n)), std::nullopt};
    if (name.rfind("atom(", 0) == 0) {
        const auto close = name.find(')');
        const auto args = parse_list(name.substr(5, close - 5));
        if (args.size() != 2) throw ConfigError("atom needs (re,im)");
        return {Measure::dirac(BallPoint(Complex(args[0], args[1]))), std::nullopt};
    }
    if (name == "mu-rho") {
        GridPtr hg = cfg.n == 1
                         ? build_hyperbolic_disk_grid(cfg.alpha, cfg.rho, cfg.truncation)
                         : grid;
        Lattice lat = build_lattice(cfg.rho, cfg.truncation, hg);
        Measure mu = mu_rho(lat, cfg.alpha, hg);
        return {std::move(mu), std::move(lat)};
    }
    throw ConfigError("unknown measure: " + name);
}

// --- output helpers --------------------------------------------------------

class CsvOut {
public:
    CsvOut(const std::string& path, const std::string& subcommand, const RunConfig& cfg) {
        f_.open(path);
        if (!f_) throw std::runtime_error("cannot open output " + path);
        f_ << "# bergman " << subcommand << ' ' << cfg.header() << '\n';
    }
    template <typename... T>
    void row(T&&... vals) {
        bool first = true;
        ((f_ << (first ? "" : ",") << cell(vals), first = false), ...);
        f_ << '\n';
    }

private:
    static std::string cell(double v) { return io_detail::fmt(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(const std::string& v) { return v; }
    static std::string cell(const char* v) { return v; }
    std::ofstream f_;
};

inline void write_json(const std::string& path, const std::string& subcommand,
                       const RunConfig& cfg, nlohmann::json j) {
    j["subcommand"] = subcommand;
    j["config"] = cfg.header();
    j["seed"] = cfg.seed;
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output " + path);
    f << j.dump(2) << '\n';
}

// --- subcommands -----------------------------------------------------------

inline int run_geometry_check(const RunConfig& cfg) {
    Rng rng(cfg.seed);
    double worst_identity = 0.0, worst_involution = 0.0, worst_invariance = 0.0;
    const int pairs = 10000;
    for (int i = 0; i < pairs; ++i) {
        const BallPoint z = random_ball_point(rng, cfg.n, 0.99);
        const BallPoint w = random_ball_point(rng, cfg.n, 0.99);
        const BallPoint u = random_ball_point(rng, cfg.n, 0.9);
        worst_identity = std::max(worst_identity, mobius_identity_residual(z, w));
        worst_involution = std::max(worst_involution, rho(mobius(z, mobius(z, w)), w));
        worst_invariance = std::max(
            worst_invariance, std::abs(rho(mobius(u, z), mobius(u, w)) - rho(z, w)));
    }
    nlohmann::json j;
    j["pairs"] = pairs;
    j["max_identity_residual"] = worst_identity;
    j["max_involution_residual"] = worst_involution;
    j["max_invariance_residual"] = worst_invariance;
    write_json(cfg.out + ".json", "geometry-check", cfg, j);
    return worst_identity < 1e-10 && worst_involution < 1e-10 && worst_invariance < 1e-10
               ? 0
               : 3;
}

inline int run_quadrature_check(const RunConfig& cfg) {
    GridPtr g = build_grid(cfg.n, cfg.alpha, cfg.degree + 6, 2 * cfg.degree + 8);
    CsvOut csv(cfg.out + ".csv", "quadrature-check", cfg);
    csv.row("quantity", "value");
    csv.row("total_mass", g->total_mass());
    csv.row("mass_error", std::abs(g->total_mass() - 1.0));
    // worst monomial error within the declared exactness degree
    double worst = 0.0;
    for (int a = 0; a + a <= std::min(g->exact_degree, 2 * cfg.degree); ++a) {
        const Complex v = grid_integrate(*g, [&](const BallPoint& w) {
            return std::pow(std::abs(w[0]), 2 * a);
        });
        const double expected =
            std::exp(std::lgamma(a + 1.0) + std::lgamma(cfg.n + 1.0 + cfg.alpha) -
                     std::lgamma(cfg.n + 1.0 + a + cfg.alpha));
        worst = std::max(worst, std::abs(v.real() - expected));
    }
    csv.row("monomial_exactness_error", worst);
    const bool ok = std::abs(g->total_mass() - 1.0) < (cfg.n == 1 ? 1e-8 : 1e-5);
    return ok || !cfg.strict ? 0 : 3;
}

inline int run_fst_growth(const RunConfig& cfg) {
    GridPtr g = cfg.n == 1 ? build_disk_grid(cfg.t_exp, 220, 700)
                           : build_ball2_grid(cfg.t_exp, 40, 40, 24);
    CsvOut csv(cfg.out + ".csv", "fst-growth", cfg);
    csv.row("r", "F", "log_one_minus_r2", "log_F");
    std::vector<double> xs, ys;
    for (double r : {0.90, 0.925, 0.95, 0.97, 0.98, 0.99, 0.995, 0.999}) {
        const double F = f_st(cfg.s_exp, cfg.t_exp, BallPoint(Complex(r, 0.0)), *g);
        const double x = std::log(1.0 - r * r), y = std::log(F);
        xs.push_back(x);
        ys.push_back(y);
        csv.row(r, F, x, y);
    }
    // least-squares slope
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
    mx /= xs.size();
    my /= ys.size();
    double num = 0, den = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    nlohmann::json j;
    j["slope"] = num / den;
    j["expected_slope_if_growing"] = cfg.n + 1 + cfg.t_exp - cfg.s_exp;
    write_json(cfg.out + ".json", "fst-growth", cfg, j);
    return 0;
}

inline int run_lattice(const RunConfig& cfg) {
    GridPtr g = cfg.n == 1 ? build_hyperbolic_disk_grid(cfg.alpha, cfg.rho, cfg.truncation)
                           : build_grid(2, cfg.alpha, 48, 48);
    Lattice lat = build_lattice(cfg.rho, cfg.truncation, g);
    Measure mu = mu_rho(lat, cfg.alpha, g);
    std::ofstream f(cfg.out + ".csv");
    f << "# bergman lattice " << cfg.header() << '\n';
    save_lattice_csv(lat, mu, f);
    nlohmann::json j;
    j["centers"] = lat.center_count();
    j["min_separation"] = lat.min_separation;
    j["covering_radius"] = lat.covering_radius;
    j["separation_ok"] = lat.min_separation >= cfg.rho / 2.0 - 1e-12;
    j["covering_ok"] = lat.covering_radius <= cfg.rho + 1e-12;
    j["total_mass"] = mu.total_variation();
    write_json(cfg.out + ".json", "lattice", cfg, j);
    return 0;
}

inline int run_carleson(const RunConfig& cfg) {
    GridPtr g = cfg.n == 1 ? build_disk_grid(cfg.alpha, 160, 512)
                           : build_ball2_grid(cfg.alpha, 24, 24, 16);
    MeasureBundle mb = make_measure(cfg.measure, cfg, g);
    const auto probes = default_probes(cfg.n, 9, 4, cfg.seed);
    CsvOut csv(cfg.out + ".csv", "carleson", cfg);
    csv.row("probe_radius", "rkm_at_probe", "geo_at_probe");
    const double s = n_plus(cfg.n, cfg.alpha);
    for (const BallPoint& z : probes) {
        const double pref = std::pow(1.0 - z.norm_sq(), s);
        const double rkm = pref * mb.mu.integrate_abs([&](const BallPoint& w) {
            return std::pow(std::norm(1.0 - inner(z, w)), -s);
        });
        const double geo = mb.mu.abs_mass_in(HyperbolicDisk(z, cfg.rho)) /
                           std::pow(1.0 - z.norm_sq(), s);
        csv.row(z.norm(), rkm, geo);
    }
    nlohmann::json j;
    j["rkm"] = carleson_rkm(mb.mu, cfg.alpha, probes);
    j["geo"] = carleson_geo(mb.mu, cfg.alpha, cfg.rho, probes);
    j["ratio"] = j["rkm"].get<double>() / std::max(1e-300, j["geo"].get<double>());
    write_json(cfg.out + ".json", "carleson", cfg, j);
    return 0;
}

inline int run_berezin(const RunConfig& cfg) {
    BasisPtr basis = make_basis(cfg.n, cfg.alpha, cfg.degree);
    AssemblyContext ctx(cfg.n, cfg.alpha);
    const OperatorMatrix S = assemble(make_expr(cfg.symbol, cfg.n), basis, ctx);
    CsvOut csv(cfg.out + ".csv", "berezin", cfg);
    csv.row("shell", "direction", "re", "im", "abs");
    bool tail_bad = false;
    for (double shell : cfg.shells) {
        for (const BallPoint& z : shell_points(shell, cfg.n, 8)) {
            const Complex b = berezin(S, z);
            csv.row(shell, std::atan2(z[0].imag(), z[0].real()), b.real(), b.imag(),
                    std::abs(b));
            tail_bad = tail_bad || !kernel_vector(z, 2.0, *basis).tail_ok;
        }
    }
    return tail_bad && cfg.strict ? 3 : 0;
}

inline int run_bk_approx(const RunConfig& cfg) {
    BasisPtr basis = make_basis(cfg.n, cfg.alpha, cfg.degree);
    MeasureBundle mb = make_measure(cfg.measure, cfg, basis->grid);
    const OperatorMatrix T = tmu_matrix(mb.mu, basis);
    CsvOut csv(cfg.out + ".csv", "bk-approx", cfg);
    csv.row("k", "error");
    for (double off : {0.0, 2.0, 5.0, 10.0, 20.0}) {
        const double kk = cfg.alpha + off;
        const bool radial = cfg.measure == "dirac0" || cfg.measure == "valpha";
        const OperatorMatrix Tk = toeplitz_matrix(bk_symbol(mb.mu, kk, cfg.alpha, radial), basis);
        OperatorMatrix diff;
        diff.mat = Tk.mat - T.mat;
        diff.basis = basis;
        csv.row(kk, op_norm(diff));
    }
    return 0;
}

inline int run_mu_rho(const RunConfig& cfg) {
    BasisPtr basis = make_basis(cfg.n, cfg.alpha, cfg.degree);
    CsvOut csv(cfg.out + ".csv", "mu-rho", cfg);
    csv.row("rho", "centers", "norm_T_minus_I");
    for (double r : cfg.rho_list) {
        RunConfig c2 = cfg;
        c2.rho = r;
        MeasureBundle mb = make_measure("mu-rho", c2, basis->grid);
        OperatorMatrix T = tmu_matrix(mb.mu, basis);
        OperatorMatrix diff;
        diff.mat = T.mat - Eigen::MatrixXcd::Identity(basis->size(), basis->size());
        diff.basis = basis;
        csv.row(r, mb.lattice->center_count(), op_norm(diff));
    }
    return 0;
}

inline int run_segmented(const RunConfig& cfg) {
    AssemblyContext ctx(cfg.n, cfg.alpha);
    RunConfig cmu = cfg;
    MeasureBundle mb = make_measure(cfg.measure == "valpha" ? "mu-rho" : cfg.measure, cmu,
                                    nullptr);
    if (!mb.lattice) throw ConfigError("segmented needs the mu-rho measure");
    BasisPtr basis = make_basis(cfg.n, cfg.alpha, cfg.degree);
    const OperatorMatrix S = assemble(make_expr(cfg.symbol, cfg.n), basis, ctx);
    CsvOut csv(cfg.out + ".csv", "segmented", cfg);
    csv.row("sigma", "cells", "error");
    for (double sg : cfg.sigma_list) {
        RunConfig cl = cfg;
        cl.rho = (cfg.k + 1) * sg;  // base lattice parameter per the covering construction
        Lattice base = build_lattice(cl.rho, cfg.truncation, mb.lattice->grid);
        CoveringFamily cov = build_covering(sg, cfg.k, base);
        const SegmentedResult r = segmented_approx(S, mb.mu, cov);
        csv.row(sg, cov.levels[0].size(), r.error);
    }
    return 0;
}

inline int run_essnorm(const RunConfig& cfg) {
    AssemblyContext ctx(cfg.n, cfg.alpha, 200);
    EssNormConfig ec;
    ec.shells = cfg.shells;
    MeasureBundle mb = make_measure("mu-rho", cfg, nullptr);
    const EssNormReport rep = ess_norm_report(make_expr(cfg.symbol, cfg.n), cfg.degree, ctx,
                                              ec, &mb.mu);
    write_json(cfg.out + ".json", "essnorm", cfg, report_json(rep));
    CsvOut csv(cfg.out + ".csv", "essnorm", cfg);
    csv.row("curve", "param", "value");
    for (std::size_t i = 0; i < rep.cs_curve.size(); ++i)
        csv.row("c_s", ec.cs_cutoffs[i], rep.cs_curve[i]);
    for (std::size_t i = 0; i < rep.bs_values.size(); ++i)
        csv.row("b_s", rep.bs_shells[i], rep.bs_values[i]);
    for (std::size_t i = 0; i < rep.as_values.size(); ++i)
        csv.row("a_s", rep.as_shells[i], rep.as_values[i]);
    for (std::size_t i = 0; i < rep.scan.shells.size(); ++i)
        csv.row("translate", rep.scan.shells[i], rep.scan.colnorm_max[i]);
    bool unreliable = false;
    for (bool r : rep.scan.reliable) unreliable = unreliable || !r;
    return unreliable && cfg.strict ? 3 : 0;
}

inline int run_compactness(const RunConfig& cfg) {
    AssemblyContext ctx(cfg.n, cfg.alpha, 200);
    EssNormConfig ec;
    ec.shells = cfg.shells;
    const CompactnessResult res =
        compactness_test(make_expr(cfg.symbol, cfg.n), cfg.degree, ctx, ec);
    nlohmann::json j;
    j["verdict"] = to_string(res.verdict);
    j["berezin_max"] = res.berezin_max;
    j["cs_by_degree"] = res.cs_by_degree;
    j["degrees"] = res.degrees;
    j["thresholds"] = {{"berezin_compact_max", ec.berezin_compact_max},
                       {"cs_compact_max", ec.cs_compact_max}};
    write_json(cfg.out + ".json", "compactness", cfg, j);
    bool unreliable = false;
    for (bool r : res.scan.reliable) unreliable = unreliable || !r;
    return unreliable && cfg.strict ? 3 : 0;
}

inline int run_subcommand(const std::string& name, const RunConfig& cfg) {
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }
    try {
        if (name == "geometry-check") return run_geometry_check(cfg);
        if (name == "quadrature-check") return run_quadrature_check(cfg);
        if (name == "fst-growth") return run_fst_growth(cfg);
        if (name == "lattice") return run_lattice(cfg);
        if (name == "carleson") return run_carleson(cfg);
        if (name == "berezin") return run_berezin(cfg);
        if (name == "bk-approx") return run_bk_approx(cfg);
        if (name == "mu-rho") return run_mu_rho(cfg);
        if (name == "segmented") return run_segmented(cfg);
        if (name == "essnorm") return run_essnorm(cfg);
        if (name == "compactness") return run_compactness(cfg);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    std::fprintf(stderr, "unknown subcommand: %s\n", name.c_str());
    return 2;
}

}  // namespace bergman
