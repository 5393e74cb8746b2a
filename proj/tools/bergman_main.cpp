// Command line driver: one subcommand per experiment, shared flags, optional
// key=value config file (flags override the file).  See README for the
// output schemas.

#include <CLI11.hpp>

#include "bergman/cli.hpp"

int main(int argc, char** argv) {
    bergman::RunConfig cfg;

    // the config file seeds the defaults, so flags parsed afterwards win
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            try {
                for (const auto& [key, val] : bergman::parse_config_file(argv[i + 1]))
                    bergman::apply_config_entry(cfg, key, val);
            } catch (const bergman::ConfigError& e) {
                std::fprintf(stderr, "config error: %s\n", e.what());
                return 2;
            }
        }
    }

    CLI::App app{"numerical toolkit for operators on weighted Bergman spaces of the ball"};
    app.require_subcommand(1);

    std::string config_path;
    std::string shells_str, rho_list_str, sigma_list_str;

    app.add_option("--config", config_path, "key=value config file (flags override)");
    app.add_option("--n", cfg.n, "complex dimension (1 or 2)");
    app.add_option("--alpha", cfg.alpha, "weight exponent, > -1");
    app.add_option("--p", cfg.p, "exponent of A^p_alpha, in (1,inf)");
    app.add_option("--degree", cfg.degree, "basis truncation degree");
    app.add_option("--shells", shells_str, "comma list of |z| shells");
    app.add_option("--rho", cfg.rho, "lattice parameter");
    app.add_option("--sigma", cfg.sigma, "covering expansion step");
    app.add_option("--k", cfg.k, "covering expansion count");
    app.add_option("--symbol", cfg.symbol,
                   "one|coord|half-shift|bump|indicator-annulus(r1,r2)|semicommutator|a*b");
    app.add_option("--measure", cfg.measure, "valpha|dirac0|atom(re,im)|mu-rho");
    app.add_option("--seed", cfg.seed, "random seed");
    app.add_option("--out", cfg.out, "output path stem");
    app.add_flag("--strict", cfg.strict, "promote reliability warnings to exit code 3");
    app.add_option("--s", cfg.s_exp, "F_{s,t} exponent s");
    app.add_option("--t", cfg.t_exp, "F_{s,t} exponent t");
    app.add_option("--truncation", cfg.truncation, "lattice truncation radius");
    app.add_option("--rho-list", rho_list_str, "comma list for mu-rho sweeps");
    app.add_option("--sigma-list", sigma_list_str, "comma list for segmented sweeps");

    for (const char* name :
         {"geometry-check", "quadrature-check", "fst-growth", "lattice", "carleson",
          "berezin", "bk-approx", "mu-rho", "segmented", "essnorm", "compactness"})
        app.add_subcommand(name);

    CLI11_PARSE(app, argc, argv);

    try {
        if (!shells_str.empty()) cfg.shells = bergman::parse_list(shells_str);
        if (!rho_list_str.empty()) cfg.rho_list = bergman::parse_list(rho_list_str);
        if (!sigma_list_str.empty()) cfg.sigma_list = bergman::parse_list(sigma_list_str);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: bad list flag (%s)\n", e.what());
        return 2;
    }

    return bergman::run_subcommand(app.get_subcommands().front()->get_name(), cfg);
}
