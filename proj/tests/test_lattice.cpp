#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "bergman/carleson.hpp"
#include "bergman/io.hpp"
#include "bergman/lattice.hpp"

using namespace bergman;

TEST_CASE("lattice invariants on the disk") {
    for (double rho : {0.3, 1.0}) {
        GridPtr g = build_hyperbolic_disk_grid(0.0, std::min(rho, 0.5), 0.99);
        const Lattice lat = build_lattice(rho, 0.99, g);
        INFO("rho = " << rho << ", centers = " << lat.center_count());
        CHECK(lat.min_separation >= rho / 2.0 - 1e-12);
        CHECK(lat.covering_radius <= rho + 1e-12);
        CHECK(lat.center_count() > 1);

        // cells partition the node set
        std::size_t total = 0;
        for (const auto& c : lat.cells) total += c.size();
        CHECK(total == g->size());
        for (std::size_t i = 0; i < g->size(); ++i) CHECK(lat.cell_of[i] >= 0);

        // brute-force check of separation on a sample of center pairs
        Rng rng(1);
        for (int t = 0; t < 200; ++t) {
            const std::size_t a = rng.next_u64() % lat.center_count();
            const std::size_t bidx = rng.next_u64() % lat.center_count();
            if (a == bidx) continue;
            CHECK(beta(lat.center_point(a), lat.center_point(bidx)) >= rho / 2.0 - 1e-12);
        }

        // every cell contains its center's rho/4 disk (on nodes)
        Rng rng2(2);
        for (int t = 0; t < 2000; ++t) {
            const std::size_t node = rng2.next_u64() % g->size();
            const std::int32_t m = lat.cell_of[node];
            for (std::size_t cm = 0; cm < std::min<std::size_t>(lat.center_count(), 4); ++cm) {
                const std::size_t probe = (cm * 7919 + t) % lat.center_count();
                if (static_cast<std::int32_t>(probe) == m) continue;
                // if the node is within rho/4 of some center, it belongs to it
                if (beta(g->node(node), lat.center_point(probe)) < rho / 4.0 - 1e-12)
                    CHECK(false);
            }
        }
    }
}

TEST_CASE("degenerate lattice: one center when the region is one cell") {
    GridPtr g = build_hyperbolic_disk_grid(0.0, 1.0, 0.2);
    // beta-diameter of |z| <= 0.2 is 2*atanh(0.2) = 0.405 < rho = 1
    const Lattice lat = build_lattice(1.0, 0.2, g);
    CHECK(lat.center_count() == 1);
    const Measure mu = mu_rho(lat, 0.0, g);
    CHECK(mu.atoms().size() == 1);
    CHECK(mu.atoms()[0].mass.real() == Catch::Approx(g->total_mass()).margin(1e-12));
}

TEST_CASE("expand on the node set") {
    GridPtr g = build_hyperbolic_disk_grid(0.0, 0.5, 0.95);
    const Lattice lat = build_lattice(0.5, 0.95, g);
    NodeSet S(lat.cells[2].begin(), lat.cells[2].end());
    std::sort(S.begin(), S.end());

    CHECK(expand({}, 1.0, *g).empty());
    CHECK(expand(S, 0.0, *g) == S);

    const NodeSet e1 = expand(S, 0.5, *g);
    const NodeSet e2 = expand(S, 1.0, *g);
    CHECK(std::includes(e1.begin(), e1.end(), S.begin(), S.end()));
    CHECK(std::includes(e2.begin(), e2.end(), e1.begin(), e1.end()));

    // pointwise agreement with the definition on a sample
    Rng rng(4);
    for (int t = 0; t < 300; ++t) {
        const std::uint32_t node = rng.next_u64() % g->size();
        double dmin = 1e300;
        for (std::uint32_t s : S) dmin = std::min(dmin, beta(g->node(node), g->node(s)));
        const bool in = std::binary_search(e1.begin(), e1.end(), node);
        if (std::abs(dmin - 0.5) > 1e-9) CHECK(in == (dmin <= 0.5));
    }
}

TEST_CASE("covering families: nesting, disjoint base, overlap, separation") {
    const double sigma = 0.5;
    const int k = 1;
    GridPtr g = build_hyperbolic_disk_grid(0.0, 0.7, 0.97);
    const Lattice base = build_lattice((k + 1) * sigma, 0.97, g);
    const CoveringFamily cov = build_covering(sigma, k, base);

    REQUIRE(cov.levels.size() == static_cast<std::size_t>(k + 2));

    // base level partitions the node set
    std::vector<int> count(g->size(), 0);
    for (const NodeSet& s : cov.levels[0])
        for (std::uint32_t v : s) ++count[v];
    for (std::size_t i = 0; i < g->size(); ++i) CHECK(count[i] == 1);

    // nesting F_{i,j} subset F_{i+1,j}
    for (int i = 0; i <= k; ++i)
        for (std::size_t j = 0; j < cov.levels[i].size(); ++j)
            CHECK(std::includes(cov.levels[i + 1][j].begin(), cov.levels[i + 1][j].end(),
                                cov.levels[i][j].begin(), cov.levels[i][j].end()));

    CHECK(cov.overlap_bound >= 1);
    CHECK(cov.overlap_bound <= 32);  // measured N stays moderate

    // separation beta(F_{i,j}, complement of F_{i+1,j}) >= sigma on samples
    Rng rng(6);
    for (int t = 0; t < 60; ++t) {
        const std::size_t j = rng.next_u64() % cov.levels[0].size();
        const NodeSet& in = cov.levels[0][j];
        const NodeSet& out = cov.levels[1][j];
        if (in.empty()) continue;
        const std::uint32_t x = in[rng.next_u64() % in.size()];
        for (int tt = 0; tt < 40; ++tt) {
            const std::uint32_t y = rng.next_u64() % g->size();
            if (std::binary_search(out.begin(), out.end(), y)) continue;
            CHECK(beta(g->node(x), g->node(y)) >= sigma - 1e-9);
        }
    }
}

TEST_CASE("mu_rho is a Carleson measure with comparable cell masses") {
    const double alpha = 0.5;
    GridPtr g = build_hyperbolic_disk_grid(alpha, 0.4, 0.99);
    const Lattice lat = build_lattice(0.4, 0.99, g);
    const Measure mu = mu_rho(lat, alpha, g);

    // total mass = v_alpha of the covered region
    CHECK(mu.total_variation() == Catch::Approx(g->total_mass()).margin(1e-10));

    // finite Carleson quantities
    const auto probes = default_probes(1, 8, 3);
    CHECK(carleson_geo(mu, alpha, 1.0, probes) < 1e3);
    CHECK(carleson_rkm(mu, alpha, probes) < 1e3);

    // masses track (1-|w_m|^2)^{n+1+alpha} within a bounded ratio
    const double s = n_plus(1, alpha);
    double lo = 1e300, hi = 0.0;
    for (const Atom& a : mu.atoms()) {
        const double ratio = a.mass.real() / std::pow(1.0 - a.location.norm_sq(), s);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    CHECK(hi / lo < 50.0);
    CHECK(lo > 0.0);
}

TEST_CASE("two-ball lattice at desk scale") {
    GridPtr g = build_ball2_grid(0.0, 24, 12, 12);
    const Lattice lat = build_lattice(0.8, 0.85, g);
    CHECK(lat.min_separation >= 0.4 - 1e-12);
    CHECK(lat.covering_radius <= 0.8 + 1e-12);
    std::size_t total = 0;
    for (const auto& c : lat.cells) total += c.size();
    CHECK(total == g->size());
}

TEST_CASE("lattice dump format") {
    GridPtr g = build_hyperbolic_disk_grid(0.0, 1.0, 0.9);
    const Lattice lat = build_lattice(1.0, 0.9, g);
    const Measure mu = mu_rho(lat, 0.0, g);
    std::ostringstream os;
    save_lattice_csv(lat, mu, os);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "m,re_w1,im_w1,cell_mass");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    CHECK(rows == lat.center_count());
}

TEST_CASE("build_lattice error reporting") {
    // a grid whose rings are far coarser than the requested covering radius
    GridPtr g = build_hyperbolic_disk_grid(0.0, 4.0, 0.97, 1, 1, 4);
    CHECK_THROWS_AS(build_lattice(0.05, 0.97, g), LatticeError);
    CHECK_THROWS_AS(build_lattice(-1.0, 0.9, g), std::domain_error);
}
