#include <catch2/catch_amalgamated.hpp>

#include "bergman/geometry.hpp"

using namespace bergman;

TEST_CASE("mobius fixed points and involution") {
    const BallPoint z{Complex(0.3, 0.4)};
    const BallPoint w{Complex(-0.2, 0.55)};
    const BallPoint zero = BallPoint::zero(1);

    // phi_z(0) = z
    CHECK(rho(mobius(z, zero), z) < 1e-14);
    // phi_0(w) = -w
    const BallPoint mw = mobius(zero, w);
    CHECK(std::abs(mw[0] + w[0]) < 1e-15);
    // phi_z(z) = 0
    CHECK(mobius(z, z).norm() < 1e-14);
    // involution
    CHECK(rho(mobius(z, mobius(z, w)), w) < 1e-12);
}

TEST_CASE("mobius identity, involution and invariance over random pairs") {
    for (int n : {1, 2}) {
        Rng rng(2024 + n);
        double worst_id = 0.0, worst_inv = 0.0, worst_metric = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const BallPoint z = random_ball_point(rng, n, 0.99);
            const BallPoint w = random_ball_point(rng, n, 0.99);
            const BallPoint u = random_ball_point(rng, n, 0.9);
            worst_id = std::max(worst_id, mobius_identity_residual(z, w));
            worst_inv = std::max(worst_inv, rho(mobius(z, mobius(z, w)), w));
            worst_metric = std::max(
                worst_metric, std::abs(rho(mobius(u, z), mobius(u, w)) - rho(z, w)));
        }
        INFO("n = " << n);
        CHECK(worst_id < 1e-10);
        CHECK(worst_inv < 1e-10);
        CHECK(worst_metric < 1e-10);
    }
}

TEST_CASE("rho and beta") {
    const BallPoint w{Complex(0.5, 0.0)};
    const BallPoint zero = BallPoint::zero(1);
    CHECK(rho(zero, w) == Catch::Approx(0.5).margin(1e-15));
    CHECK(rho(w, w) == Catch::Approx(0.0).margin(1e-15));
    CHECK(beta(w, w) == Catch::Approx(0.0).margin(1e-15));
    CHECK(beta(zero, w) == Catch::Approx(std::atanh(0.5)).margin(1e-14));

    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const BallPoint a = random_ball_point(rng, 2, 0.95);
        const BallPoint b = random_ball_point(rng, 2, 0.95);
        CHECK(std::tanh(beta(a, b)) == Catch::Approx(rho(a, b)).margin(1e-12));
        CHECK(rho(a, b) == Catch::Approx(rho(b, a)).margin(1e-12));
    }
}

TEST_CASE("hyperbolic disk membership matches the metric") {
    Rng rng(11);
    const double r = 0.8;
    for (int i = 0; i < 500; ++i) {
        const BallPoint c = random_ball_point(rng, 1, 0.9);
        const BallPoint w = random_ball_point(rng, 1, 0.97);
        const HyperbolicDisk disk(c, r);
        const bool by_beta = beta(c, w) <= r + 1e-12;
        const bool by_rho = rho(c, w) <= std::tanh(r) + 1e-12;
        if (std::abs(beta(c, w) - r) > 1e-9) {  // away from the boundary case
            CHECK(disk.contains(w) == by_beta);
            CHECK(by_beta == by_rho);
        }
    }
}

TEST_CASE("boundary rejection") {
    CHECK_THROWS_AS(BallPoint{Complex(1.0, 0.0)}, std::domain_error);
    CHECK_THROWS_AS(BallPoint{Complex(1.0 - 1e-13, 0.0)}, std::domain_error);
    CHECK_NOTHROW(BallPoint{Complex(1.0 - 1e-9, 0.0)});
    CHECK_THROWS_AS(HyperbolicDisk(BallPoint::zero(1), -0.5), std::domain_error);
}
