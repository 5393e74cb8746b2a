#include <catch2/catch_amalgamated.hpp>

#include "bergman/operators.hpp"

using namespace bergman;

namespace {
OperatorMatrix diff_of(const OperatorMatrix& A, const Eigen::MatrixXcd& B) {
    OperatorMatrix d;
    d.mat = A.mat - B;
    d.basis = A.basis;
    return d;
}
}  // namespace

TEST_CASE("monomial norms: closed form against quadrature") {
    // k = 0 gives 1 (v_alpha is a probability measure); alpha = 0, k = 1
    // gives 1/2 on the disk
    const auto norms = monomial_norms(1, 0.0, 8);
    CHECK(norms[0] == Catch::Approx(1.0).margin(1e-14));
    CHECK(norms[1] * norms[1] == Catch::Approx(0.5).margin(1e-14));

    for (double alpha : {-0.3, 0.0, 1.5}) {
        GridPtr g = build_disk_grid(alpha, 30, 64);
        const auto nm = monomial_norms(1, alpha, 12);
        for (int k = 0; k <= 12; ++k) {
            const Complex q = grid_integrate(
                *g, [&](const BallPoint& z) { return std::pow(std::norm(z[0]), k); });
            CHECK(std::abs(q.real() - nm[k] * nm[k]) < 1e-9);
        }
    }
}

TEST_CASE("normalized basis has identity Gram") {
    for (int n : {1, 2}) {
        BasisPtr b = make_basis(n, 0.5, n == 1 ? 20 : 8);
        const Eigen::MatrixXcd G = gram_matrix(*b);
        const Eigen::MatrixXcd E = G - Eigen::MatrixXcd::Identity(b->size(), b->size());
        CHECK(E.cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("Toeplitz: constants, radial fast path, conjugate symmetry") {
    BasisPtr b = make_basis(1, 0.0, 15);
    const std::size_t dim = b->size();

    const OperatorMatrix T1 = toeplitz_matrix(symbol_one(), b);
    CHECK((T1.mat - Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff() < 1e-12);

    const Complex c(0.7, -0.3);
    SymbolFunction sc{[c](const BallPoint&) { return c; }, 1.0, true, "const"};
    const OperatorMatrix Tc = toeplitz_matrix(sc, b);
    CHECK((Tc.mat - c * Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff() < 1e-12);

    // a(w) = 1-|w|^2 is diagonal with entries 1/(k+2) for alpha = 0
    SymbolFunction bump{[](const BallPoint& w) { return Complex(1.0 - w.norm_sq(), 0.0); },
                        1.0, true, "bump"};
    const OperatorMatrix Tb = toeplitz_matrix(bump, b);
    for (std::size_t k = 0; k < dim; ++k)
        CHECK(Tb.mat(k, k).real() == Catch::Approx(1.0 / (k + 2.0)).margin(1e-12));

    // radial fast path agrees with the generic assembly
    SymbolFunction bump_generic = bump;
    bump_generic.radial = false;
    const OperatorMatrix Tb2 = toeplitz_matrix(bump_generic, b);
    CHECK((Tb.mat - Tb2.mat).cwiseAbs().maxCoeff() < 1e-12);

    // matrix of T_conj(a) equals the conjugate transpose of the matrix of T_a
    SymbolFunction coord{[](const BallPoint& w) { return w[0]; }, 1.0, false, "coord"};
    SymbolFunction coord_bar{[](const BallPoint& w) { return std::conj(w[0]); }, 1.0, false,
                             "coord-bar"};
    const OperatorMatrix Tw = toeplitz_matrix(coord, b);
    const OperatorMatrix Twb = toeplitz_matrix(coord_bar, b);
    CHECK((Twb.mat - Tw.mat.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((adjoint(Tw).mat - Twb.mat).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("measure Toeplitz operators") {
    BasisPtr b = make_basis(1, 0.0, 12);
    const std::size_t dim = b->size();

    const OperatorMatrix Tv = tmu_matrix(Measure::v_alpha(b->grid), b);
    CHECK((Tv.mat - Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff() < 1e-12);

    const OperatorMatrix Td = tmu_matrix(Measure::dirac(BallPoint::zero(1)), b);
    Eigen::MatrixXcd E00 = Eigen::MatrixXcd::Zero(dim, dim);
    E00(0, 0) = 1.0;
    CHECK((Td.mat - E00).cwiseAbs().maxCoeff() == 0.0);

    // 1 (x) 1 = T_{delta_0} exactly
    Eigen::VectorXcd e0 = Eigen::VectorXcd::Unit(dim, 0);
    const OperatorMatrix R = rank_one(e0, e0, b);
    CHECK((R.mat - Td.mat).cwiseAbs().maxCoeff() == 0.0);

    // rank-one identities
    Eigen::VectorXcd f(dim), g(dim);
    Rng rng(5);
    for (std::size_t i = 0; i < dim; ++i) {
        f[i] = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
        g[i] = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
    }
    const OperatorMatrix FG = rank_one(f, g, b);
    Eigen::VectorXcd h(dim);
    for (std::size_t i = 0; i < dim; ++i) h[i] = Complex(rng.uniform(-1, 1), 0.3);
    const Eigen::VectorXcd lhs = FG.mat * h;
    const Eigen::VectorXcd rhs = (g.adjoint() * h)(0) * f;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(FG.mat);
    CHECK(svd.singularValues()(1) < 1e-12);  // numerical rank one
}

TEST_CASE("P_mu expansion is consistent with T_mu") {
    BasisPtr b = make_basis(1, 0.5, 10);
    GridPtr g = b->grid;
    const Measure mu = Measure::density(
        g, [](const BallPoint& z) { return Complex(0.5 + z[0].real(), 0.0); }, "tilt");
    const OperatorMatrix T = tmu_matrix(mu, b);
    for (std::size_t k = 0; k < b->size(); k += 3) {
        const auto ek = [&](const BallPoint& z) { return b->eval_point(z)[k]; };
        const Eigen::VectorXcd col = p_mu_coeffs(mu, ek, *b);
        CHECK((col - T.mat.col(k)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("kernel vectors") {
    BasisPtr b = make_basis(1, 0.0, 30);

    // lambda = 0: e_0 direction only
    const KernelVector k0 = kernel_vector(BallPoint::zero(1), 2.0, *b);
    CHECK(std::abs(k0.coeffs[0] - 1.0) < 1e-14);
    CHECK(k0.coeffs.tail(b->size() - 1).cwiseAbs().maxCoeff() < 1e-14);

    // p = 2, |lambda| = 0.5: unit coefficient norm, tiny tail
    const KernelVector k5 = kernel_vector(BallPoint(Complex(0.5, 0.0)), 2.0, *b);
    CHECK(k5.coeffs.norm() == Catch::Approx(1.0).margin(1e-12));
    CHECK(k5.tail < 1e-8);
    CHECK(k5.tail_ok);

    // truncation warning fires near the boundary
    const KernelVector kb = kernel_vector(BallPoint(Complex(0.97, 0.0)), 2.0, *b);
    CHECK_FALSE(kb.tail_ok);

    // reproducing identity <f, K_lambda> = f(lambda) for polynomials, with
    // the pairing evaluated by quadrature
    const BallPoint lam(Complex(0.4, 0.2));
    auto f = [](const BallPoint& z) { return 1.0 + 2.0 * z[0] + z[0] * z[0] * z[0]; };
    const Complex pairing = grid_integrate(*b->grid, [&](const BallPoint& z) {
        const double s = n_plus(1, 0.0);
        const Complex K = std::pow(1.0 - inner(z, lam), -s);  // K_lambda(z)
        return f(z) * std::conj(K);
    });
    CHECK(std::abs(pairing - f(lam)) < 1e-10);
}

TEST_CASE("Berezin transform basics") {
    BasisPtr b = make_basis(1, 0.0, 30);
    const OperatorMatrix I = identity_matrix(b);
    for (double r : {0.0, 0.5, 0.9, 0.98})
        CHECK(std::abs(berezin(I, BallPoint(Complex(r, 0.1 * (1 - r)))) - 1.0) < 1e-12);

    // B(T_a)(0) = int a dv_alpha
    SymbolFunction shift{[](const BallPoint& w) { return 0.5 * (1.0 + w[0]); }, 1.0, false,
                         "half-shift"};
    const OperatorMatrix Ts = toeplitz_matrix(shift, b);
    CHECK(std::abs(berezin(Ts, BallPoint::zero(1)) - 0.5) < 1e-12);

    // finite-rank operators have vanishing Berezin transform at the boundary
    Eigen::VectorXcd e0 = Eigen::VectorXcd::Unit(b->size(), 0);
    const OperatorMatrix R = rank_one(e0, e0, b);
    const double inner_val = std::abs(berezin(R, BallPoint(Complex(0.3, 0.0))));
    const double outer_val = std::abs(berezin(R, BallPoint(Complex(0.95, 0.0))));
    CHECK(outer_val < 0.1 * inner_val);

    // Berezin boundedness: sup_z |B(S)| <= C ||S|| with C near 1 for p = 2
    Rng rng(17);
    Eigen::MatrixXcd M(b->size(), b->size());
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            M(i, j) = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
    OperatorMatrix S;
    S.mat = M;
    S.basis = b;
    const double nrm = op_norm(S);
    for (double r : {0.0, 0.3, 0.6, 0.9})
        CHECK(std::abs(berezin(S, BallPoint(Complex(r, -0.2 * r)))) <= 1.000001 * nrm);
}

TEST_CASE("operator norms") {
    BasisPtr b = make_basis(1, 0.0, 12);
    CHECK(op_norm(identity_matrix(b)) == Catch::Approx(1.0).margin(1e-12));

    Eigen::VectorXcd e0 = Eigen::VectorXcd::Unit(b->size(), 0);
    CHECK(op_norm(rank_one(e0, e0, b)) == Catch::Approx(1.0).margin(1e-12));

    SymbolFunction bump{[](const BallPoint& w) { return Complex(1.0 - w.norm_sq(), 0.0); },
                        1.0, true, "bump"};
    CHECK(op_norm(toeplitz_matrix(bump, b)) == Catch::Approx(0.5).margin(1e-12));

    // p != 2 sampled lower bound: identity gives 1
    const double lb = op_norm_lower(identity_matrix(b, 3.0), 3.0, 4);
    CHECK(lb == Catch::Approx(1.0).margin(1e-6));
    const double lb_bump = op_norm_lower(toeplitz_matrix(bump, b), 3.0, 4);
    CHECK(lb_bump <= 0.5 + 1e-9);
    CHECK(lb_bump > 0.3);
}
