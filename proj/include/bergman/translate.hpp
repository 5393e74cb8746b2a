#pragma once

// Translation operators U_z^{(p,alpha)} f = (f o phi_z) J_z^{2/p}, the
// unimodular symbols b_z and eigenvalue factors lambda_{(p,alpha)}, operator
// translates S_z = U_z^{(p)} S (U_z^{(q)})^*, and the (k,alpha)-Berezin
// transform B_k(mu) with its truncated adjoint B*_{k,r}.
//
// J_z^r(w) = (1-|z|^2)^{r(n+1+alpha)/2} / (1-<w,z>)^{r(n+1+alpha)}, principal
// branch; Re(1-<w,z>) > 0 on the ball so the root is single valued.

#include <cmath>
#include <functional>

#include "bergman/geometry.hpp"
#include "bergman/measure.hpp"
#include "bergman/operators.hpp"

namespace bergman {

inline Complex j_z_pow(const BallPoint& z, double r, const BallPoint& w, double s) {
    const Complex den = 1.0 - inner(w, z);
    const double pre = std::pow(1.0 - z.norm_sq(), 0.5 * r * s);
    return pre * std::pow(den, Complex(-r * s, 0.0));
}

// U_z^{(p,alpha)} applied pointwise to a coefficient-free function.
template <typename F>
Complex u_z_apply(const BallPoint& z, double p, double alpha, F&& f, const BallPoint& w) {
    const double s = n_plus(z.dim(), alpha);
    return f(mobius(z, w)) * j_z_pow(z, 2.0 / p, w, s);
}

// Compression <U_z e_k, e_j> by quadrature.  Near the boundary the columns
// lose mass to truncation; the kernel tail at z is recorded as a flag.
inline OperatorMatrix u_z_matrix(const BallPoint& z, double p, BasisPtr basis) {
    const BasisSpec& B = *basis;
    const QuadratureGrid& g = *B.grid;
    const double s = n_plus(B.n, B.alpha);
    const std::size_t dim = B.size();
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(dim, dim);
    constexpr std::size_t blk = detail::kNodeBlock;
    Eigen::MatrixXcd E(blk, dim), V(blk, dim);
    for (std::size_t start = 0; start < g.size(); start += blk) {
        const std::size_t count = std::min(blk, g.size() - start);
        for (std::size_t i = 0; i < count; ++i) {
            const BallPoint w = g.node(start + i);
            const Complex jf = g.weights[start + i] * j_z_pow(z, 2.0 / p, w, s);
            E.row(i) = B.eval_point(w).transpose();
            V.row(i) = jf * B.eval_point(mobius(z, w)).transpose();
        }
        M.noalias() += E.topRows(count).adjoint() * V.topRows(count);
    }
    OperatorMatrix op;
    op.mat = std::move(M);
    op.basis = basis;
    op.p = p;
    op.label = "U_z";
    if (!kernel_vector(z, 2.0, B).tail_ok) op.flags.push_back("truncation-warning");
    return op;
}

// b_z(w) = [conj(D)/D]^{(n+1+alpha)(1/q - 1/p)} with D = 1 - <w,z>;
// identically 1 when p = 2, unimodular always.
inline SymbolFunction b_z_symbol(const BallPoint& z, double p, double alpha) {
    const double q = p / (p - 1.0);
    const double expo = n_plus(z.dim(), alpha) * (1.0 / q - 1.0 / p);
    BallPoint zc = z;
    return {[zc, expo](const BallPoint& w) {
                const Complex d = 1.0 - inner(w, zc);
                return std::polar(1.0, -2.0 * expo * std::arg(d));
            },
            1.0, false, "b_z"};
}

// The unimodular eigenvalue in (U_z^{(p,alpha)})^* k_xi^{(q,alpha)} =
// lambda_factor(xi,z) k_{phi_z(xi)}^{(q,alpha)}.  This is the conjugate of
// the quotient |1-<xi,z>|^{2s/p} / (1-<xi,z>)^{2s/p}: pulling the scalar out
// of the sesquilinear pairing conjugates it once more.
inline Complex lambda_factor(const BallPoint& xi, const BallPoint& z, double p, double alpha) {
    const double s = n_plus(xi.dim(), alpha);
    const Complex d = 1.0 - inner(xi, z);
    return std::polar(1.0, (2.0 * s / p) * std::arg(d));
}

// S_z = U_z^{(p,alpha)} S (U_z^{(q,alpha)})^*; for p = 2 both factors are the
// same self-adjoint involution.
inline OperatorMatrix s_z(const OperatorMatrix& S, const BallPoint& z) {
    OperatorMatrix op;
    op.basis = S.basis;
    op.p = S.p;
    op.label = S.label + "_z";
    if (S.p == 2.0) {
        const OperatorMatrix U = u_z_matrix(z, 2.0, S.basis);
        op.mat = U.mat * S.mat * U.mat;
        op.flags = U.flags;
    } else {
        const double q = S.p / (S.p - 1.0);
        const OperatorMatrix Up = u_z_matrix(z, S.p, S.basis);
        const OperatorMatrix Uq = u_z_matrix(z, q, S.basis);
        op.mat = Up.mat * S.mat * Uq.mat.adjoint();
        op.flags = Up.flags;
    }
    return op;
}

// B_k(mu)(z) = (c_k/c_alpha) int (1-|phi_z(w)|^2)^{n+1+k} (1-|w|^2)^{-(n+1+alpha)} dmu(w).
// Atoms evaluate the integrand exactly.  For densities m dv_alpha the direct
// integrand concentrates at phi-scale near z, which no fixed grid resolves
// at the boundary; the change of variables B_k(m dv_alpha) = int (m o phi_z) dv_k
// has a bounded integrand instead, so densities go through a v_k grid.
inline Complex berezin_k_atomic(const Measure& mu, double k, double alpha,
                                const BallPoint& z) {
    const int n = mu.dim();
    const double ratio = c_alpha(n, k) / c_alpha(n, alpha);
    const double ek = n + 1.0 + k;
    const double ea = n_plus(n, alpha);
    return ratio * mu.integrate([&](const BallPoint& w) {
        return std::pow(one_minus_phi_sq(z, w), ek) * std::pow(1.0 - w.norm_sq(), -ea);
    });
}

template <typename F>
Complex berezin_k_density(F&& density, const BallPoint& z, const QuadratureGrid& vk_grid) {
    return grid_integrate(vk_grid,
                          [&](const BallPoint& u) { return density(mobius(z, u)); });
}

inline GridPtr vk_grid_for(int n, double k) {
    return n == 1 ? build_disk_grid(k, 48, 96) : build_ball2_grid(k, 14, 14, 10);
}

inline Complex berezin_k(const Measure& mu, double k, double alpha, const BallPoint& z) {
    if (k < alpha) throw std::domain_error("berezin_k: need k >= alpha");
    if (mu.kind() == Measure::Kind::Atomic) return berezin_k_atomic(mu, k, alpha, z);
    if (mu.density_fn())
        return berezin_k_density(mu.density_fn(), z, *vk_grid_for(mu.dim(), k));
    // sampled density without a callable: direct quadrature, only reliable
    // away from the boundary
    return berezin_k_atomic(mu, k, alpha, z);
}

// B_k(mu) as a Toeplitz symbol; radial symmetry only survives for measures
// invariant under rotations (the Dirac mass at 0 is).  The v_k grid for the
// density route is built once and shared by all evaluations.
inline SymbolFunction bk_symbol(const Measure& mu, double k, double alpha,
                                bool radial = false) {
    if (k < alpha) throw std::domain_error("bk_symbol: need k >= alpha");
    auto held = std::make_shared<Measure>(mu);
    const std::string name = "B" + std::to_string(k) + "(" + mu.name() + ")";
    const double bound = c_alpha(mu.dim(), k) / c_alpha(mu.dim(), alpha);
    if (mu.kind() == Measure::Kind::Density && mu.density_fn()) {
        GridPtr vk = vk_grid_for(mu.dim(), k);
        return {[held, vk](const BallPoint& zz) {
                    return berezin_k_density(held->density_fn(), zz, *vk);
                },
                bound, radial, name};
    }
    return {[held, k, alpha](const BallPoint& z) {
                return berezin_k_atomic(*held, k, alpha, z);
            },
            bound, radial, name};
}

// Truncated adjoint, eq. form:
// B*_{k,r}(h)(w) = int_{|u|<r} (1-|u|^2)^{n+1+alpha} |1-<w,u>|^{-2(n+1+alpha)}
//                  h(phi_w(u)) dv_k(u).
// `sub` must be a sub-ball grid for (n, k, r).
template <typename F>
Complex bkr_adjoint(F&& h, double alpha, const BallPoint& w, const QuadratureGrid& sub) {
    const double s = n_plus(sub.n, alpha);
    Complex acc(0.0, 0.0);
    for (std::size_t i = 0; i < sub.size(); ++i) {
        const BallPoint u = sub.node(i);
        const double num = std::pow(1.0 - u.norm_sq(), s);
        const double den = std::pow(std::norm(1.0 - inner(w, u)), s);
        acc += sub.weights[i] * (num / den) * h(mobius(w, u));
    }
    return acc;
}

}  // namespace bergman
