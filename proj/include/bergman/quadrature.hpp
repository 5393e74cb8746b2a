#pragma once

// Quadrature for the weighted volumes dv_alpha = c_alpha (1-|z|^2)^alpha dv
// on B_1 and B_2 (v is the normalized Lebesgue measure, v(B_n) = 1).
//
// n = 1: substituting u = |z|^2 turns dv into du d(theta)/2pi, so a
// Gauss-Jacobi rule in u with weight (1-u)^alpha tensored with a uniform
// angular rule integrates every monomial z^a conj(z)^b with a+b <= exact_degree
// to machine precision.
//
// n = 2: with u_i = |z_i|^2, u_1 = s t, u_2 = s (1-t), the measure becomes
// 2 c_alpha (1-s)^alpha s ds dt (dtheta_1/2pi)(dtheta_2/2pi) on the unit
// square times two circles; Gauss-Jacobi in s (weight (1-s)^alpha s),
// Gauss-Legendre in t, uniform angles.  Exactness is measured, not assumed,
// by the test suite.

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <vector>

#include "bergman/core.hpp"
#include "bergman/geometry.hpp"

namespace bergman {

struct Rule1D {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

// Golub-Welsch for the Jacobi weight (1-x)^a (1+x)^b on [-1,1].
inline Rule1D gauss_jacobi(int m, double a, double b) {
    if (m < 1) throw std::domain_error("gauss_jacobi: order < 1");
    Eigen::VectorXd diag(m), sub(m > 1 ? m - 1 : 1);
    const double apb = a + b;
    diag[0] = (b - a) / (apb + 2.0);
    for (int k = 1; k < m; ++k) {
        const double den = (2.0 * k + apb) * (2.0 * k + apb + 2.0);
        diag[k] = (b * b - a * a) / den;
    }
    for (int k = 1; k < m; ++k) {
        const double t = 2.0 * k + apb;
        const double num = 4.0 * k * (k + a) * (k + b) * (k + apb);
        sub[k - 1] = std::sqrt(num / (t * t * (t + 1.0) * (t - 1.0)));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub.head(std::max(m - 1, 0)));
    const double mu0 = std::exp((apb + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) +
                                std::lgamma(b + 1.0) - std::lgamma(apb + 2.0));
    Rule1D r;
    r.nodes.resize(m);
    r.weights.resize(m);
    for (int i = 0; i < m; ++i) {
        r.nodes[i] = es.eigenvalues()[i];
        const double v0 = es.eigenvectors()(0, i);
        r.weights[i] = mu0 * v0 * v0;
    }
    return r;
}

// Rule on (0,1) for the weight (1-u)^a u^b du.
inline Rule1D jacobi01(int m, double a, double b) {
    Rule1D r = gauss_jacobi(m, a, b);
    const double scale = std::pow(2.0, -(a + b + 1.0));
    for (int i = 0; i < m; ++i) {
        r.nodes[i] = 0.5 * (1.0 + r.nodes[i]);
        r.weights[i] *= scale;
    }
    return r;
}

inline Rule1D legendre01(int m) { return jacobi01(m, 0.0, 0.0); }

}  // namespace detail

// Contiguous run of nodes sharing one radial level; for n = 1 the run is
// ordered by angle, which the lattice construction exploits.
struct RingInfo {
    std::size_t start = 0;
    std::size_t count = 0;
    double radius_sq = 0.0;
    bool angle_sorted = false;
};

class QuadratureGrid {
public:
    int n = 1;
    double alpha = 0.0;
    int exact_degree = 0;    // joint degree in z and conj(z); -1 if not polynomial-exact
    int radial_order = 0;
    int angular_order = 0;

    std::vector<Complex> coords;     // n entries per node
    std::vector<double> weights;
    std::vector<double> radius_sq;   // |z|^2 per node
    std::vector<RingInfo> rings;

    std::size_t size() const { return weights.size(); }

    BallPoint node(std::size_t i) const {
        return BallPoint::unchecked(&coords[i * n], n);
    }
    Complex coord(std::size_t i, int j) const { return coords[i * n + j]; }

    double total_mass() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
};

using GridPtr = std::shared_ptr<const QuadratureGrid>;

inline GridPtr build_disk_grid(double alpha, int radial_order, int angular_order) {
    if (alpha <= -1.0) throw std::domain_error("build_disk_grid: alpha <= -1");
    if (radial_order < 1 || angular_order < 1)
        throw std::domain_error("build_disk_grid: orders must be >= 1");
    auto g = std::make_shared<QuadratureGrid>();
    g->n = 1;
    g->alpha = alpha;
    g->radial_order = radial_order;
    g->angular_order = angular_order;
    g->exact_degree = std::min(angular_order - 1, 2 * (2 * radial_order - 1));
    const Rule1D ru = detail::jacobi01(radial_order, alpha, 0.0);
    const double ca = c_alpha(1, alpha);
    const std::size_t total = static_cast<std::size_t>(radial_order) * angular_order;
    g->coords.reserve(total);
    g->weights.reserve(total);
    g->radius_sq.reserve(total);
    for (int i = 0; i < radial_order; ++i) {
        const double r = std::sqrt(ru.nodes[i]);
        const double w = ca * ru.weights[i] / angular_order;
        g->rings.push_back({g->weights.size(), static_cast<std::size_t>(angular_order),
                            ru.nodes[i], true});
        for (int j = 0; j < angular_order; ++j) {
            const double th = 2.0 * kPi * (j + 0.5) / angular_order;
            g->coords.emplace_back(r * std::cos(th), r * std::sin(th));
            g->weights.push_back(w);
            g->radius_sq.push_back(ru.nodes[i]);
        }
    }
    return g;
}

inline GridPtr build_ball2_grid(double alpha, int s_order, int t_order, int angular_order) {
    if (alpha <= -1.0) throw std::domain_error("build_ball2_grid: alpha <= -1");
    if (s_order < 1 || t_order < 1 || angular_order < 1)
        throw std::domain_error("build_ball2_grid: orders must be >= 1");
    auto g = std::make_shared<QuadratureGrid>();
    g->n = 2;
    g->alpha = alpha;
    g->radial_order = s_order;
    g->angular_order = angular_order;
    g->exact_degree =
        std::min({angular_order - 1, 2 * (2 * s_order - 1), 2 * (2 * t_order - 1)});
    const Rule1D rs = detail::jacobi01(s_order, alpha, 1.0);   // weight (1-s)^alpha s
    const Rule1D rt = detail::legendre01(t_order);
    const double ca = c_alpha(2, alpha);
    const double angw = 1.0 / (static_cast<double>(angular_order) * angular_order);
    for (int i = 0; i < s_order; ++i) {
        g->rings.push_back({g->weights.size(),
                            static_cast<std::size_t>(t_order) * angular_order * angular_order,
                            rs.nodes[i], false});
        for (int l = 0; l < t_order; ++l) {
            const double u1 = rs.nodes[i] * rt.nodes[l];
            const double u2 = rs.nodes[i] * (1.0 - rt.nodes[l]);
            const double r1 = std::sqrt(u1), r2 = std::sqrt(u2);
            const double w = 2.0 * ca * rs.weights[i] * rt.weights[l] * angw;
            for (int j1 = 0; j1 < angular_order; ++j1) {
                const double th1 = 2.0 * kPi * (j1 + 0.5) / angular_order;
                const Complex z1(r1 * std::cos(th1), r1 * std::sin(th1));
                for (int j2 = 0; j2 < angular_order; ++j2) {
                    const double th2 = 2.0 * kPi * (j2 + 0.5) / angular_order;
                    g->coords.emplace_back(z1);
                    g->coords.emplace_back(r2 * std::cos(th2), r2 * std::sin(th2));
                    g->weights.push_back(w);
                    g->radius_sq.push_back(rs.nodes[i]);
                }
            }
        }
    }
    return g;
}

inline GridPtr build_grid(int n, double alpha, int radial_order, int angular_order) {
    if (n == 1) return build_disk_grid(alpha, radial_order, angular_order);
    if (n == 2) return build_ball2_grid(alpha, radial_order, radial_order, angular_order);
    throw std::domain_error("build_grid: only n = 1, 2 supported");
}

// Grid for integrals over the sub-ball {|u| < r} against dv_k (the truncated
// Berezin adjoint integrates here).  The Jacobi weight is folded into the
// node weights explicitly, so any k >= 0 works with a plain Legendre rule.
inline GridPtr build_sub_ball_grid(int n, double k, double r, int radial_order,
                                   int angular_order) {
    if (r <= 0.0 || r >= 1.0) throw std::domain_error("build_sub_ball_grid: need 0 < r < 1");
    auto g = std::make_shared<QuadratureGrid>();
    g->n = n;
    g->alpha = k;
    g->radial_order = radial_order;
    g->angular_order = angular_order;
    g->exact_degree = -1;
    const double ck = c_alpha(n, k);
    const double r2 = r * r;
    if (n == 1) {
        Rule1D ru = detail::legendre01(radial_order);
        for (int i = 0; i < radial_order; ++i) {
            const double u = ru.nodes[i] * r2;
            const double wu = ru.weights[i] * r2 * ck * std::pow(1.0 - u, k);
            const double rad = std::sqrt(u);
            for (int j = 0; j < angular_order; ++j) {
                const double th = 2.0 * kPi * (j + 0.5) / angular_order;
                g->coords.emplace_back(rad * std::cos(th), rad * std::sin(th));
                g->weights.push_back(wu / angular_order);
                g->radius_sq.push_back(u);
            }
        }
        return g;
    }
    if (n != 2) throw std::domain_error("build_sub_ball_grid: only n = 1, 2 supported");
    Rule1D rs = detail::legendre01(radial_order);
    Rule1D rt = detail::legendre01(radial_order);
    const double angw = 1.0 / (static_cast<double>(angular_order) * angular_order);
    for (int i = 0; i < radial_order; ++i) {
        const double s = rs.nodes[i] * r2;
        const double ws = rs.weights[i] * r2 * 2.0 * ck * std::pow(1.0 - s, k) * s;
        for (int l = 0; l < radial_order; ++l) {
            const double u1 = s * rt.nodes[l];
            const double u2 = s * (1.0 - rt.nodes[l]);
            const double w = ws * rt.weights[l] * angw;
            const double r1 = std::sqrt(u1), r2c = std::sqrt(u2);
            for (int j1 = 0; j1 < angular_order; ++j1) {
                const double th1 = 2.0 * kPi * (j1 + 0.5) / angular_order;
                const Complex z1(r1 * std::cos(th1), r1 * std::sin(th1));
                for (int j2 = 0; j2 < angular_order; ++j2) {
                    const double th2 = 2.0 * kPi * (j2 + 0.5) / angular_order;
                    g->coords.emplace_back(z1);
                    g->coords.emplace_back(r2c * std::cos(th2), r2c * std::sin(th2));
                    g->weights.push_back(w);
                    g->radius_sq.push_back(s);
                }
            }
        }
    }
    return g;
}

// Disk grid laid out along hyperbolic rings, n = 1 only.  Rings sit at
// beta = (i+1/2) step up to atanh(truncation_radius); each ring carries the
// exact v_alpha mass of its annulus (closed-form radial integral) spread over
// an angular count proportional to the hyperbolic circumference, so cells of
// a rho-lattice see roughly constant node counts at every radius.  Tensor
// Gauss grids cannot afford that near the boundary.  Not polynomial-exact:
// radially this is a midpoint rule per annulus (exact_degree = -1).
//
// With full_mass the outermost ring also carries the annulus out to the
// boundary, so the node family holds the total mass v_alpha(B_n) = 1 and
// lattice cells partition the mass of the whole ball; otherwise the grid
// represents the truncated region only.
inline GridPtr build_hyperbolic_disk_grid(double alpha, double rho, double truncation_radius,
                                          int rings_per_cell = 3, int nodes_per_arc = 3,
                                          int min_angular = 64, bool full_mass = true) {
    if (alpha <= -1.0) throw std::domain_error("build_hyperbolic_disk_grid: alpha <= -1");
    if (rho <= 0.0 || truncation_radius <= 0.0 || truncation_radius >= 1.0)
        throw std::domain_error("build_hyperbolic_disk_grid: bad rho/truncation");
    auto g = std::make_shared<QuadratureGrid>();
    g->n = 1;
    g->alpha = alpha;
    g->exact_degree = -1;
    const double beta_max = std::atanh(truncation_radius);
    const double step = (rho / 2.0) / rings_per_cell;
    const int nrings = std::max(1, static_cast<int>(std::ceil(beta_max / step)));
    const double ca = c_alpha(1, alpha);
    // arc length target on the curvature -1 disk (distances there are 2*beta)
    const double arc = (2.0 * (rho / 2.0)) / nodes_per_arc;
    for (int i = 0; i < nrings; ++i) {
        const double b0 = i * step;
        const double b1 = std::min((i + 1) * step, beta_max);
        const double bm = 0.5 * (b0 + b1);
        const double u0 = std::tanh(b0) * std::tanh(b0);
        const double u1 =
            (full_mass && i == nrings - 1) ? 1.0 : std::tanh(b1) * std::tanh(b1);
        // exact v_alpha mass of the annulus u0 < |z|^2 < u1
        const double mass =
            ca / (alpha + 1.0) *
            (std::pow(1.0 - u0, alpha + 1.0) - std::pow(1.0 - u1, alpha + 1.0));
        const double circ = 2.0 * kPi * std::sinh(2.0 * bm);
        const int A = std::max(min_angular, static_cast<int>(std::ceil(circ / arc)));
        const double um = std::tanh(bm) * std::tanh(bm);
        const double r = std::sqrt(um);
        g->rings.push_back({g->weights.size(), static_cast<std::size_t>(A), um, true});
        for (int j = 0; j < A; ++j) {
            const double th = 2.0 * kPi * (j + 0.5) / A;
            g->coords.emplace_back(r * std::cos(th), r * std::sin(th));
            g->weights.push_back(mass / A);
            g->radius_sq.push_back(um);
        }
    }
    g->radial_order = nrings;
    g->angular_order = static_cast<int>(g->rings.back().count);
    return g;
}

// Plain v_alpha integral of a pointwise function.
template <typename F>
Complex grid_integrate(const QuadratureGrid& g, F&& f) {
    Complex acc(0.0, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) acc += g.weights[i] * f(g.node(i));
    return acc;
}

}  // namespace bergman
