#pragma once

// Moebius geometry of the unit ball B_n in C^n: the involutive automorphisms
// phi_z, the pseudohyperbolic metric rho = |phi_z(w)| and the hyperbolic
// metric beta = atanh(rho), and hyperbolic disks D(z,r) = {beta(z,.) <= r}.
//
// Inner product convention, fixed once for the whole library:
//     <z,w> = sum_i z_i * conj(w_i),
// so every kernel denominator reads 1 - <z,lambda> as a holomorphic function
// of z.  All fractional powers of 1 - <w,z> use the principal branch; the
// base has positive real part on the ball so the branch cut is never hit.

#include <array>
#include <cmath>
#include <initializer_list>

#include "bergman/core.hpp"

namespace bergman {

class BallPoint {
public:
    static constexpr int kMaxDim = 4;

    BallPoint() : n_(1) { c_[0] = Complex(0.0, 0.0); }

    explicit BallPoint(Complex z) : n_(1) {
        c_[0] = z;
        check();
    }

    BallPoint(std::initializer_list<Complex> coords) : n_(static_cast<int>(coords.size())) {
        if (n_ < 1 || n_ > kMaxDim) throw std::domain_error("BallPoint: bad dimension");
        int i = 0;
        for (Complex z : coords) c_[i++] = z;
        check();
    }

    BallPoint(const Complex* data, int n) : n_(n) {
        if (n_ < 1 || n_ > kMaxDim) throw std::domain_error("BallPoint: bad dimension");
        for (int i = 0; i < n_; ++i) c_[i] = data[i];
        check();
    }

    static BallPoint zero(int n) {
        BallPoint p;
        p.n_ = n;
        for (int i = 0; i < n; ++i) p.c_[i] = Complex(0.0, 0.0);
        return p;
    }

    int dim() const { return n_; }
    Complex operator[](int i) const { return c_[i]; }

    double norm_sq() const {
        double s = 0.0;
        for (int i = 0; i < n_; ++i) s += std::norm(c_[i]);
        return s;
    }
    double norm() const { return std::sqrt(norm_sq()); }

    // Moebius images can land arbitrarily close to the boundary even when both
    // arguments are admissible, so library-internal results skip the cutoff.
    static BallPoint unchecked(const Complex* data, int n) {
        BallPoint p;
        p.n_ = n;
        for (int i = 0; i < n; ++i) p.c_[i] = data[i];
        return p;
    }

private:
    void check() const {
        if (!(norm() < 1.0 - kBoundaryTol))
            throw std::domain_error("BallPoint: |z| must be < 1 - 1e-12");
    }

    std::array<Complex, kMaxDim> c_{};
    int n_;
};

// <z,w> = sum z_i conj(w_i)
inline Complex inner(const BallPoint& z, const BallPoint& w) {
    Complex s(0.0, 0.0);
    for (int i = 0; i < z.dim(); ++i) s += z[i] * std::conj(w[i]);
    return s;
}

// phi_z(w) = (z - P_z w - s_z Q_z w) / (1 - <w,z>), with P_z the projection
// onto span(z), Q_z = I - P_z and s_z = sqrt(1-|z|^2).  For n = 1 this is the
// familiar (z - w)/(1 - conj(z) w).  phi_z(0) = z, phi_z(z) = 0 and
// phi_z o phi_z = id.
inline BallPoint mobius(const BallPoint& z, const BallPoint& w) {
    const int n = z.dim();
    const double zz = z.norm_sq();
    std::array<Complex, BallPoint::kMaxDim> out{};
    if (zz == 0.0) {
        for (int i = 0; i < n; ++i) out[i] = -w[i];
        return BallPoint::unchecked(out.data(), n);
    }
    const Complex wz = inner(w, z);           // <w,z>
    const Complex proj = wz / zz;             // P_z w = proj * z
    const double s = std::sqrt(1.0 - zz);
    const Complex denom = 1.0 - wz;
    for (int i = 0; i < n; ++i) {
        const Complex pw = proj * z[i];
        const Complex qw = w[i] - pw;
        out[i] = (z[i] - pw - s * qw) / denom;
    }
    return BallPoint::unchecked(out.data(), n);
}

// 1 - |phi_z(w)|^2 = (1-|z|^2)(1-|w|^2)/|1-<w,z>|^2, evaluated from the right
// hand side.  This form stays accurate near the boundary and is what the
// Berezin-type transforms integrate.
inline double one_minus_phi_sq(const BallPoint& z, const BallPoint& w) {
    const double num = (1.0 - z.norm_sq()) * (1.0 - w.norm_sq());
    return num / std::norm(1.0 - inner(w, z));
}

inline double rho(const BallPoint& z, const BallPoint& w) {
    return mobius(z, w).norm();
}

// Cheaper than rho when only comparisons are needed.
inline double rho_sq(const BallPoint& z, const BallPoint& w) {
    double v = 1.0 - one_minus_phi_sq(z, w);
    return v > 0.0 ? v : 0.0;
}

inline double beta(const BallPoint& z, const BallPoint& w) {
    const double r = rho(z, w);
    return std::atanh(r);
}

// |LHS - RHS| of the Moebius identity above; the test suite drives this to
// ~1e-15 over random pairs.
inline double mobius_identity_residual(const BallPoint& z, const BallPoint& w) {
    const double lhs = 1.0 - mobius(z, w).norm_sq();
    return std::abs(lhs - one_minus_phi_sq(z, w));
}

struct HyperbolicDisk {
    BallPoint center;
    double radius = 0.0;  // beta-radius

    HyperbolicDisk(const BallPoint& c, double r) : center(c), radius(r) {
        if (r < 0.0) throw std::domain_error("HyperbolicDisk: radius < 0");
    }

    double rho_radius() const { return std::tanh(radius); }

    // {w : beta(center,w) <= radius}, equivalently rho <= tanh(radius)
    bool contains(const BallPoint& w) const {
        const double t = rho_radius();
        return rho_sq(center, w) <= t * t;
    }
};

// Uniform sample of B_n with |z| <= rmax, used by tests and probe sets.
inline BallPoint random_ball_point(Rng& rng, int n, double rmax = 0.999) {
    std::array<Complex, BallPoint::kMaxDim> c{};
    for (;;) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double re = rng.uniform(-1.0, 1.0);
            const double im = rng.uniform(-1.0, 1.0);
            c[i] = Complex(re, im);
            s += std::norm(c[i]);
        }
        if (s >= 1.0) continue;
        const double r = std::sqrt(s);
        if (r <= rmax) return BallPoint::unchecked(c.data(), n);
    }
}

}  // namespace bergman
