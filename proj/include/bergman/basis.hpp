#pragma once

// Truncated monomial orthonormal basis of A^2_alpha.  Multi-indices are
// enumerated in graded order (total degree, then decreasing first exponent),
// so the leading block of any graded matrix is exactly the lower-degree
// compression.  Norms come from the closed form
//     ||z^a||^2 = a! Gamma(n+1+alpha) / Gamma(n+1+|a|+alpha),
// evaluated through log-gamma; the quadrature grid is only used to *verify*
// orthonormality and to assemble operators.

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <vector>

#include "bergman/core.hpp"
#include "bergman/geometry.hpp"
#include "bergman/quadrature.hpp"

namespace bergman {

inline std::vector<std::array<int, 2>> graded_indices(int n, int degree) {
    std::vector<std::array<int, 2>> idx;
    for (int m = 0; m <= degree; ++m) {
        if (n == 1) {
            idx.push_back({m, 0});
        } else {
            for (int a1 = m; a1 >= 0; --a1) idx.push_back({a1, m - a1});
        }
    }
    return idx;
}

inline std::size_t basis_dim(int n, int degree) {
    return n == 1 ? degree + 1
                  : static_cast<std::size_t>(degree + 1) * (degree + 2) / 2;
}

// ||z^a||_{A^2_alpha} in graded order; for n = 1 this is
// sqrt(Gamma(2+alpha) k! / Gamma(k+2+alpha)).
inline std::vector<double> monomial_norms(int n, double alpha, int degree) {
    if (alpha <= -1.0) throw std::domain_error("monomial_norms: alpha <= -1");
    const auto idx = graded_indices(n, degree);
    std::vector<double> out(idx.size());
    const double lg_head = std::lgamma(n + 1.0 + alpha);
    for (std::size_t j = 0; j < idx.size(); ++j) {
        const int a1 = idx[j][0], a2 = idx[j][1];
        const double lg = std::lgamma(a1 + 1.0) + std::lgamma(a2 + 1.0) + lg_head -
                          std::lgamma(n + 1.0 + a1 + a2 + alpha);
        out[j] = std::exp(0.5 * lg);
    }
    return out;
}

struct BasisSpec {
    int n = 1;
    double alpha = 0.0;
    int degree = 0;
    std::vector<std::array<int, 2>> indices;
    std::vector<double> norms;
    GridPtr grid;

    std::size_t size() const { return indices.size(); }

    static constexpr int kMaxDegree = 320;

    // values of the normalized monomials e_j at a point
    Eigen::VectorXcd eval_point(const BallPoint& z) const {
        Eigen::VectorXcd v(size());
        std::array<Complex, kMaxDegree + 1> pow1, pow2;
        pow1[0] = Complex(1.0, 0.0);
        for (int k = 1; k <= degree; ++k) pow1[k] = pow1[k - 1] * z[0];
        if (n == 2) {
            pow2[0] = Complex(1.0, 0.0);
            for (int k = 1; k <= degree; ++k) pow2[k] = pow2[k - 1] * z[1];
        }
        for (std::size_t j = 0; j < size(); ++j) {
            Complex m = pow1[indices[j][0]];
            if (n == 2) m *= pow2[indices[j][1]];
            v[j] = m / norms[j];
        }
        return v;
    }

    // rows = nodes [start, start+count), columns = basis functions
    Eigen::MatrixXcd eval_nodes(std::size_t start, std::size_t count) const {
        Eigen::MatrixXcd E(count, size());
        for (std::size_t i = 0; i < count; ++i)
            E.row(i) = eval_point(grid->node(start + i)).transpose();
        return E;
    }
};

using BasisPtr = std::shared_ptr<const BasisSpec>;

// Default grid: polynomial-exact well beyond the Gram degree 2d, with a
// little slack for products of low-degree symbols.
inline GridPtr default_basis_grid(int n, double alpha, int degree) {
    if (n == 1) return build_disk_grid(alpha, degree + 6, 2 * degree + 8);
    // joint degree 2d needs s- and t-degree d: order d/2 + slack each
    return build_ball2_grid(alpha, degree / 2 + 4, degree / 2 + 4, 2 * degree + 8);
}

inline BasisPtr make_basis(int n, double alpha, int degree, GridPtr grid = nullptr) {
    const int cap = (n == 1) ? BasisSpec::kMaxDegree : 60;
    if (degree < 0 || degree > cap)
        throw std::domain_error("make_basis: degree out of supported range");
    auto b = std::make_shared<BasisSpec>();
    b->n = n;
    b->alpha = alpha;
    b->degree = degree;
    b->indices = graded_indices(n, degree);
    b->norms = monomial_norms(n, alpha, degree);
    b->grid = grid ? std::move(grid) : default_basis_grid(n, alpha, degree);
    return b;
}

}  // namespace bergman
