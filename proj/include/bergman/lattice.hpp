#pragma once

// rho-lattices on the ball: a greedy maximal (rho/2)-separated subset of the
// grid nodes (ordered by radius, then angle, so construction is
// deterministic) with hyperbolic Voronoi cells D_m, sigma-expansions
// F_{i+1,j} = {z : beta(z, F_{i,j}) <= sigma}, and the discrete measure
// mu_rho = sum_m v_alpha(D_m) delta_{w_m}.
//
// All set operations run on the discrete node set of the grid.  For n = 1 the
// grids are unions of constant-radius rings with angle-ordered nodes, and on
// a ring pair the hyperbolic distance is monotone in the angle gap:
//     cosh 2*beta(z,w) = cosh(2(b1-b2)) + sinh(2b1) sinh(2b2) (1 - cos delta),
// so membership tests reduce to angle windows.  Angles follow the generation
// convention theta_j = 2 pi (j + 1/2) / count in [0, 2 pi).  n = 2 falls back
// to radially pruned scans, fine at the small scales the tests use.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "bergman/core.hpp"
#include "bergman/geometry.hpp"
#include "bergman/measure.hpp"
#include "bergman/quadrature.hpp"

namespace bergman {

using NodeSet = std::vector<std::uint32_t>;  // sorted node indices

struct LatticeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace lattice_detail {

struct RingGeom {
    std::vector<double> beta;    // atanh of ring radius
    std::vector<double> cosh2b;  // cosh(2 beta)
    std::vector<double> sinh2b;
};

inline RingGeom ring_geometry(const QuadratureGrid& g) {
    if (g.rings.empty()) throw LatticeError("lattice: grid has no ring layout");
    RingGeom rg;
    rg.beta.reserve(g.rings.size());
    for (const RingInfo& r : g.rings) {
        const double b = std::atanh(std::sqrt(r.radius_sq));
        rg.beta.push_back(b);
        rg.cosh2b.push_back(std::cosh(2.0 * b));
        rg.sinh2b.push_back(std::sinh(2.0 * b));
    }
    return rg;
}

// cosh(2 beta(z,w)) for ring radii indices r1, r2 and angle gap delta
inline double cosh2_dist(const RingGeom& rg, std::size_t r1, std::size_t r2, double delta) {
    const double ch = std::cosh(2.0 * (rg.beta[r1] - rg.beta[r2]));
    return ch + rg.sinh2b[r1] * rg.sinh2b[r2] * (1.0 - std::cos(delta));
}

// largest angle gap keeping beta(z,w) <= t for the ring pair; negative when
// the radial gap alone already exceeds t
inline double angle_window(const RingGeom& rg, std::size_t r1, std::size_t r2, double t) {
    const double lim = std::cosh(2.0 * t);
    const double ch = std::cosh(2.0 * (rg.beta[r1] - rg.beta[r2]));
    if (ch > lim) return -1.0;
    const double ss = rg.sinh2b[r1] * rg.sinh2b[r2];
    if (ss <= 0.0) return kPi;  // a center ring at the origin
    const double c = 1.0 - (lim - ch) / ss;
    if (c <= -1.0) return kPi;
    return std::acos(std::min(1.0, c));
}

// generation angle of a node inside its ring, in [0, 2 pi)
inline double ring_angle(const QuadratureGrid& g, std::size_t ring, std::size_t node) {
    const RingInfo& ri = g.rings[ring];
    return 2.0 * kPi * (static_cast<double>(node - ri.start) + 0.5) /
           static_cast<double>(ri.count);
}

inline std::size_t ring_of(const QuadratureGrid& g, std::size_t node) {
    return static_cast<std::size_t>(
        std::upper_bound(g.rings.begin(), g.rings.end(), node,
                         [](std::size_t v, const RingInfo& ri) { return v < ri.start; }) -
        g.rings.begin() - 1);
}

using AngleList = std::vector<std::pair<double, std::uint32_t>>;  // angle-sorted

// true when some entry lies within the angular window [th-win, th+th+win]
// modulo 2 pi; boundaries inclusive
inline bool any_in_window(const AngleList& vec, double th, double win) {
    if (vec.empty()) return false;
    if (win >= kPi) return true;
    auto in_range = [&](double a, double b) {
        auto it = std::lower_bound(vec.begin(), vec.end(),
                                   std::make_pair(a, std::uint32_t(0)));
        return it != vec.end() && it->first <= b;
    };
    const double lo = th - win, hi = th + win;
    if (lo < 0.0) return in_range(lo + 2.0 * kPi, 2.0 * kPi) || in_range(0.0, hi);
    if (hi >= 2.0 * kPi) return in_range(lo, 2.0 * kPi) || in_range(0.0, hi - 2.0 * kPi);
    return in_range(lo, hi);
}

// indices of the angularly nearest entries around th (both wrap neighbors)
template <typename Fn>
inline void for_nearest(const AngleList& vec, double th, Fn&& fn) {
    if (vec.empty()) return;
    const std::size_t m = vec.size();
    auto it = std::lower_bound(vec.begin(), vec.end(), std::make_pair(th, std::uint32_t(0)));
    const std::size_t hi = static_cast<std::size_t>(it - vec.begin()) % m;
    fn(vec[hi]);
    fn(vec[(hi + m - 1) % m]);
    if (m > 2) {
        fn(vec[(hi + 1) % m]);
        fn(vec[(hi + m - 2) % m]);
    }
}

}  // namespace lattice_detail

struct Lattice {
    GridPtr grid;
    double rho = 0.0;
    double truncation_radius = 0.0;
    std::vector<std::uint32_t> centers;            // node indices, radius-then-angle order
    std::vector<std::int32_t> cell_of;             // per grid node, always assigned
    std::vector<std::vector<std::uint32_t>> cells; // partition of all grid nodes
    double min_separation = 0.0;                   // measured, beta
    double covering_radius = 0.0;                  // measured over nodes inside truncation

    BallPoint center_point(std::size_t m) const { return grid->node(centers[m]); }
    std::size_t center_count() const { return centers.size(); }
};

// Greedy maximal (rho/2)-separated subset of the grid nodes inside the
// truncation radius, then hyperbolic Voronoi assignment of every node (nodes
// beyond the truncation radius attach to their nearest center, so the cells
// partition the whole node set).  Throws when the measured covering radius
// exceeds rho.
inline Lattice build_lattice(double rho, double truncation_radius, GridPtr grid) {
    using namespace lattice_detail;
    if (rho <= 0.0) throw std::domain_error("build_lattice: rho <= 0");
    if (truncation_radius <= 0.0 || truncation_radius >= 1.0)
        throw std::domain_error("build_lattice: truncation radius in (0,1) required");
    const QuadratureGrid& g = *grid;
    const RingGeom rg = ring_geometry(g);
    const std::size_t nrings = g.rings.size();
    const double sep = rho / 2.0;
    const double trunc_sq = truncation_radius * truncation_radius;
    const bool sorted = (g.n == 1);

    // node-set covering is trivially fine once centers are maximal, so grid
    // coarseness is caught up front: inter-ring beta gaps (and for n = 1 the
    // within-ring arcs) must stay below rho or the node set cannot stand in
    // for the continuum at scale rho
    double resolution = 0.0;
    for (std::size_t r = 0; r + 1 < nrings; ++r) {
        if (g.rings[r].radius_sq > trunc_sq) break;
        resolution = std::max(resolution, rg.beta[r + 1] - rg.beta[r]);
    }
    if (sorted) {
        for (std::size_t r = 0; r < nrings; ++r) {
            if (g.rings[r].radius_sq > trunc_sq) break;
            const double h = 2.0 * kPi / static_cast<double>(g.rings[r].count);
            resolution =
                std::max(resolution, 0.5 * std::acosh(cosh2_dist(rg, r, r, h)));
        }
    }
    if (resolution > rho) {
        throw LatticeError("build_lattice: grid too coarse, node resolution " +
                           std::to_string(resolution) + " exceeds rho " +
                           std::to_string(rho));
    }

    Lattice lat;
    lat.grid = grid;
    lat.rho = rho;
    lat.truncation_radius = truncation_radius;

    std::vector<AngleList> ring_centers(nrings);
    std::vector<std::uint32_t> rings_with_centers;

    for (std::size_t r = 0; r < nrings; ++r) {
        if (g.rings[r].radius_sq > trunc_sq) continue;
        // candidate rings and angular windows depend only on the ring pair
        std::vector<std::pair<std::uint32_t, double>> cand;
        for (std::uint32_t cr : rings_with_centers) {
            if (std::abs(rg.beta[cr] - rg.beta[r]) > sep) continue;
            const double win = angle_window(rg, r, cr, sep);
            if (win >= 0.0) cand.emplace_back(cr, win);
        }
        const double self_win = angle_window(rg, r, r, sep);
        bool self_added = false;
        for (std::size_t off = 0; off < g.rings[r].count; ++off) {
            const std::size_t node = g.rings[r].start + off;
            const double th = ring_angle(g, r, node);
            bool blocked = false;
            for (const auto& [cr, win] : cand) {
                if (sorted) {
                    if (any_in_window(ring_centers[cr], th, win)) blocked = true;
                } else {
                    const BallPoint z = g.node(node);
                    const double t2 = std::tanh(sep) * std::tanh(sep);
                    for (const auto& [ang, cid] : ring_centers[cr]) {
                        (void)ang;
                        if (rho_sq(z, g.node(lat.centers[cid])) < t2) {
                            blocked = true;
                            break;
                        }
                    }
                }
                if (blocked) break;
            }
            if (blocked) continue;
            const auto cid = static_cast<std::uint32_t>(lat.centers.size());
            lat.centers.push_back(static_cast<std::uint32_t>(node));
            if (ring_centers[r].empty())
                rings_with_centers.push_back(static_cast<std::uint32_t>(r));
            if (!self_added && self_win >= 0.0) {
                cand.emplace_back(static_cast<std::uint32_t>(r), self_win);
                self_added = true;
            }
            ring_centers[r].emplace_back(th, cid);
        }
    }
    if (lat.centers.empty())
        throw LatticeError("build_lattice: no nodes inside truncation radius");

    std::sort(rings_with_centers.begin(), rings_with_centers.end());

    // nearest center: sweep rings outward from the node's radius, cut off
    // once the radial gap alone exceeds the best match
    auto nearest_center = [&](std::size_t node, std::size_t ring, double th,
                              std::int32_t skip_cid) {
        double best = std::numeric_limits<double>::infinity();  // cosh(2 beta)
        std::int32_t best_cid = -1;
        auto consider = [&](std::uint32_t cr) {
            const AngleList& vec = ring_centers[cr];
            if (vec.empty()) return;
            if (sorted) {
                for_nearest(vec, th, [&](const std::pair<double, std::uint32_t>& e) {
                    if (static_cast<std::int32_t>(e.second) == skip_cid) return;
                    const double d = cosh2_dist(rg, ring, cr, th - e.first);
                    if (d < best ||
                        (d == best && static_cast<std::int32_t>(e.second) < best_cid)) {
                        best = d;
                        best_cid = static_cast<std::int32_t>(e.second);
                    }
                });
            } else {
                const BallPoint z = g.node(node);
                for (const auto& [ang, cid] : vec) {
                    (void)ang;
                    if (static_cast<std::int32_t>(cid) == skip_cid) continue;
                    const double r2 = rho_sq(z, g.node(lat.centers[cid]));
                    const double d = (1.0 + r2) / (1.0 - r2);  // cosh(2 beta)
                    if (d < best ||
                        (d == best && static_cast<std::int32_t>(cid) < best_cid)) {
                        best = d;
                        best_cid = static_cast<std::int32_t>(cid);
                    }
                }
            }
        };
        auto base = std::lower_bound(rings_with_centers.begin(), rings_with_centers.end(),
                                     static_cast<std::uint32_t>(ring));
        std::ptrdiff_t lo = (base - rings_with_centers.begin()) - 1;
        std::ptrdiff_t hi = base - rings_with_centers.begin();
        const auto nr = static_cast<std::ptrdiff_t>(rings_with_centers.size());
        while (lo >= 0 || hi < nr) {
            const double dlo =
                lo >= 0 ? std::abs(rg.beta[rings_with_centers[lo]] - rg.beta[ring])
                        : std::numeric_limits<double>::infinity();
            const double dhi =
                hi < nr ? std::abs(rg.beta[rings_with_centers[hi]] - rg.beta[ring])
                        : std::numeric_limits<double>::infinity();
            const bool take_lo = dlo <= dhi;
            const double gap = take_lo ? dlo : dhi;
            if (std::cosh(2.0 * gap) > best) break;  // no closer center possible
            if (take_lo) {
                consider(rings_with_centers[lo]);
                --lo;
            } else {
                consider(rings_with_centers[hi]);
                ++hi;
            }
        }
        return std::make_pair(best, best_cid);
    };

    lat.cell_of.assign(g.size(), -1);
    lat.cells.assign(lat.centers.size(), {});
    double worst_core = 1.0;  // cosh(2 beta) of the worst covered core node
    for (std::size_t r = 0; r < nrings; ++r) {
        for (std::size_t off = 0; off < g.rings[r].count; ++off) {
            const std::size_t node = g.rings[r].start + off;
            const double th = ring_angle(g, r, node);
            const auto [best, cid] = nearest_center(node, r, th, -1);
            lat.cell_of[node] = cid;
            lat.cells[cid].push_back(static_cast<std::uint32_t>(node));
            if (g.radius_sq[node] <= trunc_sq) worst_core = std::max(worst_core, best);
        }
    }
    lat.covering_radius = 0.5 * std::acosh(worst_core);

    double min_sep_cosh = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < lat.centers.size(); ++m) {
        const std::size_t node = lat.centers[m];
        const std::size_t r = ring_of(g, node);
        const auto [best, cid] =
            nearest_center(node, r, ring_angle(g, r, node), static_cast<std::int32_t>(m));
        (void)cid;
        min_sep_cosh = std::min(min_sep_cosh, best);
    }
    lat.min_separation = std::isfinite(min_sep_cosh)
                             ? 0.5 * std::acosh(min_sep_cosh)
                             : std::numeric_limits<double>::infinity();

    if (lat.covering_radius > rho * (1.0 + 1e-12)) {
        throw LatticeError("build_lattice: grid too coarse, measured covering radius " +
                           std::to_string(lat.covering_radius) + " exceeds rho " +
                           std::to_string(rho));
    }
    return lat;
}

// {z in grid : beta(z, S) <= sigma}; expand(S, 0) = S on the discrete node
// set and the result grows monotonically with sigma.
inline NodeSet expand(const NodeSet& S, double sigma, const QuadratureGrid& g) {
    using namespace lattice_detail;
    if (sigma < 0.0) throw std::domain_error("expand: sigma < 0");
    if (S.empty()) return {};
    const RingGeom rg = ring_geometry(g);
    const std::size_t nrings = g.rings.size();
    std::vector<char> mark(g.size(), 0);

    if (g.n == 1) {
        // arcs in, arcs out: the window of an angular run [a,b] on a ring
        // pair is [a-win, b+win], so the expansion works on per-ring runs of
        // consecutive node indices instead of marking node by node
        struct Arc {
            double lo, hi;  // angles, hi may exceed 2 pi before wrapping
        };
        std::vector<std::vector<Arc>> src(nrings);
        {
            std::size_t i = 0;
            while (i < S.size()) {
                const std::size_t rs = ring_of(g, S[i]);
                const RingInfo& ri = g.rings[rs];
                std::size_t j = i;
                while (j + 1 < S.size() && S[j + 1] == S[j] + 1 &&
                       S[j + 1] < ri.start + ri.count)
                    ++j;
                src[rs].push_back(
                    {ring_angle(g, rs, S[i]), ring_angle(g, rs, S[j])});
                i = j + 1;
            }
        }
        std::vector<std::vector<Arc>> dst(nrings);
        for (std::size_t rs = 0; rs < nrings; ++rs) {
            if (src[rs].empty()) continue;
            for (std::size_t r = 0; r < nrings; ++r) {
                if (std::abs(rg.beta[r] - rg.beta[rs]) > sigma) continue;
                const double win = angle_window(rg, r, rs, sigma);
                if (win < 0.0) continue;
                for (const Arc& a : src[rs]) dst[r].push_back({a.lo - win, a.hi + win});
            }
        }
        for (std::size_t r = 0; r < nrings; ++r) {
            if (dst[r].empty()) continue;
            const auto A = static_cast<std::ptrdiff_t>(g.rings[r].count);
            const double h = 2.0 * kPi / static_cast<double>(A);
            auto& arcs = dst[r];
            std::sort(arcs.begin(), arcs.end(),
                      [](const Arc& x, const Arc& y) { return x.lo < y.lo; });
            // merge overlapping arcs so every node is marked once
            std::vector<Arc> merged;
            for (const Arc& a : arcs) {
                if (!merged.empty() && a.lo <= merged.back().hi)
                    merged.back().hi = std::max(merged.back().hi, a.hi);
                else
                    merged.push_back(a);
            }
            for (const Arc& a : merged) {
                if (a.hi - a.lo >= 2.0 * kPi - h) {
                    for (std::ptrdiff_t j = 0; j < A; ++j) mark[g.rings[r].start + j] = 1;
                    break;
                }
                // node angles are (j + 1/2) h
                const auto jlo = static_cast<std::ptrdiff_t>(std::ceil(a.lo / h - 0.5));
                const auto jhi = static_cast<std::ptrdiff_t>(std::floor(a.hi / h - 0.5));
                for (std::ptrdiff_t j = jlo; j <= jhi; ++j) {
                    const std::ptrdiff_t jj = ((j % A) + A) % A;
                    mark[g.rings[r].start + jj] = 1;
                }
            }
        }
    } else {
        const double ts2 = std::tanh(sigma) * std::tanh(sigma);
        for (std::size_t node = 0; node < g.size(); ++node) {
            const double bz = std::atanh(std::sqrt(g.radius_sq[node]));
            const BallPoint z = g.node(node);
            for (std::uint32_t s : S) {
                const double bs = std::atanh(std::sqrt(g.radius_sq[s]));
                if (std::abs(bz - bs) > sigma) continue;
                if (rho_sq(z, g.node(s)) <= ts2) {
                    mark[node] = 1;
                    break;
                }
            }
        }
    }
    for (std::uint32_t s : S) mark[s] = 1;  // sigma = 0 keeps the set itself
    NodeSet out;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (mark[i]) out.push_back(static_cast<std::uint32_t>(i));
    return out;
}

struct CoveringFamily {
    double sigma = 0.0;
    int k = 0;
    GridPtr grid;
    // levels[i][j] = F_{i,j} as a sorted node set, 0 <= i <= k+1
    std::vector<std::vector<NodeSet>> levels;
    int overlap_bound = 0;  // measured max multiplicity over all levels
};

// F_{0,j} = base cells, F_{i+1,j} = sigma-expansion.  The base lattice is
// expected to carry parameter (k+1) sigma; that choice is the caller's.  The
// measured overlap of each level is recorded as the family's N.
inline CoveringFamily build_covering(double sigma, int k, const Lattice& base) {
    if (sigma < 0.0 || k < 0) throw std::domain_error("build_covering: bad sigma/k");
    CoveringFamily cov;
    cov.sigma = sigma;
    cov.k = k;
    cov.grid = base.grid;
    cov.levels.resize(k + 2);
    cov.levels[0].reserve(base.cells.size());
    for (const auto& cell : base.cells) {
        NodeSet s(cell.begin(), cell.end());
        std::sort(s.begin(), s.end());
        cov.levels[0].push_back(std::move(s));
    }
    for (int i = 0; i <= k; ++i) {
        cov.levels[i + 1].reserve(cov.levels[i].size());
        for (const NodeSet& s : cov.levels[i])
            cov.levels[i + 1].push_back(expand(s, sigma, *base.grid));
    }
    std::vector<std::uint16_t> count(base.grid->size());
    int worst = 0;
    for (const auto& level : cov.levels) {
        std::fill(count.begin(), count.end(), 0);
        for (const NodeSet& s : level)
            for (std::uint32_t v : s) ++count[v];
        worst = std::max<int>(worst, *std::max_element(count.begin(), count.end()));
    }
    cov.overlap_bound = worst;
    return cov;
}

// mu_rho = sum_m v_alpha(D_m) delta_{w_m}; cell masses are the quadrature
// masses of the Voronoi cells, so the total is the v_alpha mass of the
// covered region.
inline Measure mu_rho(const Lattice& lat, double alpha, const GridPtr& grid) {
    if (grid != lat.grid) throw std::domain_error("mu_rho: grid must be the lattice grid");
    if (std::abs(grid->alpha - alpha) > 1e-12)
        throw std::domain_error("mu_rho: alpha mismatch with grid weight");
    std::vector<Atom> atoms;
    atoms.reserve(lat.centers.size());
    for (std::size_t m = 0; m < lat.centers.size(); ++m) {
        double mass = 0.0;
        for (std::uint32_t node : lat.cells[m]) mass += grid->weights[node];
        atoms.push_back(Atom{lat.center_point(m), Complex(mass, 0.0),
                             static_cast<std::int64_t>(lat.centers[m])});
    }
    return Measure::atomic(std::move(atoms), grid->n, "mu_rho");
}

}  // namespace bergman
