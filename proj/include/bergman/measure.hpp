#pragma once

// Measures on the ball come in two concrete forms: a complex density against
// v_alpha sampled on a quadrature grid, or a finite list of atoms.  The
// variation |mu| replaces density values / masses by their absolute values
// (the complex case reduces to four positive measures by Jordan
// decomposition, and all Carleson quantities are evaluated on |mu|).

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bergman/core.hpp"
#include "bergman/geometry.hpp"
#include "bergman/quadrature.hpp"

namespace bergman {

struct SymbolFunction {
    std::function<Complex(const BallPoint&)> eval;
    double sup_bound = 1.0;   // must dominate |a(z)| on any grid
    bool radial = false;      // depends on |z| only (fast diagonal path)
    std::string name;

    Complex operator()(const BallPoint& z) const { return eval(z); }
};

inline SymbolFunction symbol_one() {
    return {[](const BallPoint&) { return Complex(1.0, 0.0); }, 1.0, true, "one"};
}

struct Atom {
    BallPoint location;
    Complex mass;
    // Node index when the atom sits on a known grid node (lattice centers do);
    // -1 otherwise.  Segmentation masks use this to place atoms in node sets.
    std::int64_t node_hint = -1;
};

class Measure {
public:
    enum class Kind { Density, Atomic };

    static Measure density(GridPtr grid, std::vector<Complex> values, std::string name = {}) {
        if (!grid || values.size() != grid->size())
            throw std::domain_error("Measure::density: values/grid size mismatch");
        Measure m;
        m.kind_ = Kind::Density;
        m.grid_ = std::move(grid);
        m.values_ = std::move(values);
        m.name_ = std::move(name);
        return m;
    }

    template <typename F>
    static Measure density(GridPtr grid, F&& f, std::string name = {}) {
        std::vector<Complex> v(grid->size());
        for (std::size_t i = 0; i < grid->size(); ++i) v[i] = f(grid->node(i));
        Measure m = density(std::move(grid), std::move(v), std::move(name));
        m.density_fn_ = std::forward<F>(f);
        return m;
    }

    // defining callable when the density came from one (enables symbol-level
    // composition, e.g. operator translation)
    const std::function<Complex(const BallPoint&)>& density_fn() const { return density_fn_; }

    // v_alpha itself: density identically 1.
    static Measure v_alpha(GridPtr grid) {
        return density(grid, std::vector<Complex>(grid->size(), Complex(1.0, 0.0)), "valpha");
    }

    static Measure atomic(std::vector<Atom> atoms, int n, std::string name = {}) {
        Measure m;
        m.kind_ = Kind::Atomic;
        m.atoms_ = std::move(atoms);
        m.n_ = n;
        m.name_ = std::move(name);
        return m;
    }

    static Measure dirac(const BallPoint& w, Complex mass = Complex(1.0, 0.0)) {
        return atomic({Atom{w, mass, -1}}, w.dim(), "dirac");
    }

    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    int dim() const { return kind_ == Kind::Density ? grid_->n : n_; }
    const GridPtr& grid() const { return grid_; }
    const std::vector<Complex>& values() const { return values_; }
    const std::vector<Atom>& atoms() const { return atoms_; }

    // sum of f against the measure; exact for atoms, quadrature for densities
    template <typename F>
    Complex integrate(F&& f) const {
        Complex acc(0.0, 0.0);
        if (kind_ == Kind::Density) {
            for (std::size_t i = 0; i < grid_->size(); ++i)
                acc += grid_->weights[i] * values_[i] * f(grid_->node(i));
        } else {
            for (const Atom& a : atoms_) acc += a.mass * f(a.location);
        }
        return acc;
    }

    // integral of a nonnegative function against |mu|
    template <typename F>
    double integrate_abs(F&& f) const {
        double acc = 0.0;
        if (kind_ == Kind::Density) {
            for (std::size_t i = 0; i < grid_->size(); ++i)
                acc += grid_->weights[i] * std::abs(values_[i]) * f(grid_->node(i));
        } else {
            for (const Atom& a : atoms_) acc += std::abs(a.mass) * f(a.location);
        }
        return acc;
    }

    double total_variation() const {
        return integrate_abs([](const BallPoint&) { return 1.0; });
    }

    // |mu|-mass of a hyperbolic disk
    double abs_mass_in(const HyperbolicDisk& disk) const {
        double acc = 0.0;
        if (kind_ == Kind::Density) {
            const double t2 = disk.rho_radius() * disk.rho_radius();
            for (std::size_t i = 0; i < grid_->size(); ++i) {
                if (rho_sq(disk.center, grid_->node(i)) <= t2)
                    acc += grid_->weights[i] * std::abs(values_[i]);
            }
        } else {
            for (const Atom& a : atoms_)
                if (disk.contains(a.location)) acc += std::abs(a.mass);
        }
        return acc;
    }

    // Lazy "variation is Carleson" flag; the checker is supplied by the caller
    // (carleson.hpp) to keep this header free of the probe machinery.
    bool variation_carleson(const std::function<bool(const Measure&)>& check) const {
        if (!variation_carleson_) variation_carleson_ = check(*this);
        return *variation_carleson_;
    }

private:
    Kind kind_ = Kind::Atomic;
    GridPtr grid_;
    std::function<Complex(const BallPoint&)> density_fn_;
    std::vector<Complex> values_;
    std::vector<Atom> atoms_;
    int n_ = 1;
    std::string name_;
    mutable std::optional<bool> variation_carleson_;
};

template <typename F>
Complex integrate(F&& f, const Measure& mu) {
    return mu.integrate(std::forward<F>(f));
}

}  // namespace bergman
