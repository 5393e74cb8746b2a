#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace bergman {

using Complex = std::complex<double>;

// Points with |z| >= 1 - kBoundaryTol are rejected at construction; closer to
// the boundary the kernel denominators 1 - <w,z> lose all precision.
inline constexpr double kBoundaryTol = 1e-12;

inline constexpr double kPi = 3.14159265358979323846;

// c_alpha = Gamma(n+alpha+1) / (n! Gamma(alpha+1)), the constant that makes
// v_alpha a probability measure on the ball.
inline double c_alpha(int n, double alpha) {
    return std::exp(std::lgamma(n + alpha + 1.0) - std::lgamma(n + 1.0) -
                    std::lgamma(alpha + 1.0));
}

// Gamma(a)/Gamma(b) through log-gamma, safe for large arguments.
inline double gamma_ratio(double a, double b) {
    return std::exp(std::lgamma(a) - std::lgamma(b));
}

// Deterministic uniform generator.  splitmix64 keeps the stream identical
// across standard libraries, which the CLI needs for byte-identical reruns.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

private:
    std::uint64_t state_;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace bergman
