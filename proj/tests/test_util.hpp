#ifndef DWALLSIM_TEST_UTIL_HPP
#define DWALLSIM_TEST_UTIL_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dwallsim/dwallsim.hpp"

namespace testutil {

using namespace dwallsim;

/// Smooth random vector field: a few Gaussian bumps per component, all centered within `spread`.
inline Field3 random_bumps(const Grid1D& grid, std::uint64_t seed, double amplitude, double spread = 5.0,
                           int bumps = 4) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> w(0.7, 2.5);
    Field3 f(grid.n);
    for (int b = 0; b < bumps; ++b) {
        const double c = spread * u(rng);
        const double s = w(rng);
        const Vec3 a{u(rng), u(rng), u(rng)};
        for (std::size_t i = 0; i < grid.n; ++i) {
            const double x = grid.x(i);
            f[i] += amplitude * std::exp(-0.5 * (x - c) * (x - c) / (s * s)) * a;
        }
    }
    return f;
}

inline std::vector<double> random_scalar_bumps(const Grid1D& grid, std::uint64_t seed, double spread = 5.0,
                                               int bumps = 5) {
    const Field3 f = random_bumps(grid, seed, 1.0, spread, bumps);
    std::vector<double> v(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) v[i] = f[i].x + 0.5 * f[i].y * std::sin(grid.x(i));
    return v;
}

/// Unit field: normalize(base + bumps).
inline SpinField perturbed_unit(const SpinField& base, std::uint64_t seed, double amplitude, double spread = 5.0) {
    const Field3 b = random_bumps(base.grid(), seed, amplitude, spread);
    Field3 m(base.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = base[i] + b[i];
    return SpinField::project(base.grid(), std::move(m));
}

inline double max_dist(std::span<const Vec3> a, std::span<const Vec3> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, norm(a[i] - b[i]));
    return d;
}

inline double max_abs(const std::vector<double>& v) {
    double d = 0.0;
    for (double x : v) d = std::max(d, std::abs(x));
    return d;
}

inline std::vector<double> xs(const Grid1D& g) {
    std::vector<double> x(g.n);
    for (std::size_t i = 0; i < g.n; ++i) x[i] = g.x(i);
    return x;
}

}  // namespace testutil

#endif
