#ifndef DWALLSIM_CALCULUS_HPP
#define DWALLSIM_CALCULUS_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "dwallsim/error.hpp"
#include "dwallsim/field.hpp"
#include "dwallsim/vec3.hpp"

namespace dwallsim {

inline double abs2(double v) { return v * v; }
inline double abs2(const Vec3& v) { return norm2(v); }

/// Centered first difference; second-order one-sided stencils at both ends.
template <class T>
std::vector<T> diff1(std::span<const T> f, const Grid1D& grid) {
    require_min_points(grid, 3);
    const std::size_t n = f.size();
    const double inv = 1.0 / (2.0 * grid.dx);
    std::vector<T> out(n);
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv;
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - f[i - 1]) * inv;
    out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv;
    return out;
}

/// Three-point second difference; second-order one-sided four-point stencils at the ends
/// (the interior stencil is reused when only three points exist).
template <class T>
std::vector<T> diff2(std::span<const T> f, const Grid1D& grid) {
    require_min_points(grid, 3);
    const std::size_t n = f.size();
    const double inv = 1.0 / (grid.dx * grid.dx);
    std::vector<T> out(n);
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * inv;
    if (n == 3) {
        out[0] = out[1];
        out[2] = out[1];
    } else {
        out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * inv;
        out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * inv;
    }
    return out;
}

template <class T>
std::vector<T> diff1(const std::vector<T>& f, const Grid1D& grid) { return diff1(std::span<const T>(f), grid); }
template <class T>
std::vector<T> diff2(const std::vector<T>& f, const Grid1D& grid) { return diff2(std::span<const T>(f), grid); }

/// Closed interval [lo, hi] restricting a quadrature to the nodes it contains.
struct Interval {
    double lo;
    double hi;
};

/// Trapezoid rule, optionally weighted node-wise and/or restricted to an interval.
/// Summation runs left to right so results are reproducible bit for bit.
inline double integrate(std::span<const double> f, const Grid1D& grid, std::span<const double> weight = {},
                        std::optional<Interval> restriction = std::nullopt) {
    require_min_points(grid, 2);
    std::size_t lo = 0, hi = grid.n - 1;
    if (restriction) {
        const double a = (restriction->lo - grid.x_min) / grid.dx;
        const double b = (restriction->hi - grid.x_min) / grid.dx;
        const double eps = 1e-9;
        lo = static_cast<std::size_t>(std::max(0.0, std::ceil(a - eps)));
        hi = static_cast<std::size_t>(std::clamp(std::floor(b + eps), 0.0, static_cast<double>(grid.n - 1)));
        if (hi <= lo) return 0.0;
    }
    auto value = [&](std::size_t i) { return weight.empty() ? f[i] : f[i] * weight[i]; };
    double acc = 0.5 * (value(lo) + value(hi));
    for (std::size_t i = lo + 1; i < hi; ++i) acc += value(i);
    return acc * grid.dx;
}

inline double integrate(const std::vector<double>& f, const Grid1D& grid, const std::vector<double>& weight = {},
                        std::optional<Interval> restriction = std::nullopt) {
    return integrate(std::span<const double>(f), grid, std::span<const double>(weight), restriction);
}

/// Node-wise |f_i|^2.
template <class T>
std::vector<double> squared_magnitude(std::span<const T> f) {
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = abs2(f[i]);
    return out;
}

/// Node-wise a_i . b_i.
inline std::vector<double> pointwise_dot(std::span<const Vec3> a, std::span<const Vec3> b) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = dot(a[i], b[i]);
    return out;
}

enum class NormOrder { L2 = 0, H1 = 1, H2 = 2 };

struct NormOptions {
    std::span<const double> weight{};
    std::optional<Interval> restriction{};
};

/// Discrete Sobolev norm sqrt(sum_{j<=k} ∫ |d^j f|^2 w dx) with finite differences for d^j.
template <class T>
double sobolev_norm(std::span<const T> f, const Grid1D& grid, NormOrder order, const NormOptions& opts = {}) {
    require_min_points(grid, 3);
    double total = integrate(squared_magnitude(f), grid, opts.weight, opts.restriction);
    if (order == NormOrder::L2) return std::sqrt(total);
    const auto d1 = diff1(f, grid);
    total += integrate(squared_magnitude(std::span<const T>(d1)), grid, opts.weight, opts.restriction);
    if (order == NormOrder::H2) {
        const auto d2 = diff2(f, grid);
        total += integrate(squared_magnitude(std::span<const T>(d2)), grid, opts.weight, opts.restriction);
    }
    return std::sqrt(total);
}

template <class T>
double sobolev_norm(const std::vector<T>& f, const Grid1D& grid, NormOrder order, const NormOptions& opts = {}) {
    return sobolev_norm(std::span<const T>(f), grid, order, opts);
}

/// Discrete size ||m_2||_L2 + ||m_3||_L2 + ||d_x m||_L2 adapted to fields tending to ±e1.
inline double script_h1_size(std::span<const Vec3> m, const Grid1D& grid) {
    std::vector<double> m2(m.size()), m3(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        m2[i] = m[i].y * m[i].y;
        m3[i] = m[i].z * m[i].z;
    }
    const auto d1 = diff1(m, grid);
    return std::sqrt(integrate(m2, grid)) + std::sqrt(integrate(m3, grid)) +
           std::sqrt(integrate(squared_magnitude(std::span<const Vec3>(d1)), grid));
}

}  // namespace dwallsim

#endif  // DWALLSIM_CALCULUS_HPP
