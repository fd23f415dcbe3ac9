#ifndef DWALLSIM_GAUGE_HPP
#define DWALLSIM_GAUGE_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>

#include "dwallsim/error.hpp"
#include "dwallsim/field.hpp"
#include "dwallsim/params.hpp"
#include "dwallsim/vec3.hpp"

namespace dwallsim {

/// Element (y, phi) of R x R/2piZ acting by g.f(x) = R_phi f(x - y).
/// phi is stored unwrapped; comparisons go through gauge_norm.
struct Gauge {
    double y = 0.0;
    double phi = 0.0;

    friend bool operator==(const Gauge&, const Gauge&) = default;
};

/// Distance from phi to 2 pi Z.
inline double angle_distance(double phi) {
    const double r = std::remainder(phi, 2.0 * std::numbers::pi);
    return std::abs(r);
}

inline double gauge_norm(const Gauge& g) { return std::abs(g.y) + angle_distance(g.phi); }

/// (a * b).f = a.(b.f). Translations and e1-rotations commute, so the law is additive.
inline Gauge compose(const Gauge& a, const Gauge& b) { return {a.y + b.y, a.phi + b.phi}; }
inline Gauge inverse(const Gauge& g) { return {-g.y, -g.phi}; }
inline Gauge difference(const Gauge& a, const Gauge& b) { return {a.y - b.y, a.phi - b.phi}; }

/// Shift phi by a multiple of 2 pi so that it lies within pi of reference.
inline double unwrap_near(double phi, double reference) {
    const double two_pi = 2.0 * std::numbers::pi;
    return phi - two_pi * std::round((phi - reference) / two_pi);
}

/// Lazily gauged source: evaluates R_phi src(x - y).
template <class Source>
struct Gauged {
    Gauge g;
    Source source;

    Vec3 operator()(double x) const { return rotate_e1(source(x - g.y), g.phi); }
};

template <class Source>
Gauged<Source> gauged(const Gauge& g, Source source) {
    return Gauged<Source>{g, std::move(source)};
}

template <class Source>
Gauged<Source> gauged(const Gauge& g, const Gauged<Source>& inner) {
    return Gauged<Source>{compose(g, inner.g), inner.source};
}

/// Gauge action on an analytic source, sampled on grid.
template <class Source>
SpinField gauge_apply(const Gauge& g, const Source& source, const Grid1D& grid) {
    return SpinField::project(grid, sample(gauged(g, source), grid));
}

enum class OutOfRange { Throw, HoldBoundary, Zero };

/// Catmull-Rom interpolation of a sampled 3-vector field at an arbitrary point.
inline Vec3 interpolate(std::span<const Vec3> values, const Grid1D& grid, double x,
                        OutOfRange policy = OutOfRange::Throw) {
    const double tol = 1e-12 * grid.dx;
    if (x < grid.x_min - tol || x > grid.x_max() + tol) {
        switch (policy) {
            case OutOfRange::Throw:
                throw Error(ErrorCode::RegridOutOfRange, "sample at x=" + std::to_string(x) + " is off the grid");
            case OutOfRange::HoldBoundary: return x < grid.x_min ? values.front() : values.back();
            case OutOfRange::Zero: return Vec3{};
        }
    }
    const double s = std::clamp((x - grid.x_min) / grid.dx, 0.0, static_cast<double>(grid.n - 1));
    auto i = static_cast<std::ptrdiff_t>(std::floor(s));
    const auto last = static_cast<std::ptrdiff_t>(grid.n) - 1;
    if (i >= last) i = last - 1;
    const double t = s - static_cast<double>(i);
    auto at = [&](std::ptrdiff_t k) { return values[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, last))]; };
    const Vec3 p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
    const double t2 = t * t, t3 = t2 * t;
    return 0.5 * ((2.0 * p1) + (p2 - p0) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2 +
                  (3.0 * p1 - p0 - 3.0 * p2 + p3) * t3);
}

/// Gauge action on a sampled field by resampling, renormalized onto the sphere.
inline SpinField gauge_apply(const Gauge& g, const SpinField& f, OutOfRange policy = OutOfRange::Throw) {
    if (g.y == 0.0 && g.phi == 0.0) return f;
    const Grid1D& grid = f.grid();
    Field3 out(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
        out[i] = rotate_e1(interpolate(f.values(), grid, grid.x(i) - g.y, policy), g.phi);
    }
    return SpinField::project(grid, std::move(out));
}

/// Same action on a non-unit 3-vector field (no renormalization).
inline Field3 gauge_apply_vector(const Gauge& g, std::span<const Vec3> f, const Grid1D& grid,
                                 OutOfRange policy = OutOfRange::Throw) {
    Field3 out(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
        out[i] = rotate_e1(interpolate(f, grid, grid.x(i) - g.y, policy), g.phi);
    }
    return out;
}

/// y*(t) = -(alpha/Gamma) ∫_0^t h.
inline double wall_drift(const ModelParams& params, double t) {
    return -(params.alpha() / params.Gamma()) * params.field().integral(t);
}

/// Gauge g*^sigma(t) carrying the precessing wall: translation sigma1 y*(t), rotation
/// (-1 + sigma1 alpha gamma / Gamma) ∫_0^t h.
inline Gauge precessing_gauge(WallSign sigma, const ModelParams& params, double t) {
    const double H = params.field().integral(t);
    const double y = -(params.alpha() / params.Gamma()) * H;
    const double phi = (-1.0 + sigma.s1() * params.alpha() * params.gamma() / params.Gamma()) * H;
    return {sigma.s1() * y, phi};
}

/// Instantaneous velocity of g*^sigma at time t.
inline Gauge precessing_gauge_velocity(WallSign sigma, const ModelParams& params, double t) {
    const double h = params.h(t);
    return {sigma.s1() * (-(params.alpha() / params.Gamma()) * h),
            (-1.0 + sigma.s1() * params.alpha() * params.gamma() / params.Gamma()) * h};
}

}  // namespace dwallsim

#endif  // DWALLSIM_GAUGE_HPP
