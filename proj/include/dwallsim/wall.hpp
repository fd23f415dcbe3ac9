#ifndef DWALLSIM_WALL_HPP
#define DWALLSIM_WALL_HPP

#include <cmath>

#include "dwallsim/field.hpp"
#include "dwallsim/params.hpp"
#include "dwallsim/vec3.hpp"

namespace dwallsim {

/// Polar angle of the wall, 2 arctan(exp(-Gamma x)), taking values in (0, pi).
inline double theta_star(double x, double Gamma) { return 2.0 * std::atan(std::exp(-Gamma * x)); }

// sin and cos of theta_star in closed form; no cancellation in the tails.
inline double sin_theta_star(double x, double Gamma) { return 1.0 / std::cosh(Gamma * x); }
inline double cos_theta_star(double x, double Gamma) { return std::tanh(Gamma * x); }

inline double beta_star(double x, double Gamma) {
    const double s = sin_theta_star(x, Gamma);
    return 2.0 * Gamma * Gamma * s * s;
}

/// Orthonormal frame (w, n, p) attached to a wall at one point.
struct WallFrame {
    Vec3 w;
    Vec3 n;
    Vec3 p;
};

/// Closed-form wall w*^sigma and its derivatives, evaluable anywhere on the line.
///
/// The wall connects -sigma1 e1 at -inf to sigma1 e1 at +inf with the in-plane part
/// sigma2 sin(theta)(cos(gamma x), -sin(gamma x)). This twist direction is the one fixed by
/// the DMI term; it solves  dw/dx = sigma1 Gamma w^(e1^w) - gamma e1^w  for every sigma.
struct AnalyticWall {
    WallSign sigma;
    double gamma = 0.0;
    double Gamma = 1.0;

    AnalyticWall() = default;
    AnalyticWall(WallSign s, const ModelParams& params) : sigma(s), gamma(params.gamma()), Gamma(params.Gamma()) {}

    double sin_theta(double x) const { return sin_theta_star(sigma.s1() * x, Gamma); }

    WallFrame frame(double x) const {
        const double arg = Gamma * sigma.s1() * x;
        const double s = 1.0 / std::cosh(arg);
        const double c = std::tanh(arg);
        const double cg = sigma.s2() * std::cos(gamma * x);
        const double sg = -sigma.s2() * std::sin(gamma * x);
        // n = -(1/sin) w^(e1^w) written without the division: e1 - w1 w = sin * (sin, -cos u).
        return WallFrame{
            Vec3{c, s * cg, s * sg},
            Vec3{-s, c * cg, c * sg},
            Vec3{0.0, -sg, cg},
        };
    }

    Vec3 operator()(double x) const { return frame(x).w; }

    /// d/dx w*^sigma = -sin(theta) (sigma1 Gamma n + gamma p).
    Vec3 derivative(double x) const {
        const WallFrame f = frame(x);
        const double s = sin_theta(x);
        return -s * (sigma.s1() * Gamma * f.n + gamma * f.p);
    }

    /// d2/dx2 w*^sigma, differentiated from the first-derivative formula.
    Vec3 second_derivative(double x) const {
        const WallFrame f = frame(x);
        const double s = sin_theta(x);
        const double c = std::tanh(Gamma * sigma.s1() * x);
        const double ds = -sigma.s1() * Gamma * s * c;
        const Vec3 dn = sigma.s1() * Gamma * s * f.w - gamma * e1_cross(f.n);
        const Vec3 dp = -gamma * e1_cross(f.p);
        return -ds * (sigma.s1() * Gamma * f.n + gamma * f.p) - s * (sigma.s1() * Gamma * dn + gamma * dp);
    }
};

inline SpinField wall_profile(WallSign sigma, const ModelParams& params, const Grid1D& grid) {
    return SpinField::project(grid, sample(AnalyticWall(sigma, params), grid));
}

struct FrameFields {
    SpinField w;
    SpinField n;
    SpinField p;
};

inline FrameFields moving_frame(WallSign sigma, const ModelParams& params, const Grid1D& grid) {
    const AnalyticWall wall(sigma, params);
    Field3 w(grid.n), n(grid.n), p(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
        const WallFrame f = wall.frame(grid.x(i));
        w[i] = f.w;
        n[i] = f.n;
        p[i] = f.p;
    }
    return {SpinField::project(grid, std::move(w)), SpinField::project(grid, std::move(n)),
            SpinField::project(grid, std::move(p))};
}

}  // namespace dwallsim

#endif  // DWALLSIM_WALL_HPP
