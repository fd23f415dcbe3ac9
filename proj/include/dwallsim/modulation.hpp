#ifndef DWALLSIM_MODULATION_HPP
#define DWALLSIM_MODULATION_HPP

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dwallsim/calculus.hpp"
#include "dwallsim/cutoff.hpp"
#include "dwallsim/error.hpp"
#include "dwallsim/field.hpp"
#include "dwallsim/gauge.hpp"
#include "dwallsim/linalg4.hpp"
#include "dwallsim/params.hpp"
#include "dwallsim/trajectory.hpp"
#include "dwallsim/two_wall.hpp"
#include "dwallsim/wall.hpp"

namespace dwallsim {

/// A = (2/Gamma) blockdiag(B, B) with B = [[1, gamma], [-gamma, -1]]; the linearization of the
/// orthogonality map in the gauge parameters (y+, phi+, y-, phi-).
inline Mat4 matrix_A(const ModelParams& params) {
    const double c = 2.0 / params.Gamma(), g = params.gamma();
    return Mat4{{{c, c * g, 0, 0}, {-c * g, -c, 0, 0}, {0, 0, c, c * g}, {0, 0, -c * g, -c}}};
}

/// A^{-1} = blockdiag(B, B) / (2 Gamma), using B^2 = Gamma^2 I.
inline Mat4 matrix_A_inverse(const ModelParams& params) {
    const double c = 1.0 / (2.0 * params.Gamma()), g = params.gamma();
    return Mat4{{{c, c * g, 0, 0}, {-c * g, -c, 0, 0}, {0, 0, c, c * g}, {0, 0, -c * g, -c}}};
}

namespace detail {

inline void require_on_grid(const Gauge& g, const Grid1D& grid, const char* which) {
    if (!(g.y >= grid.x_min && g.y <= grid.x_max())) {
        throw Error(ErrorCode::RegridOutOfRange,
                    std::string(which) + " wall center y=" + std::to_string(g.y) + " is off the grid");
    }
}

/// Gauged wall and its two symmetry modes g.d_x w and e1^(g.w) at one point.
struct GaugedModes {
    Vec3 w, dw, rot;
};

inline GaugedModes gauged_modes(const AnalyticWall& wall, const Gauge& g, double x) {
    const double xs = x - g.y;
    const WallFrame f = wall.frame(xs);
    const double s = wall.sin_theta(xs);
    const Vec3 dw = -s * (wall.sigma.s1() * wall.Gamma * f.n + wall.gamma * f.p);
    const Vec3 w = rotate_e1(f.w, g.phi);
    return {w, rotate_e1(dw, g.phi), e1_cross(w)};
}

/// ∫ f.(g+.d_x w+), ∫ f.(e1^g+.w+), and the same for the minus wall; if subtract_profile is
/// set, f is replaced by f - P_{g+,g-}.
inline Vec4 orthogonality_integrals(std::span<const Vec3> f, const Grid1D& grid, const Gauge& gp,
                                    const Gauge& gm, const ModelParams& params, const WallPair& pair,
                                    bool subtract_profile) {
    require_on_grid(gp, grid, "plus");
    require_on_grid(gm, grid, "minus");
    const AnalyticWall wp(pair.plus(), params), wm(pair.minus(), params);
    const std::size_t n = grid.n;
    std::array<std::vector<double>, 4> dens;
    for (auto& d : dens) d.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid.x(i);
        const GaugedModes a = gauged_modes(wp, gp, x);
        const GaugedModes b = gauged_modes(wm, gm, x);
        const Vec3 e = subtract_profile ? f[i] - (a.w + b.w + kE1) : f[i];
        dens[0][i] = dot(e, a.dw);
        dens[1][i] = dot(e, a.rot);
        dens[2][i] = dot(e, b.dw);
        dens[3][i] = dot(e, b.rot);
    }
    return {integrate(dens[0], grid), integrate(dens[1], grid), integrate(dens[2], grid), integrate(dens[3], grid)};
}

inline Vec4 pack(const Gauge& gp, const Gauge& gm) { return {gp.y, gp.phi, gm.y, gm.phi}; }

}  // namespace detail

/// Linear functional F-bar(f): the four integrals of f against the symmetry modes of both walls.
inline Vec4 orthogonality_Fbar(std::span<const Vec3> f, const Grid1D& grid, const Gauge& gp, const Gauge& gm,
                               const ModelParams& params, const WallPair& pair = {}) {
    return detail::orthogonality_integrals(f, grid, gp, gm, params, pair, false);
}

/// F(m, g+, g-) = F-bar(m - P_{g+,g-}).
inline Vec4 orthogonality_F(std::span<const Vec3> m, const Grid1D& grid, const Gauge& gp, const Gauge& gm,
                            const ModelParams& params, const WallPair& pair = {}) {
    return detail::orthogonality_integrals(m, grid, gp, gm, params, pair, true);
}

struct ModulationOptions {
    double tol = 1e-10;
    int max_iter = 50;
    std::optional<double> separation_floor{};  // default 8 / Gamma
    WallPair pair{};
    bool newton_fallback = true;
    double stall_ratio = 0.9;
};

struct ModulationState {
    Grid1D grid{};
    Gauge g_plus{};
    Gauge g_minus{};
    Field3 eps;
    Vec4 ortho_residual{};
    double eps_h1 = 0.0;
    double eps_h2 = 0.0;
    int iterations = 0;
    bool converged = false;
    bool used_newton = false;
    /// Largest ratio |dp_k| / |dp_{k-1}| of consecutive fixed-point displacements.
    double contraction_ratio = 0.0;
};

/// Fixed point p <- p - A^{-1} F(m, p) for the gauges of m = P_{g+,g-} + eps. Falls back to
/// Newton with a finite-difference Jacobian if the contraction stalls. Returns the best iterate
/// with converged = false rather than throwing when the tolerance is not reached.
inline ModulationState decompose_static(std::span<const Vec3> m, const Grid1D& grid, const Gauge& gp0,
                                        const Gauge& gm0, const ModelParams& params,
                                        const ModulationOptions& opts = {}) {
    const double floor = opts.separation_floor.value_or(8.0 / params.Gamma());
    auto check_separation = [&](double yp, double ym) {
        if (yp - ym < floor) {
            throw Error(ErrorCode::SeparationTooSmall, "wall separation " + std::to_string(yp - ym) +
                                                           " below floor " + std::to_string(floor));
        }
    };
    check_separation(gp0.y, gm0.y);

    auto eval = [&](const Vec4& p) {
        return orthogonality_F(m, grid, {p[0], p[1]}, {p[2], p[3]}, params, opts.pair);
    };
    const Mat4 Ainv = matrix_A_inverse(params);

    ModulationState st;
    st.grid = grid;
    Vec4 p = detail::pack(gp0, gm0);
    Vec4 F = eval(p);
    Vec4 best_p = p;
    double best_res = max_abs(F);
    double prev_step = -1.0;
    bool newton = false;
    int it = 0;
    while (max_abs(F) >= opts.tol && it < opts.max_iter) {
        Vec4 dp;
        if (newton) {
            Mat4 J{};
            for (int j = 0; j < 4; ++j) {
                const double hstep = 1e-6;
                Vec4 pp = p, pm = p;
                pp[j] += hstep;
                pm[j] -= hstep;
                const Vec4 Fp = eval(pp), Fm = eval(pm);
                for (int i = 0; i < 4; ++i) J[i][j] = (Fp[i] - Fm[i]) / (2.0 * hstep);
            }
            dp = solve(J, F);
        } else {
            dp = Ainv * F;
        }
        for (int i = 0; i < 4; ++i) p[i] -= dp[i];
        ++it;
        const double step = max_abs(dp);
        if (prev_step > 0.0) {
            const double ratio = step / prev_step;
            st.contraction_ratio = std::max(st.contraction_ratio, ratio);
            if (!newton && opts.newton_fallback && ratio > opts.stall_ratio) {
                newton = true;
                st.used_newton = true;
            }
        }
        prev_step = step;
        if (!std::isfinite(step) || p[0] - p[2] < floor || p[0] < grid.x_min || p[0] > grid.x_max() ||
            p[2] < grid.x_min || p[2] > grid.x_max()) {
            break;  // left the admissible set; report the best iterate
        }
        F = eval(p);
        if (max_abs(F) < best_res) {
            best_res = max_abs(F);
            best_p = p;
        }
    }
    p = best_p;
    F = eval(p);
    st.g_plus = {p[0], p[1]};
    st.g_minus = {p[2], p[3]};
    st.iterations = it;
    st.ortho_residual = F;
    st.converged = max_abs(F) < opts.tol;
    const Field3 P = two_wall_profile(st.g_plus, st.g_minus, params, grid, opts.pair);
    st.eps.resize(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) st.eps[i] = m[i] - P[i];
    st.eps_h1 = sobolev_norm(st.eps, grid, NormOrder::H1);
    st.eps_h2 = sobolev_norm(st.eps, grid, NormOrder::H2);
    return st;
}

inline ModulationState decompose_static(const SpinField& m, const Gauge& gp0, const Gauge& gm0,
                                        const ModelParams& params, const ModulationOptions& opts = {}) {
    return decompose_static(m.values(), m.grid(), gp0, gm0, params, opts);
}

/// Gauge of a single wall w*^sigma: two orthogonality conditions solved by the 2x2 block of A.
struct SingleWallFit {
    Gauge g{};
    std::array<double, 2> residual{};
    int iterations = 0;
    bool converged = false;
};

inline SingleWallFit decompose_single(std::span<const Vec3> m, const Grid1D& grid, WallSign sigma, const Gauge& g0,
                                      const ModelParams& params, double tol = 1e-10, int max_iter = 50) {
    const AnalyticWall wall(sigma, params);
    auto eval = [&](const Gauge& g) {
        detail::require_on_grid(g, grid, "single");
        std::vector<double> a(grid.n), b(grid.n);
        for (std::size_t i = 0; i < grid.n; ++i) {
            const auto md = detail::gauged_modes(wall, g, grid.x(i));
            const Vec3 e = m[i] - md.w;
            a[i] = dot(e, md.dw);
            b[i] = dot(e, md.rot);
        }
        return std::array<double, 2>{integrate(a, grid), integrate(b, grid)};
    };
    const double c = 1.0 / (2.0 * params.Gamma()), gm = params.gamma();
    SingleWallFit fit;
    fit.g = g0;
    auto F = eval(fit.g);
    while (std::max(std::abs(F[0]), std::abs(F[1])) >= tol && fit.iterations < max_iter) {
        fit.g.y -= c * (F[0] + gm * F[1]);
        fit.g.phi -= c * (-gm * F[0] - F[1]);
        ++fit.iterations;
        F = eval(fit.g);
    }
    fit.residual = F;
    fit.converged = std::max(std::abs(F[0]), std::abs(F[1])) < tol;
    return fit;
}

/// Per-snapshot decomposition along a trajectory with warm starts.
struct DecompositionSeries {
    std::vector<double> times;
    std::vector<ModulationState> states;
    std::optional<std::size_t> failed_at{};

    std::vector<double> column(const std::string& name) const {
        std::vector<double> out;
        out.reserve(states.size());
        for (const auto& s : states) {
            if (name == "y_plus") out.push_back(s.g_plus.y);
            else if (name == "phi_plus") out.push_back(s.g_plus.phi);
            else if (name == "y_minus") out.push_back(s.g_minus.y);
            else if (name == "phi_minus") out.push_back(s.g_minus.phi);
            else if (name == "eps_h1") out.push_back(s.eps_h1);
            else if (name == "eps_h2") out.push_back(s.eps_h2);
            else if (name == "ortho_residual") out.push_back(max_abs(s.ortho_residual));
            else throw Error(ErrorCode::ValidationError, "unknown decomposition column " + name);
        }
        return out;
    }

    std::map<std::string, std::vector<double>> series() const {
        std::map<std::string, std::vector<double>> out;
        for (const char* c : {"y_plus", "phi_plus", "y_minus", "phi_minus", "eps_h1", "eps_h2", "ortho_residual"}) {
            out[c] = column(c);
        }
        return out;
    }
};

struct TrajectoryDecompositionOptions {
    ModulationOptions modulation{};
    bool keep_eps = false;  // drop eps fields to bound memory on long runs
};

/// Warm-started decomposition of every snapshot. The guess at t_k is the previous gauge advanced
/// by the precessing-gauge increment; on failure one reseed from g(0) + g*(t_k) - g*(0) is tried.
/// Phases are unwrapped so consecutive values differ by less than pi.
inline DecompositionSeries decompose_trajectory(const Trajectory& traj, const ModelParams& params, const Gauge& gp0,
                                                const Gauge& gm0, const TrajectoryDecompositionOptions& opts = {}) {
    const WallPair& pair = opts.modulation.pair;
    DecompositionSeries out;
    Gauge gp = gp0, gm = gm0;
    Gauge gp_start = gp0, gm_start = gm0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double t = traj.times[k];
        Gauge guess_p = gp, guess_m = gm;
        if (k > 0) {
            const double tp = traj.times[k - 1];
            guess_p = compose(gp, difference(precessing_gauge(pair.plus(), params, t),
                                             precessing_gauge(pair.plus(), params, tp)));
            guess_m = compose(gm, difference(precessing_gauge(pair.minus(), params, t),
                                             precessing_gauge(pair.minus(), params, tp)));
        }
        const SpinField& m = traj.snapshots[k];
        ModulationState st;
        bool ok = false;
        try {
            st = decompose_static(m, guess_p, guess_m, params, opts.modulation);
            ok = st.converged;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::SeparationTooSmall && e.code() != ErrorCode::RegridOutOfRange &&
                e.code() != ErrorCode::SolverFail)
                throw;
        }
        if (!ok && k > 0) {
            const Gauge rp = compose(gp_start, difference(precessing_gauge(pair.plus(), params, t),
                                                          precessing_gauge(pair.plus(), params, traj.times[0])));
            const Gauge rm = compose(gm_start, difference(precessing_gauge(pair.minus(), params, t),
                                                          precessing_gauge(pair.minus(), params, traj.times[0])));
            try {
                st = decompose_static(m, rp, rm, params, opts.modulation);
                ok = st.converged;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::SeparationTooSmall && e.code() != ErrorCode::RegridOutOfRange &&
                    e.code() != ErrorCode::SolverFail)
                    throw;
            }
        }
        if (!ok) {
            out.failed_at = k;
            break;
        }
        if (k > 0) {
            st.g_plus.phi = unwrap_near(st.g_plus.phi, gp.phi);
            st.g_minus.phi = unwrap_near(st.g_minus.phi, gm.phi);
        } else {
            gp_start = st.g_plus;
            gm_start = st.g_minus;
        }
        gp = st.g_plus;
        gm = st.g_minus;
        if (!opts.keep_eps) Field3().swap(st.eps);
        out.times.push_back(t);
        out.states.push_back(std::move(st));
    }
    return out;
}

/// |g'(t) - g*'(t)| per wall, with g' from centered differences of the decomposed gauges
/// (one-sided at the ends).
struct GaugeVelocityResidual {
    std::vector<double> times;
    std::vector<double> plus;
    std::vector<double> minus;
};

inline GaugeVelocityResidual gauge_velocity_residual(const DecompositionSeries& series, const ModelParams& params,
                                                     const WallPair& pair = {}) {
    GaugeVelocityResidual r;
    const std::size_t n = series.states.size();
    if (n < 2) return r;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t a = k == 0 ? 0 : k - 1, b = k + 1 == n ? k : k + 1;
        const double dt = series.times[b] - series.times[a];
        const auto& sa = series.states[a];
        const auto& sb = series.states[b];
        const double t = series.times[k];
        auto resid = [&](const Gauge& ga, const Gauge& gb, WallSign sigma) {
            const Gauge v = precessing_gauge_velocity(sigma, params, t);
            return std::abs((gb.y - ga.y) / dt - v.y) + std::abs((gb.phi - ga.phi) / dt - v.phi);
        };
        r.times.push_back(t);
        r.plus.push_back(resid(sa.g_plus, sb.g_plus, pair.plus()));
        r.minus.push_back(resid(sa.g_minus, sb.g_minus, pair.minus()));
    }
    return r;
}

/// mu = eta.w*, nu = eta.n*, rho = eta.p* node-wise.
struct FrameCoefficients {
    std::vector<double> mu, nu, rho;
};

inline FrameCoefficients frame_coefficients(std::span<const Vec3> eta, WallSign sigma, const ModelParams& params,
                                            const Grid1D& grid) {
    const AnalyticWall wall(sigma, params);
    FrameCoefficients c;
    c.mu.resize(grid.n);
    c.nu.resize(grid.n);
    c.rho.resize(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
        const WallFrame f = wall.frame(grid.x(i));
        c.mu[i] = dot(eta[i], f.w);
        c.nu[i] = dot(eta[i], f.n);
        c.rho[i] = dot(eta[i], f.p);
    }
    return c;
}

/// Frame coefficients of eta+- = (-g+-).m - w+- expressed at the lab coordinate x, i.e. sampled
/// at x - y+-: nu(x - y) = (m - g.w)(x).(g.n)(x) and so on. sin_theta holds sin theta*(x - y).
struct LabFrameCoefficients {
    std::vector<double> mu, nu, rho, sin_theta;
};

inline LabFrameCoefficients lab_frame_coefficients(std::span<const Vec3> m, const Grid1D& grid, const Gauge& g,
                                                   WallSign sigma, const ModelParams& params) {
    const AnalyticWall wall(sigma, params);
    LabFrameCoefficients c;
    for (auto* v : {&c.mu, &c.nu, &c.rho, &c.sin_theta}) v->resize(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double xs = grid.x(i) - g.y;
        const WallFrame f = wall.frame(xs);
        const Vec3 eta = m[i] - rotate_e1(f.w, g.phi);
        c.mu[i] = dot(eta, rotate_e1(f.w, g.phi));
        c.nu[i] = dot(eta, rotate_e1(f.n, g.phi));
        c.rho[i] = dot(eta, rotate_e1(f.p, g.phi));
        c.sin_theta[i] = wall.sin_theta(xs);
    }
    return c;
}

/// Cutoff pair for a decomposed state: psi+ centered at the walls' midpoint rising toward the
/// plus wall; psi- is its complement.
inline Cutoff wall_cutoff(const ModulationState& st, double R) {
    return make_cutoff(R, 0.5 * (st.g_plus.y + st.g_minus.y), 1, st.grid);
}

/// Reconstructs m = P + eps for a state that kept its eps field.
inline Field3 reconstruct(const ModulationState& st, const ModelParams& params, const WallPair& pair = {}) {
    if (st.eps.size() != st.grid.n) throw Error(ErrorCode::ValidationError, "state has no eps field");
    Field3 m = two_wall_profile(st.g_plus, st.g_minus, params, st.grid, pair);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += st.eps[i];
    return m;
}

/// {{|∫ sqrt(psi+) nu+ sin|, |∫ sqrt(psi+) rho+ sin|}, {same for minus}}.
inline std::array<std::array<double, 2>, 2> almost_orth_residual(const ModulationState& st, const Cutoff& plus,
                                                                 const ModelParams& params,
                                                                 const WallPair& pair = {}) {
    const Field3 m = reconstruct(st, params, pair);
    const Cutoff minus = plus.complement();
    std::array<std::array<double, 2>, 2> out{};
    auto one = [&](const Gauge& g, WallSign sigma, const Cutoff& cut) {
        const auto c = lab_frame_coefficients(m, st.grid, g, sigma, params);
        std::vector<double> a(st.grid.n), b(st.grid.n);
        for (std::size_t i = 0; i < st.grid.n; ++i) {
            a[i] = c.nu[i] * c.sin_theta[i];
            b[i] = c.rho[i] * c.sin_theta[i];
        }
        return std::array<double, 2>{std::abs(integrate(a, st.grid, cut.sqrt_psi())),
                                     std::abs(integrate(b, st.grid, cut.sqrt_psi()))};
    };
    out[0] = one(st.g_plus, pair.plus(), plus);
    out[1] = one(st.g_minus, pair.minus(), minus);
    return out;
}

/// ||(nu+-, rho+-)||_{H^k(psi+- dx)} for both walls.
inline std::array<double, 2> localized_frame_norms(const ModulationState& st, const Cutoff& plus,
                                                   const ModelParams& params, NormOrder order,
                                                   const WallPair& pair = {}) {
    const Field3 m = reconstruct(st, params, pair);
    const Cutoff minus = plus.complement();
    auto one = [&](const Gauge& g, WallSign sigma, const Cutoff& cut) {
        const auto c = lab_frame_coefficients(m, st.grid, g, sigma, params);
        NormOptions o;
        o.weight = cut.psi();
        const double a = sobolev_norm(c.nu, st.grid, order, o);
        const double b = sobolev_norm(c.rho, st.grid, order, o);
        return std::sqrt(a * a + b * b);
    };
    return {one(st.g_plus, pair.plus(), plus), one(st.g_minus, pair.minus(), minus)};
}

}  // namespace dwallsim

#endif  // DWALLSIM_MODULATION_HPP
