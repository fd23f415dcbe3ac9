#ifndef DWALLSIM_HARNESS_HPP
#define DWALLSIM_HARNESS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dwallsim/calculus.hpp"
#include "dwallsim/cutoff.hpp"
#include "dwallsim/energy.hpp"
#include "dwallsim/error.hpp"
#include "dwallsim/gauge.hpp"
#include "dwallsim/integrator.hpp"
#include "dwallsim/modulation.hpp"
#include "dwallsim/params.hpp"
#include "dwallsim/spectral.hpp"
#include "dwallsim/two_wall.hpp"
#include "dwallsim/wall.hpp"

namespace dwallsim {

// ---------------------------------------------------------------------------------------------
// Interaction quantities

/// q(r) = (1 + |r|) exp(-Gamma r).
inline double q_interaction(double r, double Gamma) { return (1.0 + std::abs(r)) * std::exp(-Gamma * r); }

/// sup over |s| <= 1 of q(r + s) / q(r) for r in [r_min, r_max], sampled.
inline double q_quasi_invariance_constant(double Gamma, double r_min = 1.0, double r_max = 200.0,
                                          int r_samples = 2000, int s_samples = 201) {
    double worst = 0.0;
    for (int i = 0; i < r_samples; ++i) {
        const double r = r_min + (r_max - r_min) * i / (r_samples - 1);
        const double qr = q_interaction(r, Gamma);
        for (int j = 0; j < s_samples; ++j) {
            const double s = -1.0 + 2.0 * j / (s_samples - 1);
            worst = std::max(worst, q_interaction(r + s, Gamma) / qr);
        }
    }
    return worst;
}

struct InteractionSpec {
    double lambda = 0.05;       // decay rate entering the memory kernel
    int steps_per_unit = 400;   // trapezoid resolution in time
    int min_steps = 2000;
};

/// kappa(t) = exp(-Gamma y*(t)) + (∫_0^t exp(-2 lambda (t - s)) q(2 y*(s)) ds)^{1/2}.
inline double kappa(double t, const InteractionSpec& spec, const ModelParams& params) {
    if (!(spec.lambda > 0.0)) throw Error(ErrorCode::ValidationError, "kappa needs lambda > 0");
    const double G = params.Gamma();
    const double head = std::exp(-G * wall_drift(params, t));
    if (t <= 0.0) return head;
    const int steps = std::max(spec.min_steps, static_cast<int>(std::ceil(t * spec.steps_per_unit)));
    const double tau = t / steps;
    double acc = 0.0;
    for (int i = 0; i <= steps; ++i) {
        const double s = i * tau;
        const double f = std::exp(-2.0 * spec.lambda * (t - s)) * q_interaction(2.0 * wall_drift(params, s), G);
        acc += (i == 0 || i == steps) ? 0.5 * f : f;
    }
    return head + std::sqrt(acc * tau);
}

inline std::vector<double> kappa_series(const std::vector<double>& times, const InteractionSpec& spec,
                                        const ModelParams& params) {
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(kappa(t, spec, params));
    return out;
}

// ---------------------------------------------------------------------------------------------
// Fits

struct DecayFit {
    double rate = 0.0;
    double amplitude = 0.0;
    double residual = 0.0;  // RMS of the log-space residual
    std::size_t first = 0, last = 0;  // window used (inclusive)
};

/// Log-linear least squares of value - floor over the longest contiguous run of points above
/// 10 * floor (the latest run on ties). Throws INSUFFICIENT_DATA for fewer than 10 usable points
/// or a non-decaying window.
inline DecayFit fit_decay_rate(const std::vector<double>& t, const std::vector<double>& v, double floor = 0.0) {
    if (t.size() != v.size()) throw Error(ErrorCode::ValidationError, "fit_decay_rate: length mismatch");
    const double threshold = std::max(10.0 * floor, std::numeric_limits<double>::min());
    std::size_t best_lo = 0, best_len = 0;
    for (std::size_t i = 0; i < v.size();) {
        if (!(v[i] > threshold && v[i] - floor > 0.0)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < v.size() && v[j] > threshold && v[j] - floor > 0.0) ++j;
        if (j - i >= best_len) {
            best_len = j - i;
            best_lo = i;
        }
        i = j;
    }
    if (best_len < 10) throw Error(ErrorCode::InsufficientData, "need >= 10 points above 10x floor");
    double st = 0, sy = 0, stt = 0, sty = 0;
    const double n = static_cast<double>(best_len);
    for (std::size_t i = best_lo; i < best_lo + best_len; ++i) {
        const double y = std::log(v[i] - floor);
        st += t[i];
        sy += y;
        stt += t[i] * t[i];
        sty += t[i] * y;
    }
    const double denom = n * stt - st * st;
    if (!(denom > 0.0)) throw Error(ErrorCode::InsufficientData, "degenerate time window");
    const double slope = (n * sty - st * sy) / denom;
    const double intercept = (sy - slope * st) / n;
    double ss = 0.0;
    for (std::size_t i = best_lo; i < best_lo + best_len; ++i) {
        const double r = std::log(v[i] - floor) - (intercept + slope * t[i]);
        ss += r * r;
    }
    const double scale = std::max(1.0, std::abs(sy / n));
    if (!(-slope > 1e-12 * scale)) throw Error(ErrorCode::InsufficientData, "series does not decay");
    return {-slope, std::exp(intercept), std::sqrt(ss / n), best_lo, best_lo + best_len - 1};
}

struct EnvelopeFit {
    double A = 0.0;
    double B = 0.0;
    double lambda = 0.0;
    double residual = 0.0;  // RMS relative error
};

/// Fits v(t) ~ A exp(-lambda t) + B kappa(t) with A, B >= 0, minimizing the RMS relative error:
/// nonnegative 2x2 least squares for each lambda on a log grid, then golden-section refinement.
inline EnvelopeFit fit_envelope(const std::vector<double>& t, const std::vector<double>& v,
                                const std::vector<double>& kap, double lambda_min = 1e-3, double lambda_max = 10.0) {
    if (t.size() != v.size() || t.size() != kap.size() || t.size() < 3) {
        throw Error(ErrorCode::InsufficientData, "envelope fit needs >= 3 aligned samples");
    }
    auto solve_for = [&](double lambda) {
        // Rows scaled by 1/v so the objective is the relative error.
        double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
        const std::size_t n = t.size();
        std::vector<double> e(n), k(n);
        for (std::size_t i = 0; i < n; ++i) {
            e[i] = std::exp(-lambda * t[i]) / v[i];
            k[i] = kap[i] / v[i];
            s11 += e[i] * e[i];
            s12 += e[i] * k[i];
            s22 += k[i] * k[i];
            b1 += e[i];
            b2 += k[i];
        }
        auto cost = [&](double A, double B) {
            double c = 0.0;
            for (std::size_t i = 0; i < n; ++i) c += (A * e[i] + B * k[i] - 1.0) * (A * e[i] + B * k[i] - 1.0);
            return std::sqrt(c / static_cast<double>(n));
        };
        EnvelopeFit best{0, 0, lambda, cost(0, 0)};
        const double det = s11 * s22 - s12 * s12;
        if (det > 0.0) {
            const double A = (b1 * s22 - b2 * s12) / det, B = (s11 * b2 - s12 * b1) / det;
            if (A >= 0.0 && B >= 0.0) {
                const double c = cost(A, B);
                if (c < best.residual) best = {A, B, lambda, c};
            }
        }
        if (s11 > 0.0 && b1 > 0.0) {
            const double c = cost(b1 / s11, 0.0);
            if (c < best.residual) best = {b1 / s11, 0.0, lambda, c};
        }
        if (s22 > 0.0 && b2 > 0.0) {
            const double c = cost(0.0, b2 / s22);
            if (c < best.residual) best = {0.0, b2 / s22, lambda, c};
        }
        return best;
    };
    const int samples = 241;
    EnvelopeFit best{};
    best.residual = std::numeric_limits<double>::infinity();
    int best_i = 0;
    const double la = std::log(lambda_min), lb = std::log(lambda_max);
    for (int i = 0; i < samples; ++i) {
        const EnvelopeFit f = solve_for(std::exp(la + (lb - la) * i / (samples - 1)));
        if (f.residual < best.residual) {
            best = f;
            best_i = i;
        }
    }
    double a = la + (lb - la) * std::max(0, best_i - 1) / (samples - 1);
    double b = la + (lb - la) * std::min(samples - 1, best_i + 1) / (samples - 1);
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 60; ++it) {
        const double c = b - phi * (b - a), d = a + phi * (b - a);
        if (solve_for(std::exp(c)).residual < solve_for(std::exp(d)).residual) b = d;
        else a = c;
    }
    const EnvelopeFit refined = solve_for(std::exp(0.5 * (a + b)));
    return refined.residual < best.residual ? refined : best;
}

// ---------------------------------------------------------------------------------------------
// Perturbed two-wall data

struct PerturbationSpec {
    std::uint64_t seed = 1;
    double delta = 1e-2;     // target ||m0 - P||_{H1}
    int bumps_per_wall = 3;
    double spread = 3.0;     // bump centers within +-spread of each wall
    int sign = 1;            // -1 flips the tangent direction of the same bumps
};

/// Seeded Gaussian bumps along the (n*, p*) frame of both walls, made tangent to the unit profile
/// and renormalized; the amplitude is tuned so that ||m0 - P||_{H1} = delta.
inline SpinField perturbed_two_wall(const Gauge& gp, const Gauge& gm, const ModelParams& params, const Grid1D& grid,
                                    const PerturbationSpec& spec, const WallPair& pair = {}) {
    const Field3 P = two_wall_profile(gp, gm, params, grid, pair);
    Field3 base(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) base[i] = normalized(P[i]);
    Field3 u(grid.n);
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> width(1.0, 3.0);
    for (int wall_index = 0; wall_index < 2; ++wall_index) {
        const Gauge& g = wall_index == 0 ? gp : gm;
        const AnalyticWall wall(wall_index == 0 ? pair.plus() : pair.minus(), params);
        for (int b = 0; b < spec.bumps_per_wall; ++b) {
            const double c = g.y + spec.spread * unit(rng);
            const double s = width(rng);
            const double an = unit(rng), ap = unit(rng);
            for (std::size_t i = 0; i < grid.n; ++i) {
                const double x = grid.x(i);
                const double bump = std::exp(-0.5 * (x - c) * (x - c) / (s * s));
                if (bump < 1e-300) continue;
                const WallFrame f = wall.frame(x - g.y);
                u[i] += bump * (an * rotate_e1(f.n, g.phi) + ap * rotate_e1(f.p, g.phi));
            }
        }
    }
    for (std::size_t i = 0; i < grid.n; ++i) u[i] = static_cast<double>(spec.sign) * (u[i] - dot(u[i], base[i]) * base[i]);
    auto build = [&](double s) {
        Field3 m(grid.n);
        for (std::size_t i = 0; i < grid.n; ++i) m[i] = normalized(base[i] + s * u[i]);
        return m;
    };
    auto distance = [&](const Field3& m) {
        Field3 d(grid.n);
        for (std::size_t i = 0; i < grid.n; ++i) d[i] = m[i] - P[i];
        return sobolev_norm(d, grid, NormOrder::H1);
    };
    if (spec.delta <= 0.0) return SpinField::project(grid, base);
    const double un = sobolev_norm(u, grid, NormOrder::H1);
    if (!(un > 0.0)) throw Error(ErrorCode::ValidationError, "perturbation vanished");
    // Secant iteration on s for ||m(s) - P|| = delta.
    double s0 = 0.0, f0 = distance(base) - spec.delta;
    double s1 = spec.delta / un, f1 = distance(build(s1)) - spec.delta;
    for (int it = 0; it < 30 && std::abs(f1) > 1e-12 * spec.delta; ++it) {
        const double s2 = s1 - f1 * (s1 - s0) / (f1 - f0);
        s0 = s1;
        f0 = f1;
        s1 = s2;
        f1 = distance(build(s1)) - spec.delta;
    }
    return SpinField::project(grid, build(s1));
}

// ---------------------------------------------------------------------------------------------
// Two-wall stability experiment

struct TwoWallConfig {
    double alpha = 0.5;
    double gamma = 0.6;
    AppliedField field = AppliedField::constant(-0.05);
    double L = 25.0;            // initial walls at y = +-L
    PerturbationSpec perturbation{};
    double half_width = 80.0;   // grid on [-half_width, half_width]
    std::size_t n = 8001;
    double t_end = 25.0;
    double cfl = 0.4;
    Scheme scheme = Scheme::Rk4Project;
    Boundary boundary = Boundary::Neumann;
    double snapshot_interval = 0.25;
    std::optional<double> kappa_lambda{};  // default alpha * calibrated lambda0
    WallPair pair{};
    double tail_fraction = 0.25;

    ModelParams params() const { return ModelParams(alpha, gamma, field); }
    Grid1D grid() const { return Grid1D::symmetric(half_width, n); }
};

struct StabilityReport {
    std::vector<double> times;
    std::vector<double> eps_h1, eps_h2, kappa;
    std::vector<double> y_plus, phi_plus, y_minus, phi_minus;
    std::vector<double> offset_y_plus, offset_phi_plus, offset_y_minus, offset_phi_minus;  // g - g*
    EnvelopeFit envelope{};
    std::optional<DecayFit> decay{};
    double kappa_lambda = 0.0;
    Gauge limit_plus{}, limit_minus{};
    double tail_plus = 0.0, tail_minus = 0.0;  // Cauchy tail sup over the final window
    double max_ortho_residual = 0.0;
    double gauge_velocity_constant = 0.0;      // max |g' - g*'| / (||eps||_H1 + q(y+ - y-))
    bool blowup = false;
    std::optional<std::size_t> decomposition_failed_at{};
    std::string error;

    bool stable() const { return !blowup && !decomposition_failed_at && error.empty(); }
    bool decays() const { return envelope.lambda > 0.0; }
};

/// Sup over the final window of |(g - g*)(t) - (g - g*)(t_end)|, in the quotient distance.
inline double cauchy_tail(const std::vector<double>& t, const std::vector<double>& y, const std::vector<double>& phi,
                          double fraction) {
    if (t.empty()) return std::numeric_limits<double>::infinity();
    const double start = t.back() - fraction * (t.back() - t.front());
    double worst = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] + 1e-12 < start) continue;
        worst = std::max(worst, gauge_norm({y[k] - y.back(), phi[k] - phi.back()}));
    }
    return worst;
}

/// Runs the flow from m0, decomposes every snapshot, and fits the remainder envelope.
inline StabilityReport analyze_two_wall_run(const SpinField& m0, const TwoWallConfig& cfg, Trajectory* keep = nullptr) {
    const ModelParams params = cfg.params();
    const Grid1D& grid = m0.grid();
    StabilityReport rep;
    SimConfig sim;
    sim.t_end = cfg.t_end;
    sim.cfl = cfg.cfl;
    sim.scheme = cfg.scheme;
    sim.boundary = cfg.boundary;
    sim.snapshot_stride =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.snapshot_interval / sim.time_step(grid))));
    Trajectory traj;
    try {
        run_into(traj, m0, params, sim);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::Blowup && e.code() != ErrorCode::NanDetected) throw;
        rep.blowup = true;
        rep.error = e.what();
    }
    TrajectoryDecompositionOptions dopt;
    dopt.modulation.pair = cfg.pair;
    const DecompositionSeries dec =
        decompose_trajectory(traj, params, {cfg.L, 0.0}, {-cfg.L, 0.0}, dopt);
    rep.decomposition_failed_at = dec.failed_at;
    rep.times = dec.times;
    rep.eps_h1 = dec.column("eps_h1");
    rep.eps_h2 = dec.column("eps_h2");
    rep.y_plus = dec.column("y_plus");
    rep.phi_plus = dec.column("phi_plus");
    rep.y_minus = dec.column("y_minus");
    rep.phi_minus = dec.column("phi_minus");
    for (const auto& s : dec.states) rep.max_ortho_residual = std::max(rep.max_ortho_residual, max_abs(s.ortho_residual));
    for (std::size_t k = 0; k < rep.times.size(); ++k) {
        const Gauge sp = precessing_gauge(cfg.pair.plus(), params, rep.times[k]);
        const Gauge sm = precessing_gauge(cfg.pair.minus(), params, rep.times[k]);
        rep.offset_y_plus.push_back(rep.y_plus[k] - sp.y);
        rep.offset_phi_plus.push_back(rep.phi_plus[k] - sp.phi);
        rep.offset_y_minus.push_back(rep.y_minus[k] - sm.y);
        rep.offset_phi_minus.push_back(rep.phi_minus[k] - sm.phi);
    }
    if (!rep.times.empty()) {
        rep.limit_plus = {rep.offset_y_plus.back(), rep.offset_phi_plus.back()};
        rep.limit_minus = {rep.offset_y_minus.back(), rep.offset_phi_minus.back()};
        rep.tail_plus = cauchy_tail(rep.times, rep.offset_y_plus, rep.offset_phi_plus, cfg.tail_fraction);
        rep.tail_minus = cauchy_tail(rep.times, rep.offset_y_minus, rep.offset_phi_minus, cfg.tail_fraction);
    }
    const GaugeVelocityResidual gv = gauge_velocity_residual(dec, params, cfg.pair);
    for (std::size_t k = 0; k < gv.times.size(); ++k) {
        const double denom = rep.eps_h1[k] + q_interaction(rep.y_plus[k] - rep.y_minus[k], params.Gamma());
        rep.gauge_velocity_constant = std::max(rep.gauge_velocity_constant, std::max(gv.plus[k], gv.minus[k]) / denom);
    }
    if (cfg.kappa_lambda) {
        rep.kappa_lambda = *cfg.kappa_lambda;
    } else {
        const Grid1D og = Grid1D::symmetric(40.0 / params.Gamma(), 2001);
        rep.kappa_lambda = params.alpha() * calibrated_lambda0(assemble_L(params, og));
    }
    rep.kappa = kappa_series(rep.times, InteractionSpec{rep.kappa_lambda}, params);
    if (rep.times.size() >= 3) rep.envelope = fit_envelope(rep.times, rep.eps_h1, rep.kappa);
    try {
        rep.decay = fit_decay_rate(rep.times, rep.eps_h1, 0.0);
    } catch (const Error&) {
        rep.decay.reset();
    }
    if (keep) *keep = std::move(traj);
    return rep;
}

inline StabilityReport run_two_wall_experiment(const TwoWallConfig& cfg, Trajectory* keep = nullptr) {
    const ModelParams params = cfg.params();
    const Grid1D grid = cfg.grid();
    const SpinField m0 = perturbed_two_wall({cfg.L, 0.0}, {-cfg.L, 0.0}, params, grid, cfg.perturbation, cfg.pair);
    return analyze_two_wall_run(m0, cfg, keep);
}

// ---------------------------------------------------------------------------------------------
// Coercivity sandwich

struct CoercivityConfig {
    double alpha = 0.5;
    double gamma = 0.6;
    double L = 25.0;
    double half_width = 60.0;
    std::size_t n = 6001;
    std::vector<double> amplitudes{};  // default: 13 log-spaced values in [1e-4, 1e-1]
    std::uint64_t seed = 7;
    std::optional<double> R{};         // default L / 2
    WallPair pair{};

    ModelParams params() const { return ModelParams(alpha, gamma, AppliedField::constant(0.0)); }
};

struct CoercivityReport {
    std::vector<double> amplitudes, excess, eps_h1_sq, ratio;
    double reference_single = 0.0;  // discrete E(w*) on the same grid
    double slope = 0.0;             // mean of excess / ||eps||^2
    double lower = 0.0, upper = 0.0;
    double tail_correction = 0.0;   // e^{2 Gamma (R - y+)} + e^{2 Gamma (R + y-)}
    double zero_perturbation_excess = 0.0;
};

inline std::vector<double> default_amplitudes() {
    std::vector<double> a;
    for (int i = 0; i <= 12; ++i) a.push_back(std::pow(10.0, -4.0 + 3.0 * i / 12.0));
    return a;
}

inline CoercivityReport coercivity_experiment(const CoercivityConfig& cfg) {
    const ModelParams params = cfg.params();
    const Grid1D grid = Grid1D::symmetric(cfg.half_width, cfg.n);
    const Gauge gp{cfg.L, 0.0}, gm{-cfg.L, 0.0};
    CoercivityReport rep;
    rep.reference_single = energy_total(wall_profile(cfg.pair.plus(), params, grid), params).total;
    const double R = cfg.R.value_or(cfg.L / 2.0);
    const double G = params.Gamma();
    rep.tail_correction = std::exp(2.0 * G * (R - gp.y)) + std::exp(2.0 * G * (R + gm.y));
    {
        const Field3 P = two_wall_profile(gp, gm, params, grid, cfg.pair);
        Field3 m(grid.n);
        for (std::size_t i = 0; i < grid.n; ++i) m[i] = normalized(P[i]);
        rep.zero_perturbation_excess = energy_total(m, grid, params).total - 2.0 * rep.reference_single;
    }
    const auto amps = cfg.amplitudes.empty() ? default_amplitudes() : cfg.amplitudes;
    rep.lower = std::numeric_limits<double>::infinity();
    rep.upper = -std::numeric_limits<double>::infinity();
    // The sampled wall is a critical point only up to O(dx^2), which adds a term linear in the
    // perturbation; averaging the +a and -a runs removes it together with all odd orders.
    for (double a : amps) {
        double excess = 0.0, e2 = 0.0;
        for (int sign : {1, -1}) {
            PerturbationSpec ps;
            ps.seed = cfg.seed;
            ps.delta = a;
            ps.sign = sign;
            const SpinField m = perturbed_two_wall(gp, gm, params, grid, ps, cfg.pair);
            ModulationOptions mo;
            mo.pair = cfg.pair;
            const ModulationState st = decompose_static(m, gp, gm, params, mo);
            if (!st.converged) {
                throw Error(ErrorCode::NoConvergence, "coercivity decomposition failed at a=" + std::to_string(a));
            }
            excess += 0.5 * (energy_total(m, params).total - 2.0 * rep.reference_single);
            e2 += 0.5 * st.eps_h1 * st.eps_h1;
        }
        rep.amplitudes.push_back(a);
        rep.excess.push_back(excess);
        rep.eps_h1_sq.push_back(e2);
        rep.ratio.push_back(excess / e2);
        rep.lower = std::min(rep.lower, excess / e2);
        rep.upper = std::max(rep.upper, excess / e2);
    }
    double s = 0.0;
    for (double r : rep.ratio) s += r;
    rep.slope = s / static_cast<double>(rep.ratio.size());
    return rep;
}

// ---------------------------------------------------------------------------------------------
// Dissipation inequality

struct DissipationConfig {
    TwoWallConfig run{};
    double window_fraction = 0.05;  // use times with ||eps||_H1 >= fraction * ||eps(0)||_H1
    std::optional<double> R{};

    DissipationConfig() {
        run.field = AppliedField::constant(0.0);
        run.half_width = 60.0;
        run.n = 3001;
        run.t_end = 4.0;
        run.snapshot_interval = 0.05;
    }
};

struct DissipationReport {
    std::vector<double> times, dEdt, eps_h1, eps_h2, envelope;
    std::vector<double> env_field, env_cubic, env_tails, env_q;  // individual envelope terms
    double c_fit = 0.0;          // largest c with dE/dt + c ||eps||_H2^2 <= envelope on the window
    double max_dEdt = 0.0;       // for h = 0 this must be <= scheme tolerance
    double largest_violation = 0.0;  // max(dE/dt - envelope); <= 0 means none
    std::size_t window = 0;
};

inline DissipationReport dissipation_experiment(const DissipationConfig& cfg) {
    const ModelParams params = cfg.run.params();
    Trajectory traj;
    const StabilityReport st = run_two_wall_experiment(cfg.run, &traj);
    if (!st.stable()) throw Error(ErrorCode::Blowup, "dissipation run unstable: " + st.error);
    const auto& E = traj.series.at("energy");
    DissipationReport rep;
    const double G = params.Gamma();
    const double R = cfg.R.value_or(cfg.run.L / 2.0);
    const double eps0 = st.eps_h1.front();
    rep.c_fit = std::numeric_limits<double>::infinity();
    rep.largest_violation = -std::numeric_limits<double>::infinity();
    rep.max_dEdt = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k + 1 < st.times.size(); ++k) {
        const double dEdt = (E[k + 1] - E[k - 1]) / (traj.times[k + 1] - traj.times[k - 1]);
        const double e1 = st.eps_h1[k], e2 = st.eps_h2[k];
        const double yp = st.y_plus[k], ym = st.y_minus[k];
        const double f = std::abs(params.h(st.times[k])) * e1 * e1;
        const double c3 = e1 * e2 * e2;
        const double tails = std::exp(2.0 * G * (R - yp)) + std::exp(2.0 * G * (R + ym));
        const double q = q_interaction(yp - ym, G);
        const double env = f + c3 + tails + q;
        rep.times.push_back(st.times[k]);
        rep.dEdt.push_back(dEdt);
        rep.eps_h1.push_back(e1);
        rep.eps_h2.push_back(e2);
        rep.env_field.push_back(f);
        rep.env_cubic.push_back(c3);
        rep.env_tails.push_back(tails);
        rep.env_q.push_back(q);
        rep.envelope.push_back(env);
        rep.max_dEdt = std::max(rep.max_dEdt, dEdt);
        rep.largest_violation = std::max(rep.largest_violation, dEdt - env);
        if (e1 >= cfg.window_fraction * eps0) {
            rep.c_fit = std::min(rep.c_fit, (env - dEdt) / (e2 * e2));
            ++rep.window;
        }
    }
    if (rep.window == 0) throw Error(ErrorCode::InsufficientData, "no snapshot inside the dissipation window");
    return rep;
}

}  // namespace dwallsim

#endif  // DWALLSIM_HARNESS_HPP
