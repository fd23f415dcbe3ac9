#ifndef DWALLSIM_INTEGRATOR_HPP
#define DWALLSIM_INTEGRATOR_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dwallsim/calculus.hpp"
#include "dwallsim/energy.hpp"
#include "dwallsim/error.hpp"
#include "dwallsim/field.hpp"
#include "dwallsim/parallel.hpp"
#include "dwallsim/params.hpp"
#include "dwallsim/trajectory.hpp"
#include "dwallsim/vec3.hpp"

namespace dwallsim {

enum class Scheme { Rk4Project, HeunProject };
enum class Boundary { Neumann, ClampE1 };

inline std::string to_string(Scheme s) { return s == Scheme::Rk4Project ? "RK4_PROJECT" : "HEUN_PROJECT"; }
inline std::string to_string(Boundary b) { return b == Boundary::Neumann ? "NEUMANN" : "CLAMP_E1"; }

struct SimConfig {
    double t_end = 1.0;
    std::optional<double> dt{};  // empty means cfl * dx^2
    double cfl = 0.2;
    Scheme scheme = Scheme::Rk4Project;
    Boundary boundary = Boundary::Neumann;
    std::size_t snapshot_stride = 100;
    bool record_series = true;

    double time_step(const Grid1D& grid) const { return dt ? *dt : cfl * grid.dx * grid.dx; }

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

/// Largest c such that dt = c dx^2 keeps the linearized flow d_t z = (alpha + i) z'' stable,
/// found by scanning the scheme's amplification factor along the stiff ray.
inline double stable_cfl_limit(Scheme scheme, double alpha) {
    auto amplification = [&](std::complex<double> z) {
        std::complex<double> g = 1.0 + z + z * z / 2.0;
        if (scheme == Scheme::Rk4Project) g += z * z * z / 6.0 + z * z * z * z / 24.0;
        return std::abs(g);
    };
    auto stable = [&](double c) {
        for (int k = 1; k <= 400; ++k) {
            const std::complex<double> z = -std::complex<double>(alpha, 1.0) * (4.0 * c * k / 400.0);
            if (amplification(z) > 1.0 + 1e-12) return false;
        }
        return true;
    };
    double lo = 0.0, hi = 2.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (stable(mid) ? lo : hi) = mid;
    }
    return lo;
}

/// Warning text when dt exceeds the configured cfl dx^2 or the scheme's stability limit.
inline std::optional<std::string> check_cfl(const SimConfig& cfg, const Grid1D& grid, const ModelParams& params) {
    const double dt = cfg.time_step(grid);
    const double c = dt / (grid.dx * grid.dx);
    if (cfg.dt && dt > cfg.cfl * grid.dx * grid.dx * (1.0 + 1e-12)) {
        return std::string(to_string(ErrorCode::CflViolation)) + ": dt=" + std::to_string(dt) + " exceeds cfl*dx^2=" +
               std::to_string(cfg.cfl * grid.dx * grid.dx);
    }
    const double limit = stable_cfl_limit(cfg.scheme, params.alpha());
    if (c > limit) {
        return std::string(to_string(ErrorCode::CflViolation)) + ": dt/dx^2=" + std::to_string(c) + " exceeds stability limit " +
               std::to_string(limit);
    }
    return std::nullopt;
}

/// m^H - alpha m^(m^H) with H = m'' + 2 gamma e1^m' - (0, m2, m3) + h(t) e1.
/// Neumann ends use mirrored ghosts; clamped ends do not move.
inline void llg_rhs_into(std::span<const Vec3> m, const Grid1D& grid, const ModelParams& params, double t,
                         Boundary boundary, std::span<Vec3> out) {
    require_min_points(grid, 3);
    const std::size_t n = m.size();
    const double inv_dx2 = 1.0 / (grid.dx * grid.dx);
    const double inv_2dx = 1.0 / (2.0 * grid.dx);
    const double two_gamma = 2.0 * params.gamma();
    const double alpha = params.alpha();
    const double h = params.h(t);
    auto node = [&](const Vec3& left, const Vec3& mi, const Vec3& right) {
        const Vec3 lap = (left + right - 2.0 * mi) * inv_dx2;
        const Vec3 d1 = (right - left) * inv_2dx;
        const Vec3 H{lap.x + h, lap.y - two_gamma * d1.z - mi.y, lap.z + two_gamma * d1.y - mi.z};
        const Vec3 mxH = cross(mi, H);
        return mxH - alpha * cross(mi, mxH);
    };
    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = std::max<std::size_t>(lo, 1); i < std::min(hi, n - 1); ++i) {
            out[i] = node(m[i - 1], m[i], m[i + 1]);
        }
    });
    if (boundary == Boundary::Neumann) {
        out[0] = node(m[1], m[0], m[1]);
        out[n - 1] = node(m[n - 2], m[n - 1], m[n - 2]);
    } else {
        out[0] = Vec3{};
        out[n - 1] = Vec3{};
    }
}

inline Field3 llg_rhs(std::span<const Vec3> m, const Grid1D& grid, const ModelParams& params, double t,
                      Boundary boundary = Boundary::Neumann) {
    Field3 out(m.size());
    llg_rhs_into(m, grid, params, t, boundary, out);
    return out;
}

inline Field3 llg_rhs(const SpinField& m, const ModelParams& params, double t,
                      Boundary boundary = Boundary::Neumann) {
    return llg_rhs(m.values(), m.grid(), params, t, boundary);
}

/// Reusable stage storage so long runs do not allocate per step.
class Stepper {
public:
    Stepper(const Grid1D& grid, const ModelParams& params, Scheme scheme, Boundary boundary)
        : grid_(grid), params_(params), scheme_(scheme), boundary_(boundary) {
        for (auto* v : {&k1_, &k2_, &k3_, &k4_, &tmp_}) v->resize(grid.n);
    }

    /// Advances m in place by dt and projects every node back onto the sphere.
    void advance(Field3& m, double t, double dt) {
        const std::size_t n = m.size();
        auto stage = [&](const Field3& base, const Field3& k, double c, Field3& dst) {
            for (std::size_t i = 0; i < n; ++i) dst[i] = base[i] + (c * dt) * k[i];
        };
        if (scheme_ == Scheme::Rk4Project) {
            llg_rhs_into(m, grid_, params_, t, boundary_, k1_);
            stage(m, k1_, 0.5, tmp_);
            llg_rhs_into(tmp_, grid_, params_, t + 0.5 * dt, boundary_, k2_);
            stage(m, k2_, 0.5, tmp_);
            llg_rhs_into(tmp_, grid_, params_, t + 0.5 * dt, boundary_, k3_);
            stage(m, k3_, 1.0, tmp_);
            llg_rhs_into(tmp_, grid_, params_, t + dt, boundary_, k4_);
            const double w = dt / 6.0;
            for (std::size_t i = 0; i < n; ++i) m[i] += w * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
        } else {
            llg_rhs_into(m, grid_, params_, t, boundary_, k1_);
            stage(m, k1_, 1.0, tmp_);
            llg_rhs_into(tmp_, grid_, params_, t + dt, boundary_, k2_);
            const double w = dt / 2.0;
            for (std::size_t i = 0; i < n; ++i) m[i] += w * (k1_[i] + k2_[i]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double r = norm(m[i]);
            if (!std::isfinite(r) || r == 0.0) {
                throw Error(ErrorCode::NanDetected, "non-finite value at node " + std::to_string(i) +
                                                        " after step at t=" + std::to_string(t));
            }
            m[i] = m[i] / r;
        }
    }

private:
    Grid1D grid_;
    ModelParams params_;
    Scheme scheme_;
    Boundary boundary_;
    Field3 k1_, k2_, k3_, k4_, tmp_;
};

inline SpinField step(const SpinField& m, const ModelParams& params, double t, double dt,
                      Scheme scheme = Scheme::Rk4Project, Boundary boundary = Boundary::Neumann) {
    if (!(dt > 0.0)) throw Error(ErrorCode::ValidationError, "dt must be positive");
    Field3 values = m.raw();
    Stepper(m.grid(), params, scheme, boundary).advance(values, t, dt);
    return SpinField::project(m.grid(), std::move(values));
}

/// Appends E, D, F and the script-H1 size at the latest snapshot.
inline void record_series(Trajectory& traj, const ModelParams& params) {
    const SpinField& m = traj.snapshots.back();
    const EnergyBudget b = energy_budget(m.values(), m.grid(), params);
    traj.series["energy"].push_back(b.energy);
    traj.series["dissipation"].push_back(b.dissipation);
    traj.series["forcing"].push_back(b.forcing);
    traj.series["h1_size"].push_back(script_h1_size(m.values(), m.grid()));
}

struct RunOptions {
    std::function<void(const std::string&)> warn{};
    /// Stop with BLOWUP once the script-H1 size exceeds this multiple of its initial value.
    double blowup_factor = 1e3;
};

/// Integrates from m0 to cfg.t_end into out, recording every snapshot_stride steps and the
/// final time. On NaN or blow-up the error propagates and out keeps the partial record.
inline void run_into(Trajectory& out, const SpinField& m0, const ModelParams& params, const SimConfig& cfg,
                     const RunOptions& opts = {}) {
    if (!(cfg.t_end > 0.0)) throw Error(ErrorCode::ValidationError, "t_end must be positive");
    if (cfg.snapshot_stride < 1) throw Error(ErrorCode::ValidationError, "snapshot_stride must be >= 1");
    const Grid1D& grid = m0.grid();
    if (auto w = check_cfl(cfg, grid, params); w && opts.warn) opts.warn(*w);
    const double dt_nominal = cfg.time_step(grid);
    const auto steps = static_cast<std::size_t>(std::ceil(cfg.t_end / dt_nominal - 1e-9));
    const double dt = cfg.t_end / static_cast<double>(steps);

    out = Trajectory{};
    out.record(0.0, m0);
    if (cfg.record_series) record_series(out, params);
    const double size0 = script_h1_size(m0.values(), grid);

    Field3 m = m0.raw();
    Stepper stepper(grid, params, cfg.scheme, cfg.boundary);
    for (std::size_t k = 1; k <= steps; ++k) {
        const double t = static_cast<double>(k - 1) * dt;
        stepper.advance(m, t, dt);
        if (k % cfg.snapshot_stride == 0 || k == steps) {
            out.record(static_cast<double>(k) * dt, SpinField::project(grid, m));
            if (cfg.record_series) {
                record_series(out, params);
                const double size = out.series["h1_size"].back();
                if (!std::isfinite(size) || size > opts.blowup_factor * std::max(size0, 1e-300)) {
                    throw Error(ErrorCode::Blowup, "script-H1 size " + std::to_string(size) + " at t=" +
                                                       std::to_string(out.times.back()));
                }
            }
        }
    }
}

inline Trajectory run(const SpinField& m0, const ModelParams& params, const SimConfig& cfg,
                      const RunOptions& opts = {}) {
    Trajectory traj;
    run_into(traj, m0, params, cfg, opts);
    return traj;
}

enum class BlowupStatus { Ok, Blowup };

struct BlowupReport {
    BlowupStatus status = BlowupStatus::Ok;
    std::optional<std::size_t> index{};  // first offending snapshot
    double max_ratio = 1.0;
};

/// Flags the first snapshot whose script-H1 size is non-finite or exceeds factor times the
/// initial size.
inline BlowupReport blowup_monitor(const Trajectory& traj, double factor = 1e3) {
    if (traj.empty()) throw Error(ErrorCode::TrajectoryTooShort, "blowup monitor needs a snapshot");
    std::vector<double> sizes;
    if (auto it = traj.series.find("h1_size"); it != traj.series.end() && it->second.size() == traj.size()) {
        sizes = it->second;
    } else {
        for (const auto& s : traj.snapshots) sizes.push_back(script_h1_size(s.values(), s.grid()));
    }
    BlowupReport r;
    const double base = std::max(sizes.front(), 1e-300);
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        bool finite = std::isfinite(sizes[k]);
        if (finite) {
            for (const auto& v : traj.snapshots[k].values()) {
                if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z)) {
                    finite = false;
                    break;
                }
            }
        }
        const double ratio = sizes[k] / base;
        if (finite) r.max_ratio = std::max(r.max_ratio, ratio);
        if (!finite || ratio > factor) {
            r.status = BlowupStatus::Blowup;
            r.index = k;
            return r;
        }
    }
    return r;
}

}  // namespace dwallsim

#endif  // DWALLSIM_INTEGRATOR_HPP
