#ifndef DWALLSIM_ENERGY_HPP
#define DWALLSIM_ENERGY_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "dwallsim/calculus.hpp"
#include "dwallsim/cutoff.hpp"
#include "dwallsim/error.hpp"
#include "dwallsim/field.hpp"
#include "dwallsim/params.hpp"
#include "dwallsim/trajectory.hpp"
#include "dwallsim/vec3.hpp"

namespace dwallsim {

struct EnergyReport {
    double total = 0.0;
    double exchange = 0.0;
    double dmi = 0.0;
    double anisotropy = 0.0;
    double localized_plus = 0.0;
    double localized_minus = 0.0;
};

/// Node-wise integrand (1/2)(|m'|^2 + 2 gamma m'.(e1^m) + 1 - m1^2), split by term.
struct EnergyDensity {
    std::vector<double> exchange;
    std::vector<double> dmi;
    std::vector<double> anisotropy;

    std::vector<double> total() const {
        std::vector<double> out(exchange.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = exchange[i] + dmi[i] + anisotropy[i];
        return out;
    }
};

inline EnergyDensity energy_density(std::span<const Vec3> m, const Grid1D& grid, const ModelParams& params) {
    const auto dm = diff1(m, grid);
    EnergyDensity d;
    d.exchange.resize(m.size());
    d.dmi.resize(m.size());
    d.anisotropy.resize(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        d.exchange[i] = 0.5 * norm2(dm[i]);
        d.dmi[i] = params.gamma() * dot(dm[i], e1_cross(m[i]));
        d.anisotropy[i] = 0.5 * (1.0 - m[i].x * m[i].x);
    }
    return d;
}

/// E_gamma(m) by trapezoid quadrature. With a cutoff, localized_plus integrates against psi
/// and localized_minus against its complement; without one the split is (E, 0).
inline EnergyReport energy_total(std::span<const Vec3> m, const Grid1D& grid, const ModelParams& params,
                                 const Cutoff* plus = nullptr) {
    const EnergyDensity d = energy_density(m, grid, params);
    EnergyReport r;
    r.exchange = integrate(d.exchange, grid);
    r.dmi = integrate(d.dmi, grid);
    r.anisotropy = integrate(d.anisotropy, grid);
    const auto density = d.total();
    r.total = integrate(density, grid);
    if (plus != nullptr) {
        r.localized_plus = integrate(density, grid, plus->psi());
        r.localized_minus = integrate(density, grid, plus->complement().psi());
    } else {
        r.localized_plus = r.total;
        r.localized_minus = 0.0;
    }
    return r;
}

inline EnergyReport energy_total(const SpinField& m, const ModelParams& params, const Cutoff* plus = nullptr) {
    return energy_total(m.values(), m.grid(), params, plus);
}

/// Localized energy ∫ e(m) psi dx for an arbitrary weight.
inline double localized_energy(std::span<const Vec3> m, const Grid1D& grid, const ModelParams& params,
                               const Cutoff& cutoff) {
    return integrate(energy_density(m, grid, params).total(), grid, cutoff.psi());
}

/// deltaE(m) = -m'' - 2 gamma e1^m' + m2 e2 + m3 e3.
inline Field3 energy_variation(std::span<const Vec3> m, const Grid1D& grid, const ModelParams& params) {
    const auto d1 = diff1(m, grid);
    const auto d2 = diff2(m, grid);
    Field3 out(m.size());
    const double two_gamma = 2.0 * params.gamma();
    for (std::size_t i = 0; i < m.size(); ++i) {
        out[i] = -d2[i] - two_gamma * e1_cross(d1[i]) + Vec3{0.0, m[i].y, m[i].z};
    }
    return out;
}

/// H(m) = -deltaE(m) + h(t) e1.
inline Field3 effective_field(std::span<const Vec3> m, const Grid1D& grid, const ModelParams& params, double t) {
    Field3 H = energy_variation(m, grid, params);
    const double h = params.h(t);
    for (auto& v : H) v = Vec3{h - v.x, -v.y, -v.z};
    return H;
}

namespace detail {
inline std::vector<double> dissipation_density(std::span<const Vec3> m, std::span<const Vec3> dE) {
    std::vector<double> out(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double proj = dot(m[i], dE[i]);
        out[i] = norm2(dE[i]) - proj * proj;
    }
    return out;
}

inline std::vector<double> forcing_density(std::span<const Vec3> m, std::span<const Vec3> dE) {
    std::vector<double> out(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) out[i] = dot(cross(m[i], kE1), cross(m[i], dE[i]));
    return out;
}
}  // namespace detail

/// D = ∫ |deltaE|^2 - (m.deltaE)^2, optionally weighted by a cutoff (giving D+ or D-).
inline double dissipation_D(std::span<const Vec3> m, const Grid1D& grid, const ModelParams& params,
                            const Cutoff* cutoff = nullptr) {
    const Field3 dE = energy_variation(m, grid, params);
    const auto density = detail::dissipation_density(m, dE);
    return cutoff ? integrate(density, grid, cutoff->psi()) : integrate(density, grid);
}

/// F = ∫ (m^e1).(m^deltaE), optionally weighted by a cutoff (giving F+ or F-).
inline double forcing_F(std::span<const Vec3> m, const Grid1D& grid, const ModelParams& params,
                        const Cutoff* cutoff = nullptr) {
    const Field3 dE = energy_variation(m, grid, params);
    const auto density = detail::forcing_density(m, dE);
    return cutoff ? integrate(density, grid, cutoff->psi()) : integrate(density, grid);
}

/// E, D and F from one evaluation of deltaE.
struct EnergyBudget {
    double energy = 0.0;
    double dissipation = 0.0;
    double forcing = 0.0;
};

inline EnergyBudget energy_budget(std::span<const Vec3> m, const Grid1D& grid, const ModelParams& params) {
    const Field3 dE = energy_variation(m, grid, params);
    return {integrate(energy_density(m, grid, params).total(), grid),
            integrate(detail::dissipation_density(m, dE), grid), integrate(detail::forcing_density(m, dE), grid)};
}

struct BalanceResidual {
    std::vector<double> times;     // interior snapshot times
    std::vector<double> residual;  // dE/dt + alpha D - alpha h F
    double max_abs = 0.0;
};

/// Residual of dE/dt = -alpha D + alpha h F along a uniformly sampled trajectory, with dE/dt
/// taken by centered differences of the energy series.
inline BalanceResidual energy_balance_residual(const Trajectory& traj, const ModelParams& params) {
    if (traj.size() < 3) throw Error(ErrorCode::TrajectoryTooShort, "energy balance needs >= 3 snapshots");
    std::vector<EnergyBudget> budget;
    budget.reserve(traj.size());
    for (const auto& snap : traj.snapshots) budget.push_back(energy_budget(snap.values(), snap.grid(), params));
    BalanceResidual out;
    for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
        const double dt = traj.times[k + 1] - traj.times[k - 1];
        const double dEdt = (budget[k + 1].energy - budget[k - 1].energy) / dt;
        const double t = traj.times[k];
        const double r = dEdt + params.alpha() * budget[k].dissipation -
                         params.alpha() * params.h(t) * budget[k].forcing;
        out.times.push_back(t);
        out.residual.push_back(r);
        out.max_abs = std::max(out.max_abs, std::abs(r));
    }
    return out;
}

}  // namespace dwallsim

#endif  // DWALLSIM_ENERGY_HPP
