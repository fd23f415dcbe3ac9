#ifndef DWALLSIM_CUTOFF_HPP
#define DWALLSIM_CUTOFF_HPP

#include <array>
#include <cmath>
#include <vector>

#include "dwallsim/calculus.hpp"
#include "dwallsim/error.hpp"
#include "dwallsim/field.hpp"

namespace dwallsim {

/// Degree-11 smoothstep S(u) = u^6 g(u), g(u) = sum_k C(5+k, k) (1-u)^k, on [0, 1], with the
/// square root u^3 sqrt(g(u)) and derivatives in u. g decreases from 462 to 1, so sqrt(S) is
/// C^{2,1}: its third derivative is bounded with a jump at u = 0. S(1 - u) = 1 - S(u).
struct SmoothstepJet {
    std::array<double, 3> s{};      // S, S', S''
    std::array<double, 4> root{};   // sqrt(S) and three derivatives
};

inline SmoothstepJet smoothstep_jet(double u) {
    SmoothstepJet j;
    if (u <= 0.0) return j;
    if (u >= 1.0) {
        j.s[0] = 1.0;
        j.root[0] = 1.0;
        return j;
    }
    const double v = 1.0 - u;
    const double u2 = u * u, u3 = u2 * u, u4 = u2 * u2;
    const double v2 = v * v, v4 = v2 * v2;
    const double g = 1.0 + v * (6.0 + v * (21.0 + v * (56.0 + v * (126.0 + v * 252.0))));
    const double gv = 6.0 + v * (42.0 + v * (168.0 + v * (504.0 + v * 1260.0)));
    const double gvv = 42.0 + v * (336.0 + v * (1512.0 + v * 5040.0));
    const double gvvv = 336.0 + v * (3024.0 + v * 15120.0);
    j.s[0] = u3 * u3 * g;
    j.s[1] = 2772.0 * u4 * u * v4 * v;
    j.s[2] = 13860.0 * u4 * v4 * (1.0 - 2.0 * u);

    const double g1 = -gv, g2 = gvv, g3 = -gvvv;
    const double r = std::sqrt(g);
    const double r1 = g1 / (2.0 * r);
    const double r2 = g2 / (2.0 * r) - g1 * g1 / (4.0 * r * r * r);
    const double r3 = g3 / (2.0 * r) - 3.0 * g1 * g2 / (4.0 * r * r * r) + 3.0 * g1 * g1 * g1 / (8.0 * std::pow(r, 5));
    j.root[0] = u3 * r;
    j.root[1] = 3.0 * u2 * r + u3 * r1;
    j.root[2] = 6.0 * u * r + 6.0 * u2 * r1 + u3 * r2;
    j.root[3] = 6.0 * r + 18.0 * u * r1 + 9.0 * u2 * r2 + u3 * r3;
    return j;
}

/// sup_x |S'((x+1)/2)/2| and sup |S''|/4: the unit-scale derivative bounds of psi.
inline double unit_cutoff_sup_derivative(int k) {
    // S' peaks at u = 1/2; |S''| at u = 1/3 and 2/3.
    if (k == 1) return (2772.0 / 1024.0) / 2.0;
    if (k == 2) return std::abs(smoothstep_jet(1.0 / 3.0).s[2]) / 4.0;
    return 0.0;
}

/// Tabulated localization psi_R(orientation (x - center)), built from psi(x) = S((x+1)/2):
/// zero left of center - R and one right of center + R for orientation +1.
class Cutoff {
public:
    Cutoff() = default;

    Cutoff(double R, double center, int orientation, const Grid1D& grid)
        : R_(R), center_(center), orientation_(orientation), grid_(grid) {
        if (!(R >= 1.0)) throw Error(ErrorCode::ValidationError, "cutoff scale R must be >= 1");
        if (orientation != 1 && orientation != -1) {
            throw Error(ErrorCode::ValidationError, "cutoff orientation must be +1 or -1");
        }
        const std::size_t n = grid.n;
        psi_.resize(n);
        dpsi_.resize(n);
        d2psi_.resize(n);
        for (auto* v : {&sqrt_psi_, &dsqrt_, &d2sqrt_, &d3sqrt_}) v->resize(n);
        const double du = orientation / (2.0 * R);  // du/dx
        for (std::size_t i = 0; i < n; ++i) {
            const double u = (orientation * (grid.x(i) - center) / R + 1.0) / 2.0;
            const SmoothstepJet j = smoothstep_jet(u);
            psi_[i] = j.s[0];
            dpsi_[i] = j.s[1] * du;
            d2psi_[i] = j.s[2] * du * du;
            sqrt_psi_[i] = j.root[0];
            dsqrt_[i] = j.root[1] * du;
            d2sqrt_[i] = j.root[2] * du * du;
            d3sqrt_[i] = j.root[3] * du * du * du;
        }
    }

    /// The partner cutoff 1 - psi (same center and scale, reversed orientation).
    Cutoff complement() const { return Cutoff(R_, center_, -orientation_, grid_); }

    double R() const { return R_; }
    double center() const { return center_; }
    int orientation() const { return orientation_; }
    const Grid1D& grid() const { return grid_; }

    const std::vector<double>& psi() const { return psi_; }
    const std::vector<double>& dpsi() const { return dpsi_; }
    const std::vector<double>& d2psi() const { return d2psi_; }
    const std::vector<double>& sqrt_psi() const { return sqrt_psi_; }
    const std::vector<double>& dsqrt_psi() const { return dsqrt_; }
    const std::vector<double>& d2sqrt_psi() const { return d2sqrt_; }
    const std::vector<double>& d3sqrt_psi() const { return d3sqrt_; }

    /// Interval carrying the transition of psi, i.e. the support of its derivative.
    Interval transition() const { return {center_ - R_, center_ + R_}; }

private:
    double R_ = 1.0;
    double center_ = 0.0;
    int orientation_ = 1;
    Grid1D grid_{};
    std::vector<double> psi_, dpsi_, d2psi_, sqrt_psi_, dsqrt_, d2sqrt_, d3sqrt_;
};

inline Cutoff make_cutoff(double R, double center, int orientation, const Grid1D& grid) {
    return Cutoff(R, center, orientation, grid);
}

}  // namespace dwallsim

#endif  // DWALLSIM_CUTOFF_HPP
