#ifndef DWALLSIM_TWO_WALL_HPP
#define DWALLSIM_TWO_WALL_HPP

#include "dwallsim/field.hpp"
#include "dwallsim/gauge.hpp"
#include "dwallsim/wall.hpp"

namespace dwallsim {

/// Sign choices for the pair: w+ = w*^(1, sigma2_plus), w- = w*^(-1, sigma2_minus).
struct WallPair {
    int sigma2_plus = 1;
    int sigma2_minus = 1;

    WallSign plus() const { return WallSign(1, sigma2_plus); }
    WallSign minus() const { return WallSign(-1, sigma2_minus); }
};

/// P(x) = g+.w+(x) + g-.w-(x) + e1, which is close to -e1 between the walls and e1 outside.
struct TwoWallProfile {
    AnalyticWall plus;
    AnalyticWall minus;
    Gauge g_plus;
    Gauge g_minus;

    TwoWallProfile(const Gauge& gp, const Gauge& gm, const ModelParams& params, const WallPair& pair = {})
        : plus(pair.plus(), params), minus(pair.minus(), params), g_plus(gp), g_minus(gm) {}

    Vec3 operator()(double x) const {
        return gauged(g_plus, plus)(x) + gauged(g_minus, minus)(x) + kE1;
    }
};

/// True when the walls sit in the configuration the decomposition expects (y+ > 0 > y-).
inline bool walls_ordered(const Gauge& gp, const Gauge& gm) { return gp.y > 0.0 && 0.0 > gm.y; }

/// Superposition sampled on the grid; not unit-norm away from the far-separation limit.
inline Field3 two_wall_profile(const Gauge& gp, const Gauge& gm, const ModelParams& params, const Grid1D& grid,
                               const WallPair& pair = {}) {
    return sample(TwoWallProfile(gp, gm, params, pair), grid);
}

}  // namespace dwallsim

#endif  // DWALLSIM_TWO_WALL_HPP
