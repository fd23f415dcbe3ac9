#ifndef DWALLSIM_PARAMS_HPP
#define DWALLSIM_PARAMS_HPP

#include <cmath>
#include <string>
#include <utility>

#include "dwallsim/applied_field.hpp"
#include "dwallsim/error.hpp"

namespace dwallsim {

/// Damping alpha > 0, DMI strength |gamma| < 1 and the applied field h(t).
class ModelParams {
public:
    ModelParams() = default;

    ModelParams(double alpha, double gamma, AppliedField field = AppliedField::constant(0.0))
        : alpha_(alpha), gamma_(gamma), field_(std::move(field)) {
        if (!(alpha > 0.0) || !std::isfinite(alpha)) {
            throw Error(ErrorCode::ValidationError, "alpha must be positive");
        }
        if (!(std::abs(gamma) < 1.0)) {
            throw Error(ErrorCode::ValidationError, "gamma must satisfy |gamma| < 1");
        }
        Gamma_ = std::sqrt((1.0 - gamma) * (1.0 + gamma));
    }

    double alpha() const { return alpha_; }
    double gamma() const { return gamma_; }
    /// sqrt(1 - gamma^2)
    double Gamma() const { return Gamma_; }
    const AppliedField& field() const { return field_; }
    double h(double t) const { return field_(t); }

    ModelParams with_field(AppliedField field) const {
        ModelParams p = *this;
        p.field_ = std::move(field);
        return p;
    }

    ModelParams with_gamma(double gamma) const { return ModelParams(alpha_, gamma, field_); }

private:
    double alpha_ = 0.5;
    double gamma_ = 0.0;
    double Gamma_ = 1.0;
    AppliedField field_ = AppliedField::constant(0.0);
};

/// Sign pair (sigma1, sigma2) selecting one of the four wall profiles.
class WallSign {
public:
    constexpr WallSign() = default;
    WallSign(int s1, int s2) : s1_(s1), s2_(s2) {
        if ((s1 != 1 && s1 != -1) || (s2 != 1 && s2 != -1)) {
            throw Error(ErrorCode::ValidationError, "wall signs must be +1 or -1");
        }
    }
    constexpr int s1() const { return s1_; }
    constexpr int s2() const { return s2_; }

    friend constexpr bool operator==(const WallSign&, const WallSign&) = default;

private:
    int s1_ = 1;
    int s2_ = 1;
};

}  // namespace dwallsim

#endif  // DWALLSIM_PARAMS_HPP
