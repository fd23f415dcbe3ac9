#ifndef DWALLSIM_APPLIED_FIELD_HPP
#define DWALLSIM_APPLIED_FIELD_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dwallsim/error.hpp"

namespace dwallsim {

/// Composite Simpson rule on [a, b] with an even number of panels.
template <class Fn>
double simpson(const Fn& f, double a, double b, int panels) {
    if (panels < 2) panels = 2;
    if (panels % 2 != 0) ++panels;
    const double h = (b - a) / panels;
    double acc = f(a) + f(b);
    for (int k = 1; k < panels; ++k) acc += (k % 2 == 1 ? 4.0 : 2.0) * f(a + k * h);
    return acc * h / 3.0;
}

/// Time profile h(t) of the applied field along e1.
///
/// Constant and piecewise-constant profiles are integrated exactly; ramps (piecewise
/// linear through the breakpoints, held constant outside) and custom callables go through
/// composite Simpson, which is exact for the ramp segments.
class AppliedField {
public:
    enum class Kind { Constant, Piecewise, Ramp, Custom };

    struct Breakpoint {
        double t;
        double h;
        friend bool operator==(const Breakpoint&, const Breakpoint&) = default;
    };

    AppliedField() = default;

    static AppliedField constant(double h) {
        AppliedField f;
        f.kind_ = Kind::Constant;
        f.points_ = {{0.0, h}};
        return f;
    }

    /// h(t) = h_k on [t_k, t_{k+1}), zero before the first breakpoint.
    static AppliedField piecewise(std::vector<Breakpoint> points) {
        validate_points(points, 1);
        AppliedField f;
        f.kind_ = Kind::Piecewise;
        f.points_ = std::move(points);
        return f;
    }

    static AppliedField ramp(std::vector<Breakpoint> points) {
        validate_points(points, 2);
        AppliedField f;
        f.kind_ = Kind::Ramp;
        f.points_ = std::move(points);
        return f;
    }

    static AppliedField custom(std::function<double(double)> fn, int panels_per_unit = 200) {
        AppliedField f;
        f.kind_ = Kind::Custom;
        f.custom_ = std::move(fn);
        f.panels_per_unit_ = panels_per_unit;
        return f;
    }

    Kind kind() const { return kind_; }
    const std::vector<Breakpoint>& points() const { return points_; }

    double operator()(double t) const {
        switch (kind_) {
            case Kind::Constant: return points_.front().h;
            case Kind::Piecewise: {
                double h = 0.0;
                for (const auto& p : points_) {
                    if (t >= p.t) h = p.h;
                    else break;
                }
                return h;
            }
            case Kind::Ramp: {
                if (t <= points_.front().t) return points_.front().h;
                if (t >= points_.back().t) return points_.back().h;
                auto it = std::upper_bound(points_.begin(), points_.end(), t,
                                           [](double v, const Breakpoint& p) { return v < p.t; });
                const auto& b = *it;
                const auto& a = *(it - 1);
                return a.h + (b.h - a.h) * (t - a.t) / (b.t - a.t);
            }
            case Kind::Custom: return custom_(t);
        }
        return 0.0;
    }

    /// ∫_0^t h(s) ds for t >= 0.
    double integral(double t) const {
        if (t <= 0.0) return 0.0;
        switch (kind_) {
            case Kind::Constant: return points_.front().h * t;
            case Kind::Piecewise: {
                double acc = 0.0;
                for (std::size_t k = 0; k < points_.size(); ++k) {
                    const double lo = std::max(points_[k].t, 0.0);
                    const double hi = k + 1 < points_.size() ? std::min(points_[k + 1].t, t) : t;
                    if (hi > lo) acc += points_[k].h * (hi - lo);
                }
                return acc;
            }
            case Kind::Ramp: {
                // Split at the kinks so each Simpson panel sees a polynomial.
                std::vector<double> cuts{0.0};
                for (const auto& p : points_) {
                    if (p.t > 0.0 && p.t < t) cuts.push_back(p.t);
                }
                cuts.push_back(t);
                double acc = 0.0;
                for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
                    acc += simpson(*this, cuts[k], cuts[k + 1], 2);
                }
                return acc;
            }
            case Kind::Custom: {
                const int panels = std::max(2, static_cast<int>(std::ceil(t * panels_per_unit_)));
                return simpson(custom_, 0.0, t, panels);
            }
        }
        return 0.0;
    }

    /// sup |h| over the breakpoints (custom profiles report NaN).
    double sup_abs() const {
        if (kind_ == Kind::Custom) return std::nan("");
        double s = 0.0;
        for (const auto& p : points_) s = std::max(s, std::abs(p.h));
        return s;
    }

    friend bool operator==(const AppliedField& a, const AppliedField& b) {
        return a.kind_ != Kind::Custom && a.kind_ == b.kind_ && a.points_ == b.points_;
    }

private:
    static void validate_points(const std::vector<Breakpoint>& points, std::size_t min_count) {
        if (points.size() < min_count) {
            throw Error(ErrorCode::ValidationError, "applied field needs more breakpoints");
        }
        for (std::size_t k = 0; k < points.size(); ++k) {
            if (!std::isfinite(points[k].t) || !std::isfinite(points[k].h)) {
                throw Error(ErrorCode::ValidationError, "applied field breakpoint is not finite");
            }
            if (k > 0 && !(points[k].t > points[k - 1].t)) {
                throw Error(ErrorCode::ValidationError, "applied field breakpoints must increase in t");
            }
        }
    }

    Kind kind_ = Kind::Constant;
    std::vector<Breakpoint> points_{{0.0, 0.0}};
    std::function<double(double)> custom_;
    int panels_per_unit_ = 200;
};

}  // namespace dwallsim

#endif  // DWALLSIM_APPLIED_FIELD_HPP
