#ifndef DWALLSIM_FIELD_HPP
#define DWALLSIM_FIELD_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>

#include "dwallsim/error.hpp"
#include "dwallsim/vec3.hpp"

namespace dwallsim {

/// Uniform grid x_i = x_min + i*dx, i = 0..n-1.
struct Grid1D {
    double x_min = 0.0;
    double dx = 1.0;
    std::size_t n = 0;

    double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx; }
    double x_max() const { return x(n - 1); }
    double length() const { return static_cast<double>(n - 1) * dx; }

    /// Symmetric grid on [-half_width, half_width] with n points.
    static Grid1D symmetric(double half_width, std::size_t n) {
        return make(-half_width, half_width, n);
    }

    static Grid1D make(double x_min, double x_max, std::size_t n) {
        if (n < 3) throw Error(ErrorCode::GridTooSmall, "grid needs at least 3 points");
        if (!(x_max > x_min)) throw Error(ErrorCode::ValidationError, "x_max must exceed x_min");
        return Grid1D{x_min, (x_max - x_min) / static_cast<double>(n - 1), n};
    }

    friend bool operator==(const Grid1D&, const Grid1D&) = default;
};

inline void require_min_points(const Grid1D& grid, std::size_t count) {
    if (grid.n < count) {
        throw Error(ErrorCode::GridTooSmall,
                    "need at least " + std::to_string(count) + " points, got " + std::to_string(grid.n));
    }
}

/// Sample a callable x -> T on every node of the grid.
template <class Fn>
auto sample(const Fn& fn, const Grid1D& grid) {
    std::vector<decltype(fn(0.0))> out(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) out[i] = fn(grid.x(i));
    return out;
}

/// Magnetization on a grid. Every value is a unit vector to within kUnitTolerance.
class SpinField {
public:
    static constexpr double kUnitTolerance = 1e-12;

    SpinField() = default;

    /// Takes ownership of values and projects each onto the sphere.
    static SpinField project(const Grid1D& grid, Field3 values) {
        check_size(grid, values);
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double r = norm(values[i]);
            if (!(r > 0.0) || !std::isfinite(r)) {
                throw Error(ErrorCode::NormViolation, "cannot project node " + std::to_string(i));
            }
            values[i] = values[i] / r;
        }
        return SpinField(grid, std::move(values));
    }

    /// Accepts values only if they are already unit vectors within tol.
    static SpinField validated(const Grid1D& grid, Field3 values, double tol = kUnitTolerance) {
        check_size(grid, values);
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double dev = std::abs(norm(values[i]) - 1.0);
            if (!(dev <= tol)) {
                throw Error(ErrorCode::NormViolation,
                            "node " + std::to_string(i) + " has | |m| - 1 | = " + std::to_string(dev));
            }
        }
        return SpinField(grid, std::move(values));
    }

    /// Uniform field equal to v / |v|.
    static SpinField constant(const Grid1D& grid, const Vec3& v) {
        return SpinField(grid, Field3(grid.n, normalized(v)));
    }

    const Grid1D& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    const Vec3& operator[](std::size_t i) const { return values_[i]; }
    std::span<const Vec3> values() const { return values_; }
    const Field3& raw() const { return values_; }

    double max_norm_defect() const {
        double worst = 0.0;
        for (const auto& v : values_) worst = std::max(worst, std::abs(norm(v) - 1.0));
        return worst;
    }

private:
    SpinField(const Grid1D& grid, Field3 values) : grid_(grid), values_(std::move(values)) {}

    static void check_size(const Grid1D& grid, const Field3& values) {
        if (values.size() != grid.n) {
            throw Error(ErrorCode::ValidationError, "field size does not match grid");
        }
    }

    Grid1D grid_{};
    Field3 values_;
};

}  // namespace dwallsim

#endif  // DWALLSIM_FIELD_HPP
