#ifndef DWALLSIM_VEC3_HPP
#define DWALLSIM_VEC3_HPP

#include <cmath>
#include <vector>

namespace dwallsim {

/// Plain 3-vector with value semantics. Components follow the (e1, e2, e3) basis.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
constexpr Vec3 operator/(Vec3 a, double s) { return a *= 1.0 / s; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

/// e1 ∧ v, the generator of rotations about the easy axis.
constexpr Vec3 e1_cross(const Vec3& v) { return {0.0, -v.z, v.y}; }

constexpr double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }

inline Vec3 normalized(const Vec3& a) { return a / norm(a); }

inline constexpr Vec3 kE1{1.0, 0.0, 0.0};

/// Rotation by angle phi about e1.
inline Vec3 rotate_e1(const Vec3& v, double phi) {
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    return {v.x, c * v.y - s * v.z, s * v.y + c * v.z};
}

using Field3 = std::vector<Vec3>;
using ScalarField = std::vector<double>;

}  // namespace dwallsim

#endif  // DWALLSIM_VEC3_HPP
