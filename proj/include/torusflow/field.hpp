#pragma once

#include <cmath>
#include <numbers>

namespace torusflow {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
};

constexpr Vec2 operator+(Vec2 a, Vec2 b) { return a += b; }
constexpr Vec2 operator-(Vec2 a, Vec2 b) { return a -= b; }
constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Row-major 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
    double a = 0.0, b = 0.0;
    double c = 0.0, d = 0.0;

    constexpr double trace() const { return a + d; }
    constexpr double det() const { return a * d - b * c; }
    constexpr Vec2 operator*(Vec2 v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
};

/// A point of the torus (R/2πZ)^2 in its canonical representative [0, 2π)^2.
struct TorusPoint {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 lifted() const { return {x, y}; }
};

/// Reduces `v` into [0, period).
double wrap_coordinate(double v, double period = kTwoPi);
TorusPoint wrap(Vec2 point);
/// Distance in the flat torus of side `period`; a non-positive period means the plane.
double torus_distance(Vec2 a, Vec2 b, double period = kTwoPi);

/// Parameters of the analytic family
///   u(x, y) = x - φ y + (cos y - 1)(b sin(x - y) + c sin x + d cos y).
struct FieldParams {
    double phi = 1.0 / 3.0;
    double b = 2.0;
    double c = 1.0;
    double d = 1.0;
};

/// The Hamiltonian, evaluated on the lift R^2. Not periodic: u(x + 2π, y) = u(x, y) + 2π
/// and u(x, y + 2π) = u(x, y) - 2πφ, so comparisons must fix a lift.
double hamiltonian(const FieldParams& p, Vec2 q);
Vec2 grad_u(const FieldParams& p, Vec2 q);
Mat2 hessian_u(const FieldParams& p, Vec2 q);
/// ∂u/∂d, which depends on y only.
double du_dd(Vec2 q);

/// v = (∂u/∂y, -∂u/∂x).
Vec2 field_at(const FieldParams& p, Vec2 q);
/// Jacobian of field_at; trace-free since the field is Hamiltonian.
Mat2 jacobian(const FieldParams& p, Vec2 q);

/// u at the canonical representative of `q` (the standard lift x, y ∈ [0, 2π)).
double hamiltonian_standard_lift(const FieldParams& p, TorusPoint q);

}  // namespace torusflow
