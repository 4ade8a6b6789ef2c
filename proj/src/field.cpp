#include "torusflow/field.hpp"

#include <algorithm>

namespace torusflow {

double wrap_coordinate(double v, double period) {
    double r = std::fmod(v, period);
    if (r < 0.0) r += period;
    // fmod of a tiny negative number can round back up to `period`.
    if (r >= period) r = 0.0;
    return r;
}

TorusPoint wrap(Vec2 point) {
    return {wrap_coordinate(point.x), wrap_coordinate(point.y)};
}

double torus_distance(Vec2 a, Vec2 b, double period) {
    if (!(period > 0.0)) return norm(a - b);
    auto axis = [period](double d) {
        double r = wrap_coordinate(d, period);
        return std::min(r, period - r);
    };
    return std::hypot(axis(a.x - b.x), axis(a.y - b.y));
}

namespace {

// Shared trigonometric terms of u and its derivatives.
struct Terms {
    double sy, cy, w;        // sin y, cos y, cos y - 1
    double sxy, cxy;         // sin(x - y), cos(x - y)
    double sx, cx;           // sin x, cos x
};

Terms terms(Vec2 q) {
    Terms t{};
    t.sy = std::sin(q.y);
    t.cy = std::cos(q.y);
    t.w = t.cy - 1.0;
    t.sxy = std::sin(q.x - q.y);
    t.cxy = std::cos(q.x - q.y);
    t.sx = std::sin(q.x);
    t.cx = std::cos(q.x);
    return t;
}

}  // namespace

double hamiltonian(const FieldParams& p, Vec2 q) {
    const Terms t = terms(q);
    const double g = p.b * t.sxy + p.c * t.sx + p.d * t.cy;
    return q.x - p.phi * q.y + t.w * g;
}

Vec2 grad_u(const FieldParams& p, Vec2 q) {
    const Terms t = terms(q);
    const double g = p.b * t.sxy + p.c * t.sx + p.d * t.cy;
    const double ux = 1.0 + t.w * (p.b * t.cxy + p.c * t.cx);
    const double uy = -p.phi - t.sy * g - t.w * (p.b * t.cxy + p.d * t.sy);
    return {ux, uy};
}

Mat2 hessian_u(const FieldParams& p, Vec2 q) {
    const Terms t = terms(q);
    const double g = p.b * t.sxy + p.c * t.sx + p.d * t.cy;
    const double uxx = -t.w * (p.b * t.sxy + p.c * t.sx);
    const double uxy = -t.sy * (p.b * t.cxy + p.c * t.cx) + t.w * p.b * t.sxy;
    const double uyy = -t.cy * g + 2.0 * t.sy * (p.b * t.cxy + p.d * t.sy) -
                       t.w * (p.b * t.sxy + p.d * t.cy);
    return {uxx, uxy, uxy, uyy};
}

double du_dd(Vec2 q) {
    const double cy = std::cos(q.y);
    return (cy - 1.0) * cy;
}

Vec2 field_at(const FieldParams& p, Vec2 q) {
    const Vec2 g = grad_u(p, q);
    return {g.y, -g.x};
}

Mat2 jacobian(const FieldParams& p, Vec2 q) {
    const Mat2 h = hessian_u(p, q);
    // d/dq (u_y, -u_x)
    return {h.c, h.d, -h.a, -h.b};
}

double hamiltonian_standard_lift(const FieldParams& p, TorusPoint q) {
    return hamiltonian(p, wrap(q.lifted()).lifted());
}

}  // namespace torusflow
