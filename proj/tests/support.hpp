#pragma once

#include <cstdint>
#include <random>

#include "torusflow/field.hpp"

namespace testing_support {

using torusflow::FieldParams;
using torusflow::Mat2;
using torusflow::Vec2;

/// Fixed-seed generator so every run sees the same cases.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    std::int64_t integer(std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
    }
    Vec2 point(double lo = -10.0, double hi = 10.0) { return {uniform(lo, hi), uniform(lo, hi)}; }
    FieldParams params() { return {uniform(0.05, 0.95), uniform(-3.0, 3.0), uniform(-2.0, 2.0), uniform(-2.0, 2.0)}; }

private:
    std::mt19937_64 engine_;
};

/// Fourth-order central difference of a scalar function along one axis.
template <class F>
double central_difference(F f, double x, double h = 1e-3) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

/// Jacobian of a planar map by fourth-order central differences.
template <class F>
Mat2 numeric_jacobian(F f, Vec2 q, double h = 1e-3) {
    auto col = [&](Vec2 e) {
        return (-1.0 * f(q + 2 * h * e) + 8.0 * f(q + h * e) - 8.0 * f(q - h * e) + f(q - 2 * h * e)) * (1.0 / (12 * h));
    };
    const Vec2 cx = col({1, 0});
    const Vec2 cy = col({0, 1});
    return {cx.x, cy.x, cx.y, cy.y};
}

inline double max_abs_diff(const Mat2& a, const Mat2& b) {
    return std::max(std::max(std::abs(a.a - b.a), std::abs(a.b - b.b)),
                    std::max(std::abs(a.c - b.c), std::abs(a.d - b.d)));
}

}  // namespace testing_support
