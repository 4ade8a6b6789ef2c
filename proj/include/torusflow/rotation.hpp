#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace torusflow {

/// Lift F: R -> R of an orientation-preserving circle map of R/Z, with F(x + 1) = F(x) + 1.
class CircleMapLift {
public:
    using Function = std::function<double(double)>;

    static CircleMapLift from_function(Function f);
    /// Piecewise-linear lift through (xs[k], values[k]); xs strictly increasing in [0, 1).
    /// Extended to R by the degree-one rule.
    static CircleMapLift from_samples(std::vector<double> xs, std::vector<double> values);
    /// Rigid rotation x -> x + alpha.
    static CircleMapLift rotation(double alpha);

    double operator()(double x) const { return f_(x); }

    /// Samples the lift on `samples` points of [0, 1) and throws NotMonotone unless it is
    /// strictly increasing with F(x + 1) - F(x) = 1 within `tol`.
    void validate(int samples = 256, double tol = 1e-9) const;

private:
    explicit CircleMapLift(Function f) : f_(std::move(f)) {}
    Function f_;
};

struct Convergent {
    std::int64_t p = 0;
    std::int64_t q = 1;

    double value() const { return static_cast<double>(p) / static_cast<double>(q); }
    friend bool operator==(const Convergent&, const Convergent&) = default;
};

/// Continued-fraction convergents p_k/q_k for k = 0..depth, stopping early once alpha
/// is represented exactly.
std::vector<Convergent> convergents(double alpha, int depth);

struct RotationEstimate {
    double value = 0.0;
    /// |value - rot F| < error_bound = 1/n for lifts of circle homeomorphisms.
    double error_bound = 0.0;
    /// First convergent of `value` that lies within error_bound of it.
    Convergent convergent;
    int iterations = 0;
};

/// (F^n(x0) - x0) / n after validating monotonicity of the lift.
RotationEstimate rotation_number(const CircleMapLift& lift, double x0, int n_iters);

/// Distance in R/Z.
double circle_distance(double a, double b);

enum class Decision {
    Equivalent,          // witness found within the horizon
    NotEquivalentUpTo,   // no witness with |n| <= horizon; says nothing beyond it
    NotEquivalent,       // definitive (rotation parameters differ)
};

const char* to_string(Decision d);

struct EquivVerdict {
    Decision decision = Decision::NotEquivalentUpTo;
    /// n with rho2 = rho1 + n * phi (mod 1) when Equivalent.
    std::int64_t witness = 0;
    std::int64_t horizon = 0;
    /// min over |n| <= horizon of ||rho2 - rho1 - n phi||.
    double residual = 0.0;

    bool equivalent() const { return decision == Decision::Equivalent; }
};

/// Bounded-horizon decision of rho1 ~ rho2 under x ~ x + n phi (mod 1). Picks the n with
/// the smallest residual (ties to the smaller |n|, then the positive one).
EquivVerdict e_phi_equiv(double rho1, double rho2, double phi, std::int64_t horizon, double eps);

/// Whether rho lies on the orbit {n phi} within (horizon, eps).
bool orbit_membership(double rho, double phi, std::int64_t horizon, double eps);

}  // namespace torusflow
