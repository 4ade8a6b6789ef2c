#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "torusflow/field.hpp"
#include "torusflow/flow.hpp"
#include "torusflow/singularity.hpp"

namespace torusflow {

/// A hyperbolic saddle written in saddle-adapted coordinates: the saddle sits at the
/// origin, the unstable eigendirection is the first axis and the stable one the second.
struct SaddleModel {
    std::string name;
    VectorField field;
    double mu_true = 0.0;   // characteristic number |λ_s| / λ_u
    /// Absolute accuracy below which the field cannot be evaluated (rounding in the
    /// change of coordinates); used as a floor for the integrator's atol.
    double atol_floor = 0.0;
};

/// x' = λ_u x, y' = λ_s y. The Dulac map between {y = h} and {x = h} is
/// y = h (x / h)^μ exactly.
SaddleModel linear_saddle(double lambda_stable, double lambda_unstable);

/// x' = x, y' = -μ y + coupling x y. Both axes stay invariant and the Dulac map from
/// {y = 1} to {x = 1} is x^μ exp(coupling (1 - x)).
SaddleModel perturbed_saddle(double mu, double coupling = 0.1);

/// A saddle of the analytic family in the (unstable, stable) eigenbasis.
SaddleModel analytic_family_saddle(const FieldParams& p, const Singularity& saddle);

struct DulacSample {
    double x = 0.0;
    double y = 0.0;
};

struct DulacOptions {
    IntegratorOptions integrator{1e-11, 1e-300, 1e-3, 0.05, 500000};
    /// Separatrix launch offset, relative to h.
    double launch_offset = 1e-7;
};

/// Correspondence map from the entry transversal {η = h} to the exit transversal {ξ = h}.
/// Both x and the returned y are measured from the points where the stable and unstable
/// separatrices cross those transversals (found by tracing them), so the map is the
/// Dulac map of the saddle even when the separatrices are curved. Requires xs ⊂ (0, h/10].
std::vector<DulacSample> dulac_samples(const SaddleModel& model, double h, std::span<const double> xs,
                                       const DulacOptions& options = {});

struct DulacFit {
    double mu_true = 0.0;
    double mu_hat = 0.0;
    double c_hat = 0.0;
    double x_min = 0.0;
    double x_max = 0.0;
    /// Max deviation of log y from the fitted line.
    double residual = 0.0;
    std::size_t count = 0;
};

/// Least-squares line through (log x, log y): mu_hat is the slope, c_hat = exp(intercept).
/// Needs at least 8 samples, all positive.
DulacFit fit_exponent(std::span<const DulacSample> samples, double mu_true = 0.0);

/// n logarithmically spaced values from lo to hi inclusive.
std::vector<double> log_spaced(double lo, double hi, int n);

/// Characteristic numbers of two saddles whose Dulac maps compose along a separatrix.
struct SaddlePair {
    double mu = 0.0;
    double nu = 0.0;
};

/// mu * nu == 1 within tol, per pair.
std::vector<bool> codim_check(std::span<const SaddlePair> pairs, double tol = 1e-6);

/// Pairs for the analytic family: (s1, s1) around the loop of s1 and (s2, s3) along
/// their connection.
std::vector<SaddlePair> saddle_pairs(const SaddleTriple& saddles);

}  // namespace torusflow
