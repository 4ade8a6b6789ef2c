#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "torusflow/field.hpp"
#include "torusflow/flow.hpp"
#include "torusflow/singularity.hpp"

namespace torusflow {

/// Connection defect Δ = u(s2) - u(s3) on the standard lift. It vanishes exactly
/// when s2 and s3 share a level, i.e. on the connection surface d = D(φ, b, c).
double delta(const SaddleTriple& saddles);
double delta(const FieldParams& p, const ZeroSearch& search = {});

/// dΔ/dd by the envelope argument: saddles are critical points of u, so their motion
/// drops out and dΔ/dd = ∂u/∂d(s2) - ∂u/∂d(s3) with ∂u/∂d = (cos y - 1) cos y.
double delta_derivative(const SaddleTriple& saddles);
double delta_derivative(const FieldParams& p, const ZeroSearch& search = {});

struct ConnectionSolution {
    double phi = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d_star = 0.0;
    /// u(s2) - u(s1) at d_star, the distance along M0 between the separatrix hits.
    double rho = 0.0;
    double d_delta_dd = 0.0;
    double residual = 0.0;
    int iterations = 0;
    SaddleTriple saddles;

    FieldParams params() const { return {phi, b, c, d_star}; }
};

struct ConnectionOptions {
    ZeroSearch search;
    double d_lo = 0.9;
    double d_hi = 1.3;
    double tol = 1e-10;
    int max_iterations = 100;
};

/// Safeguarded Newton (bisection fallback) for Δ(d) = 0 on [d_lo, d_hi].
/// Throws NoSignChange when Δ does not change sign on the bracket.
ConnectionSolution solve_D(double phi, double b, double c, const ConnectionOptions& options = {});

struct SeparationResult {
    bool separated = true;
    /// Smallest distance from a critical value to target + 2πk over all targets and k.
    double margin = 0.0;
    double closest_value = 0.0;
    double closest_target = 0.0;
};

inline constexpr double kDefaultLevelTargets[] = {1.0, 5.0};

SeparationResult critical_value_separation(std::span<const double> critical_values,
                                           std::span<const double> targets = kDefaultLevelTargets,
                                           double min_margin = 0.05);
SeparationResult critical_value_separation(std::span<const Singularity> zeros,
                                           std::span<const double> targets = kDefaultLevelTargets,
                                           double min_margin = 0.05);

// ---------------------------------------------------------------------------
// Verification over a parameter box.

struct ParameterBox {
    double phi = 1.0 / 3.0;
    double b = 2.0;
    double c_lo = 0.7;
    double c_hi = 1.1;
    double d_lo = 0.9;
    double d_hi = 1.3;
};

struct VerifyConfig {
    ParameterBox box;
    int grid_n = 9;
    ZeroSearch search;
    int expected_zeros = 6;
    double det_threshold = 2.0;
    double derivative_lo = 2.05;
    double derivative_hi = 2.15;
    double margin_min = 0.05;
    double connection_tol = 1e-10;
    double rho_min_spread = 1e-3;
    double level_lo = 1.0;
    double level_hi = 5.0;
    LevelCurveOptions level_curve;
};

struct CellResult {
    int i = 0;   // c index
    int j = 0;   // d index
    double c = 0.0;
    double d = 0.0;
    int zero_count = 0;
    ZeroCensus census;
    double margin = 0.0;
    LevelCurveEnd level_lo_end = LevelCurveEnd::Budget;
    LevelCurveEnd level_hi_end = LevelCurveEnd::Budget;
    double derivative = 0.0;
    bool zero_count_ok = false;
    bool census_ok = false;
    bool strip_ok = false;
    bool transversality_ok = false;
    std::string error;
};

struct ConnectionRow {
    int i = 0;
    double c = 0.0;
    bool ok = false;
    std::optional<ConnectionSolution> solution;
    std::string error;
};

struct CheckOutcome {
    std::string name;
    bool pass = false;
    int failures = 0;
    std::string detail;
};

/// One named check per numerically verified claim about the family:
/// zero_count, hyperbolic_census, strip_division, transversality,
/// connection_surface, rho_nonconstant.
struct VerificationReport {
    VerifyConfig config;
    std::vector<CellResult> cells;          // ordered by (i, j)
    std::vector<ConnectionRow> connections; // ordered by i
    std::vector<CheckOutcome> checks;
    bool pass = false;
};

/// Grid values lo + (hi - lo) * k / (n - 1), k = 0..n-1 (just lo when n == 1).
std::vector<double> grid_values(double lo, double hi, int n);

VerificationReport verify_parameter_box(const VerifyConfig& config);

}  // namespace torusflow
