#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "torusflow/field.hpp"
#include "torusflow/singularity.hpp"

namespace torusflow {

using VectorField = std::function<Vec2(Vec2)>;

VectorField analytic_field(const FieldParams& p);

struct IntegratorOptions {
    double rtol = 1e-11;
    double atol = 1e-13;
    double initial_step = 1e-3;
    double max_step = 0.05;
    std::size_t max_steps = 200000;
};

/// Events that end (or, for meridian crossings, are recorded along) an integration.
struct StopSpec {
    /// Crossings of y = k * meridian_period on the lift. The start height never counts.
    std::optional<double> meridian_period;
    /// Stop at this many crossings; 0 records them without stopping.
    int meridian_hits_to_stop = 1;

    /// Balls of radius saddle_radius around these points end the run on entry. A ball
    /// that contains the start is ignored until the trajectory has left it once.
    std::vector<Vec2> saddle_centers;
    double saddle_radius = 1e-4;
    /// Period of the metric used for ball distances; 0 means the plane.
    double metric_period = kTwoPi;

    /// Stop at the first sign change of this function along the trajectory.
    std::function<double(Vec2)> transversal;

    double t_max = std::numeric_limits<double>::infinity();
    /// Return a StepLimit trajectory instead of throwing StepBudgetExhausted.
    bool step_limit_is_event = false;
    /// Speed below which the run is treated as having hit a zero of the field.
    double min_speed = 1e-12;
};

enum class StopEvent { MeridianCross, SaddleApproach, Transversal, TimeLimit, StepLimit };

const char* to_string(StopEvent e);

struct TrajectorySample {
    double t = 0.0;   // signed time: negative when integrating backwards
    Vec2 point;       // on the lift R^2
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    std::vector<TrajectorySample> meridian_hits;
    StopEvent terminal_event = StopEvent::StepLimit;
    std::optional<std::size_t> saddle_index;   // set on SaddleApproach

    const TrajectorySample& back() const { return samples.back(); }
};

/// Adaptive Dormand-Prince 5(4) with dense output; events are located on the
/// interpolant. `direction` is +1 (forward in time) or -1 (backward).
Trajectory integrate(const VectorField& field, Vec2 start, int direction, const StopSpec& stop,
                     const IntegratorOptions& options = {});

/// Maximal |u(q(t)) - u(q(0))| over the samples and meridian hits of a trajectory.
double max_energy_drift(const FieldParams& p, const Trajectory& trajectory);

// ---------------------------------------------------------------------------
// Poincaré return map on the meridian M0 = {y = 0}.

struct PoincareOptions {
    IntegratorOptions integrator;
    double saddle_radius = 1e-4;
    /// Reject starting points whose u-level equals a saddle level (mod 2π) within this.
    double separatrix_tolerance = 1e-8;
    bool check_separatrix = true;
};

/// First return to M0 of the analytic family, following orbits in the sense that
/// crosses M0 upwards (y increasing). Saddles are located once at construction.
class PoincareSection {
public:
    explicit PoincareSection(const FieldParams& p, PoincareOptions options = {},
                             ZeroSearch search = {});

    /// Landing x on the lifted meridian y = ±2π, for a start (x0, 0) with x0 on the lift.
    double lift(double x0) const;
    /// lift(x0) reduced to [0, 2π).
    double operator()(double x0) const;
    /// Full trajectory of one return, for diagnostics and export.
    Trajectory return_trajectory(double x0) const;

    const std::vector<Singularity>& zeros() const { return zeros_; }
    int direction() const { return direction_; }

private:
    FieldParams params_;
    PoincareOptions options_;
    std::vector<Singularity> zeros_;
    int direction_ = 1;
};

double poincare_map(const FieldParams& p, double x0, const PoincareOptions& options = {});

// ---------------------------------------------------------------------------
// Separatrices.

enum class Branch { StableLeft, StableRight, UnstableLeft, UnstableRight };

const char* to_string(Branch b);
inline bool is_stable(Branch b) { return b == Branch::StableLeft || b == Branch::StableRight; }
inline constexpr Branch kAllBranches[] = {Branch::StableLeft, Branch::StableRight,
                                          Branch::UnstableLeft, Branch::UnstableRight};

struct SeparatrixOptions {
    double launch_offset = 1e-7;
    double saddle_radius = 1e-4;
    IntegratorOptions integrator;
};

struct SeparatrixTrace {
    Singularity saddle;
    Branch branch = Branch::StableLeft;
    Trajectory trajectory;
    /// x-coordinates of meridian crossings, reduced to [0, 2π), in order.
    std::vector<double> meridian_hits;
    /// Index into the zero list of the saddle whose ball ended the trace, if any.
    std::optional<std::size_t> end_saddle;
    /// u at the saddle on the standard lift; conserved along the branch.
    double level = 0.0;

    bool closed() const { return end_saddle.has_value(); }
};

/// Launches at saddle + δ·(±eigenvector) and integrates in the branch's time direction
/// until `max_meridian_hits` meridian crossings or until the trace enters the ball of
/// any saddle in `zeros` (a loop or a connection). Hitting the step budget is a
/// StepLimit terminal event, not an error.
SeparatrixTrace trace_separatrix(const FieldParams& p, std::span<const Singularity> zeros,
                                 const Singularity& saddle, Branch branch, int max_meridian_hits,
                                 const SeparatrixOptions& options = {});

// ---------------------------------------------------------------------------
// Level-curve continuation.

struct LevelCurveOptions {
    double initial_step = 1e-2;
    double min_step = 1e-7;
    double max_step = 5e-2;
    double arc_budget = 60.0;
    /// +1 follows the field direction, -1 the opposite one.
    int orientation = 1;
    /// Stop where the curve leaves y_min <= y <= y_max (endpoint placed on the boundary).
    std::optional<double> y_min;
    std::optional<double> y_max;
    double corrector_tol = 1e-12;
};

enum class LevelCurveEnd { Closed, ExitedBottom, ExitedTop, Budget };

const char* to_string(LevelCurveEnd e);

struct LevelCurve {
    std::vector<Vec2> points;
    LevelCurveEnd end = LevelCurveEnd::Budget;
    double arc_length = 0.0;
    double max_level_error = 0.0;
};

/// Pseudo-arclength predictor-corrector continuation of {u = level} on the lift;
/// the corrector is Newton along the gradient of u.
LevelCurve trace_level_curve(const FieldParams& p, double level, Vec2 seed,
                             const LevelCurveOptions& options = {});

}  // namespace torusflow
