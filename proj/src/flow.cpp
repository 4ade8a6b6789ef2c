#include "torusflow/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint/stepper/generation.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_dopri5.hpp>

#include "torusflow/errors.hpp"

namespace torusflow {

namespace odeint = boost::numeric::odeint;

const char* to_string(StopEvent e) {
    switch (e) {
        case StopEvent::MeridianCross: return "meridian_cross";
        case StopEvent::SaddleApproach: return "saddle_approach";
        case StopEvent::Transversal: return "transversal";
        case StopEvent::TimeLimit: return "time_limit";
        case StopEvent::StepLimit: return "step_limit";
    }
    return "unknown";
}

const char* to_string(Branch b) {
    switch (b) {
        case Branch::StableLeft: return "stable_left";
        case Branch::StableRight: return "stable_right";
        case Branch::UnstableLeft: return "unstable_left";
        case Branch::UnstableRight: return "unstable_right";
    }
    return "unknown";
}

const char* to_string(LevelCurveEnd e) {
    switch (e) {
        case LevelCurveEnd::Closed: return "closed";
        case LevelCurveEnd::ExitedBottom: return "exited_bottom";
        case LevelCurveEnd::ExitedTop: return "exited_top";
        case LevelCurveEnd::Budget: return "budget";
    }
    return "unknown";
}

VectorField analytic_field(const FieldParams& p) {
    return [p](Vec2 q) { return field_at(p, q); };
}

namespace {

using State = std::array<double, 2>;
using Dopri5 = odeint::runge_kutta_dopri5<State>;

Vec2 to_vec(const State& s) { return {s[0], s[1]}; }

// Root of f on [a, b] where f(a), f(b) have opposite signs.
template <class F>
double locate(F&& f, double a, double b, double fa, double fb) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    std::uintmax_t max_iter = 200;
    auto tol = [](double lo, double hi) {
        return std::abs(hi - lo) <= 1e-14 * std::max(1.0, std::abs(lo));
    };
    const auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, max_iter);
    return 0.5 * (r.first + r.second);
}

struct PendingEvent {
    double tau;
    StopEvent kind;
    std::size_t ball = 0;
    double level = 0.0;   // meridian height
};

}  // namespace

Trajectory integrate(const VectorField& field, Vec2 start, int direction, const StopSpec& stop,
                     const IntegratorOptions& options) {
    if (direction != 1 && direction != -1) {
        throw PreconditionViolated("integrate: direction must be +1 or -1");
    }
    const double sign = direction;
    auto system = [&](const State& x, State& dxdt, double) {
        const Vec2 v = field({x[0], x[1]});
        dxdt[0] = sign * v.x;
        dxdt[1] = sign * v.y;
    };
    auto distance = [&](Vec2 a, Vec2 b) {
        return torus_distance(a, b, stop.metric_period);
    };

    auto stepper = odeint::make_dense_output(options.atol, options.rtol, options.max_step, Dopri5());
    stepper.initialize(State{start.x, start.y}, 0.0, options.initial_step);

    Trajectory out;
    out.samples.push_back({0.0, start});

    std::vector<bool> armed(stop.saddle_centers.size());
    for (std::size_t i = 0; i < armed.size(); ++i) {
        armed[i] = distance(start, stop.saddle_centers[i]) > stop.saddle_radius;
    }
    double g_prev = stop.transversal ? stop.transversal(start) : 0.0;
    int hits = 0;

    auto state_at = [&](double tau) {
        State s;
        stepper.calc_state(tau, s);
        return to_vec(s);
    };
    auto finish = [&](double tau, StopEvent kind) {
        out.samples.push_back({sign * tau, state_at(tau)});
        out.terminal_event = kind;
        return out;
    };

    for (std::size_t step = 0;; ++step) {
        if (step >= options.max_steps) {
            if (stop.step_limit_is_event) {
                out.terminal_event = StopEvent::StepLimit;
                return out;
            }
            std::ostringstream msg;
            msg << "integration exceeded " << options.max_steps << " steps";
            throw StepBudgetExhausted(msg.str());
        }
        const auto [tau0, tau1] = stepper.do_step(system);
        const Vec2 q0 = to_vec(stepper.previous_state());
        const Vec2 q1 = to_vec(stepper.current_state());
        if (!std::isfinite(q1.x) || !std::isfinite(q1.y)) {
            throw SingularityEncountered("integration produced a non-finite state");
        }

        std::vector<PendingEvent> events;

        if (stop.meridian_period) {
            const double period = *stop.meridian_period;
            const double lo = std::min(q0.y, q1.y);
            const double hi = std::max(q0.y, q1.y);
            // Levels strictly beyond the step's starting height.
            long k_first = q1.y > q0.y ? static_cast<long>(std::floor(lo / period)) + 1
                                       : static_cast<long>(std::ceil(lo / period));
            long k_last = q1.y > q0.y ? static_cast<long>(std::floor(hi / period))
                                      : static_cast<long>(std::ceil(hi / period)) - 1;
            for (long k = k_first; k <= k_last; ++k) {
                const double level = k * period;
                auto f = [&](double tau) { return state_at(tau).y - level; };
                const double t = locate(f, tau0, tau1, q0.y - level, q1.y - level);
                events.push_back({t, StopEvent::MeridianCross, 0, level});
            }
        }

        if (!stop.saddle_centers.empty()) {
            constexpr int kSub = 4;
            for (std::size_t i = 0; i < stop.saddle_centers.size(); ++i) {
                const Vec2 c = stop.saddle_centers[i];
                auto g = [&](double tau) { return distance(state_at(tau), c) - stop.saddle_radius; };
                double ta = tau0;
                double ga = distance(q0, c) - stop.saddle_radius;
                for (int s = 1; s <= kSub; ++s) {
                    const double tb = tau0 + (tau1 - tau0) * s / kSub;
                    const double gb = g(tb);
                    if (!armed[i] && gb > 0.0) {
                        armed[i] = true;
                    } else if (armed[i] && gb <= 0.0) {
                        const double t = ga > 0.0 ? locate(g, ta, tb, ga, gb) : ta;
                        events.push_back({t, StopEvent::SaddleApproach, i, 0.0});
                        break;
                    }
                    ta = tb;
                    ga = gb;
                }
            }
        }

        if (stop.transversal) {
            const double g1 = stop.transversal(q1);
            if (g_prev != 0.0 && (g1 == 0.0 || (g1 > 0.0) != (g_prev > 0.0))) {
                auto g = [&](double tau) { return stop.transversal(state_at(tau)); };
                events.push_back({locate(g, tau0, tau1, g_prev, g1), StopEvent::Transversal});
            }
            g_prev = g1;
        }

        if (tau1 >= stop.t_max) events.push_back({stop.t_max, StopEvent::TimeLimit});

        std::sort(events.begin(), events.end(),
                  [](const PendingEvent& a, const PendingEvent& b) { return a.tau < b.tau; });
        for (const PendingEvent& e : events) {
            if (e.kind == StopEvent::MeridianCross) {
                Vec2 hit = state_at(e.tau);
                hit.y = e.level;
                out.meridian_hits.push_back({sign * e.tau, hit});
                if (stop.meridian_hits_to_stop > 0 && ++hits >= stop.meridian_hits_to_stop) {
                    out.samples.push_back({sign * e.tau, hit});
                    out.terminal_event = StopEvent::MeridianCross;
                    return out;
                }
                continue;
            }
            if (e.kind == StopEvent::SaddleApproach) out.saddle_index = e.ball;
            return finish(e.tau, e.kind);
        }

        out.samples.push_back({sign * tau1, q1});
        const bool in_ball = std::any_of(armed.begin(), armed.end(), [](bool a) { return !a; });
        if (!in_ball && norm(field(q1)) < stop.min_speed) {
            std::ostringstream msg;
            msg << "trajectory reached a zero of the field near (" << q1.x << ", " << q1.y << ")";
            throw SingularityEncountered(msg.str());
        }
    }
}

double max_energy_drift(const FieldParams& p, const Trajectory& trajectory) {
    if (trajectory.samples.empty()) return 0.0;
    const double u0 = hamiltonian(p, trajectory.samples.front().point);
    double drift = 0.0;
    for (const auto& s : trajectory.samples) drift = std::max(drift, std::abs(hamiltonian(p, s.point) - u0));
    for (const auto& s : trajectory.meridian_hits) drift = std::max(drift, std::abs(hamiltonian(p, s.point) - u0));
    return drift;
}

// ---------------------------------------------------------------------------

PoincareSection::PoincareSection(const FieldParams& p, PoincareOptions options, ZeroSearch search)
    : params_(p), options_(options), zeros_(find_zeros(p, search)) {
    if (p.phi == 0.0) throw PreconditionViolated("Poincaré map requires phi != 0");
    // v_y(x, 0) = -u_x(x, 0) = -1, so upward crossings run against the field.
    direction_ = field_at(p, {0.0, 0.0}).y > 0.0 ? 1 : -1;
}

Trajectory PoincareSection::return_trajectory(double x0) const {
    if (options_.check_separatrix) {
        for (const Singularity& z : zeros_) {
            if (!z.is_saddle()) continue;
            // u(x, 0) = x, so M0 meets the level of z at x = u(z) mod 2π.
            const double gap = wrap_coordinate(x0 - z.u_value);
            if (std::min(gap, kTwoPi - gap) < options_.separatrix_tolerance) {
                std::ostringstream msg;
                msg << "x0 = " << x0 << " lies on the level of the saddle at (" << z.point.x << ", "
                    << z.point.y << ")";
                throw SeparatrixHit(msg.str());
            }
        }
    }
    StopSpec stop;
    stop.meridian_period = kTwoPi;
    stop.saddle_radius = options_.saddle_radius;
    for (const Singularity& z : zeros_) {
        if (z.is_saddle()) stop.saddle_centers.push_back(z.point.lifted());
    }
    Trajectory t = integrate(analytic_field(params_), {x0, 0.0}, direction_, stop, options_.integrator);
    if (t.terminal_event == StopEvent::SaddleApproach) {
        std::ostringstream msg;
        msg << "orbit of x0 = " << x0 << " entered a saddle ball before returning to M0";
        throw SeparatrixHit(msg.str());
    }
    return t;
}

double PoincareSection::lift(double x0) const {
    return return_trajectory(x0).meridian_hits.back().point.x;
}

double PoincareSection::operator()(double x0) const { return wrap_coordinate(lift(x0)); }

double poincare_map(const FieldParams& p, double x0, const PoincareOptions& options) {
    return PoincareSection(p, options)(x0);
}

// ---------------------------------------------------------------------------

SeparatrixTrace trace_separatrix(const FieldParams& p, std::span<const Singularity> zeros,
                                 const Singularity& saddle, Branch branch, int max_meridian_hits,
                                 const SeparatrixOptions& options) {
    if (!saddle.is_saddle()) throw KindMismatch("trace_separatrix needs a saddle");
    const bool stable = is_stable(branch);
    const bool left = branch == Branch::StableLeft || branch == Branch::UnstableLeft;
    const Vec2 dir = stable ? saddle.stable_direction : saddle.unstable_direction;
    const Vec2 launch = saddle.point.lifted() + (left ? -options.launch_offset : options.launch_offset) * dir;

    StopSpec stop;
    stop.meridian_period = kTwoPi;
    stop.meridian_hits_to_stop = max_meridian_hits;
    stop.saddle_radius = options.saddle_radius;
    std::vector<std::size_t> ball_to_zero;
    for (std::size_t i = 0; i < zeros.size(); ++i) {
        if (!zeros[i].is_saddle()) continue;
        stop.saddle_centers.push_back(zeros[i].point.lifted());
        ball_to_zero.push_back(i);
    }
    stop.step_limit_is_event = true;

    SeparatrixTrace trace;
    trace.saddle = saddle;
    trace.branch = branch;
    trace.level = saddle.u_value;
    trace.trajectory = integrate(analytic_field(p), launch, stable ? -1 : 1, stop, options.integrator);
    for (const auto& h : trace.trajectory.meridian_hits) {
        trace.meridian_hits.push_back(wrap_coordinate(h.point.x));
    }
    if (trace.trajectory.saddle_index) trace.end_saddle = ball_to_zero[*trace.trajectory.saddle_index];
    return trace;
}

// ---------------------------------------------------------------------------

namespace {

struct Correction {
    Vec2 point;
    bool converged = false;
};

// Newton along the gradient of u towards {u = level}.
Correction correct(const FieldParams& p, double level, Vec2 q, double tol, int max_iter = 20) {
    for (int it = 0; it < max_iter; ++it) {
        const double r = hamiltonian(p, q) - level;
        if (std::abs(r) <= tol) return {q, true};
        const Vec2 g = grad_u(p, q);
        const double g2 = dot(g, g);
        if (g2 < 1e-16) {
            throw NearCriticalPoint("level-curve corrector reached |grad u| < 1e-8");
        }
        q -= (r / g2) * g;
    }
    return {q, std::abs(hamiltonian(p, q) - level) <= tol};
}

// Point on y = y_bound between a (inside) and b (outside), corrected onto the level in x.
Vec2 clip_to_boundary(const FieldParams& p, double level, Vec2 a, Vec2 b, double y_bound) {
    const double s = (y_bound - a.y) / (b.y - a.y);
    Vec2 q{a.x + s * (b.x - a.x), y_bound};
    for (int it = 0; it < 30; ++it) {
        const double r = hamiltonian(p, q) - level;
        const double ux = grad_u(p, q).x;
        if (std::abs(r) < 1e-14 || std::abs(ux) < 1e-12) break;
        q.x -= r / ux;
    }
    return q;
}

}  // namespace

LevelCurve trace_level_curve(const FieldParams& p, double level, Vec2 seed,
                             const LevelCurveOptions& options) {
    if (norm(grad_u(p, seed)) <= 1e-8) {
        throw NearCriticalPoint("level-curve seed is at a critical point of u");
    }
    Correction first = correct(p, level, seed, options.corrector_tol, 1);
    if (std::abs(hamiltonian(p, first.point) - level) > 1e-8) {
        first = correct(p, level, first.point, options.corrector_tol);
        if (!first.converged || norm(first.point - seed) > options.max_step) {
            throw PreconditionViolated("level-curve seed is not close to the requested level");
        }
    } else {
        first = correct(p, level, first.point, options.corrector_tol);
    }

    LevelCurve curve;
    Vec2 q = first.point;
    const Vec2 start = q;
    curve.points.push_back(q);
    double h = options.initial_step;
    const double sense = options.orientation >= 0 ? 1.0 : -1.0;

    auto record_error = [&](Vec2 point) {
        curve.max_level_error = std::max(curve.max_level_error, std::abs(hamiltonian(p, point) - level));
    };
    record_error(q);

    while (curve.arc_length < options.arc_budget) {
        const Vec2 g = grad_u(p, q);
        const double gn = norm(g);
        if (gn < 1e-8) throw NearCriticalPoint("level curve passes through a critical point of u");
        const Vec2 tangent = (sense / gn) * Vec2{g.y, -g.x};

        Correction next;
        for (;;) {
            next = correct(p, level, q + h * tangent, options.corrector_tol);
            const Vec2 moved = next.point - q;
            // Reject corrections that jump to another branch or run backwards.
            if (next.converged && norm(moved) < 2.0 * h && dot(moved, tangent) > 0.0) break;
            h *= 0.5;
            if (h < options.min_step) {
                throw NearCriticalPoint("level-curve step size collapsed");
            }
        }
        const Vec2 prev = q;
        q = next.point;
        curve.arc_length += norm(q - prev);

        if (options.y_min && q.y < *options.y_min) {
            const Vec2 edge = clip_to_boundary(p, level, prev, q, *options.y_min);
            curve.points.push_back(edge);
            record_error(edge);
            curve.end = LevelCurveEnd::ExitedBottom;
            return curve;
        }
        if (options.y_max && q.y > *options.y_max) {
            const Vec2 edge = clip_to_boundary(p, level, prev, q, *options.y_max);
            curve.points.push_back(edge);
            record_error(edge);
            curve.end = LevelCurveEnd::ExitedTop;
            return curve;
        }
        curve.points.push_back(q);
        record_error(q);

        if (curve.arc_length > 4.0 * options.max_step && norm(q - start) < h) {
            curve.points.push_back(start);
            curve.end = LevelCurveEnd::Closed;
            return curve;
        }
        h = std::min(1.5 * h, options.max_step);
    }
    curve.end = LevelCurveEnd::Budget;
    return curve;
}

}  // namespace torusflow
