#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "support.hpp"
#include "torusflow/connection.hpp"
#include "torusflow/errors.hpp"
#include "torusflow/flow.hpp"

using namespace torusflow;

namespace {

const FieldParams kNearSurface{1.0 / 3.0, 2.0, 1.0, 1.0016};

double circle_gap(double a, double b) {
    const double r = wrap_coordinate(a - b);
    return std::min(r, kTwoPi - r);
}

// u at the copy of a zero nearest to a lifted point.
double level_of_nearest_copy(const FieldParams& p, const Singularity& z, Vec2 near) {
    const double m = std::round((near.x - z.point.x) / kTwoPi);
    const double n = std::round((near.y - z.point.y) / kTwoPi);
    return hamiltonian(p, z.point.lifted() + Vec2{m * kTwoPi, n * kTwoPi});
}

const ConnectionSolution& connection_at_c1() {
    static const ConnectionSolution sol = solve_D(1.0 / 3.0, 2.0, 1.0);
    return sol;
}

}  // namespace

TEST_CASE("energy is conserved up to the next meridian") {
    StopSpec stop;
    stop.meridian_period = kTwoPi;
    const Trajectory t = integrate(analytic_field(kNearSurface), {1.0, 1e-9}, -1, stop);
    CHECK(t.terminal_event == StopEvent::MeridianCross);
    CHECK(max_energy_drift(kNearSurface, t) < 1e-8);

    testing_support::Rng rng(31);
    for (int k = 0; k < 40; ++k) {
        const FieldParams p{1.0 / 3.0, 2.0, rng.uniform(0.7, 1.1), rng.uniform(0.9, 1.3)};
        StopSpec s;
        s.meridian_period = kTwoPi;
        s.meridian_hits_to_stop = 0;
        s.t_max = 15.0;
        const Vec2 start = rng.point(0.0, kTwoPi);
        if (norm(field_at(p, start)) < 0.05) continue;
        const Trajectory tr = integrate(analytic_field(p), start, rng.uniform(0, 1) < 0.5 ? -1 : 1, s);
        CHECK(tr.terminal_event == StopEvent::TimeLimit);
        CHECK(max_energy_drift(p, tr) < 1e-8);
    }
}

TEST_CASE("constant field (phi, 1) on the unit torus") {
    const double phi = 0.3819660112501051;
    const VectorField f = [phi](Vec2) { return Vec2{phi, 1.0}; };
    StopSpec stop;
    stop.meridian_period = 1.0;
    stop.metric_period = 1.0;
    for (double x : {0.0, 0.25, 0.9}) {
        const Trajectory t = integrate(f, {x, 0.0}, 1, stop);
        REQUIRE(t.meridian_hits.size() == 1);
        CHECK(t.meridian_hits[0].point.y == 1.0);
        CHECK(t.meridian_hits[0].point.x == doctest::Approx(x + phi).epsilon(1e-12));
        CHECK(t.meridian_hits[0].t == doctest::Approx(1.0).epsilon(1e-12));
    }
    // Half a strip: (x, 0) -> (x + phi/2, 1/2).
    StopSpec half;
    half.meridian_period = 0.5;
    const Trajectory h = integrate(f, {0.1, 0.0}, 1, half);
    CHECK(h.meridian_hits[0].point.x == doctest::Approx(0.1 + phi / 2).epsilon(1e-12));
}

TEST_CASE("integrating back retraces the orbit") {
    testing_support::Rng rng(32);
    for (int k = 0; k < 20; ++k) {
        const FieldParams p{1.0 / 3.0, 2.0, rng.uniform(0.7, 1.1), rng.uniform(0.9, 1.3)};
        const Vec2 start = rng.point(0.0, kTwoPi);
        if (norm(field_at(p, start)) < 0.05) continue;
        StopSpec s;
        s.t_max = 5.0;
        const Trajectory fwd = integrate(analytic_field(p), start, 1, s);
        const Trajectory back = integrate(analytic_field(p), fwd.back().point, -1, s);
        CHECK(norm(back.back().point - start) < 1e-7);
        CHECK(back.back().t == doctest::Approx(-5.0));
        CHECK(max_energy_drift(p, fwd) < 1e-8);
        CHECK(max_energy_drift(p, back) < 1e-8);
    }
}

TEST_CASE("events and failures of integrate") {
    StopSpec stop;
    stop.t_max = 1e6;
    IntegratorOptions tight;
    tight.max_steps = 10;
    CHECK_THROWS_AS(integrate(analytic_field(kNearSurface), {1.0, 1.0}, 1, stop, tight), StepBudgetExhausted);
    stop.step_limit_is_event = true;
    CHECK(integrate(analytic_field(kNearSurface), {1.0, 1.0}, 1, stop, tight).terminal_event == StopEvent::StepLimit);
    CHECK_THROWS_AS(integrate(analytic_field(kNearSurface), {1.0, 1.0}, 0, stop), PreconditionViolated);

    // Sitting on a centre: the speed is at rounding level.
    const auto zeros = find_zeros(kNearSurface);
    const auto centre = std::find_if(zeros.begin(), zeros.end(), [](const Singularity& z) { return !z.is_saddle(); });
    REQUIRE(centre != zeros.end());
    StopSpec s2;
    s2.t_max = 1.0;
    CHECK_THROWS_AS(integrate(analytic_field(kNearSurface), centre->point.lifted(), 1, s2), SingularityEncountered);

    // Transversal event: first crossing of x = 3 located on the interpolant.
    StopSpec s3;
    s3.transversal = [](Vec2 q) { return q.x - 3.0; };
    const VectorField f = [](Vec2) { return Vec2{1.0, 0.5}; };
    const Trajectory t = integrate(f, {0.0, 0.0}, 1, s3);
    CHECK(t.terminal_event == StopEvent::Transversal);
    CHECK(t.back().point.x == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(t.back().t == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("Poincaré map is a rigid rotation on the connection surface") {
    const ConnectionSolution& sol = connection_at_c1();
    const PoincareSection section(sol.params());
    int evaluated = 0;
    for (int k = 0; k < 32; ++k) {
        const double x0 = (k + 0.37) * kTwoPi / 32;
        const double x1 = section(x0);
        CHECK(circle_gap(x1, x0 + kTwoPi / 3.0) < 1e-6);
        CHECK(max_energy_drift(sol.params(), section.return_trajectory(x0)) < 1e-8);
        ++evaluated;
    }
    CHECK(evaluated == 32);
}

TEST_CASE("Poincaré map without saddles") {
    const FieldParams rigid{0.3, 0.0, 0.0, 0.0};
    const PoincareSection section(rigid);
    CHECK(section.zeros().empty());
    for (double x : {0.0, 1.0, 4.0}) CHECK(circle_gap(section(x), x + kTwoPi * 0.3) < 1e-9);
}

TEST_CASE("Poincaré map off the surface is monotone and stable under rtol") {
    const FieldParams p{1.0 / 3.0, 2.0, 1.0, 1.1};
    const PoincareSection coarse(p);
    const double coarse_rtol = IntegratorOptions{}.rtol;
    PoincareOptions fine_options;
    fine_options.integrator.rtol = 0.5 * coarse_rtol;
    const PoincareSection fine(p, fine_options);
    double prev = -1e300;
    int defined = 0;
    for (int k = 0; k < 64; ++k) {
        const double x0 = (k + 0.5) * kTwoPi / 64;
        try {
            const double lift = coarse.lift(x0);
            CHECK(lift > prev);
            prev = lift;
            CHECK(std::abs(fine.lift(x0) - lift) <= 1e-8);
            ++defined;
        } catch (const SeparatrixHit&) {
            prev = -1e300;   // monotonicity is only claimed between undefined points
        }
    }
    CHECK(defined >= 60);
}

TEST_CASE("starting on a separatrix level is rejected") {
    const PoincareSection section(kNearSurface);
    for (const Singularity& z : section.zeros()) {
        if (!z.is_saddle()) continue;
        CHECK_THROWS_AS(section(wrap_coordinate(z.u_value)), SeparatrixHit);
    }
}

TEST_CASE("separatrices on the connection surface") {
    const ConnectionSolution& sol = connection_at_c1();
    const FieldParams p = sol.params();
    const auto zeros = find_zeros(p);
    const SaddleTriple t = order_saddles(zeros);
    auto index_of = [&](const Singularity& s) {
        for (std::size_t i = 0; i < zeros.size(); ++i)
            if (torus_distance(zeros[i].point.lifted(), s.point.lifted()) < 1e-9) return i;
        return zeros.size();
    };

    // Two branches of s1 close up into a loop; the other two reach M0.
    int loops = 0;
    std::vector<double> gamma1_hits;
    for (Branch b : kAllBranches) {
        const SeparatrixTrace tr = trace_separatrix(p, zeros, t.s1, b, 1);
        CHECK(max_energy_drift(p, tr.trajectory) < 1e-8);
        if (tr.closed()) {
            CHECK(*tr.end_saddle == index_of(t.s1));
            ++loops;
        } else {
            CHECK(tr.meridian_hits.size() == 1);
            if (is_stable(b)) gamma1_hits.push_back(tr.trajectory.meridian_hits.back().point.x);
        }
        for (const auto& h : tr.trajectory.meridian_hits) CHECK(std::abs(hamiltonian(p, h.point) - tr.level) < 1e-8);
    }
    CHECK(loops == 2);
    REQUIRE(gamma1_hits.size() == 1);

    // s2 and s3 are joined by three connections, each on the common level.
    int connections = 0;
    std::vector<double> gamma2_hits;
    for (const Singularity* s : {&t.s2, &t.s3}) {
        const Singularity& other = s == &t.s2 ? t.s3 : t.s2;
        for (Branch b : kAllBranches) {
            const SeparatrixTrace tr = trace_separatrix(p, zeros, *s, b, 1);
            CHECK(max_energy_drift(p, tr.trajectory) < 1e-8);
            if (tr.closed()) {
                REQUIRE(*tr.end_saddle == index_of(other));
                const double target = level_of_nearest_copy(p, other, tr.trajectory.back().point);
                CHECK(std::abs(tr.level - target) < 1e-8);
                if (!is_stable(b)) ++connections;
            } else if (is_stable(b)) {
                gamma2_hits.push_back(tr.trajectory.meridian_hits.back().point.x);
            }
        }
    }
    CHECK(connections == 3);
    REQUIRE(gamma2_hits.size() == 1);

    // rho from the saddle levels and from the separatrix hits on M0.
    CHECK(circle_gap(gamma2_hits[0] - gamma1_hits[0], sol.rho) < 1e-6);
}

TEST_CASE("level curve u = 1 crosses the strip") {
    LevelCurveOptions o;
    o.y_min = 0.0;
    o.y_max = kTwoPi;
    o.orientation = -1;   // against v, so that y increases from M0
    const LevelCurve c = trace_level_curve(kNearSurface, 1.0, {1.0, 0.0}, o);
    CHECK(c.end == LevelCurveEnd::ExitedTop);
    CHECK(c.points.back().y == kTwoPi);
    CHECK(c.points.back().x == doctest::Approx(1.0 + kTwoPi / 3.0).epsilon(1e-9));
    CHECK(c.max_level_error <= 1e-8);
    for (const Vec2& q : c.points) CHECK(std::abs(hamiltonian(kNearSurface, q) - 1.0) <= 1e-8);
}

TEST_CASE("level curves near extrema are small loops") {
    for (const Singularity& z : find_zeros(kNearSurface)) {
        if (z.is_saddle()) continue;
        const double level = z.u_value + (z.kind == SingularityKind::Minimum ? 1e-3 : -1e-3);
        // Bisect along x for a point on the level.
        double lo = 0.0, hi = 0.3;
        auto f = [&](double s) { return hamiltonian(kNearSurface, z.point.lifted() + Vec2{s, 0}) - level; };
        REQUIRE(f(lo) * f(hi) < 0);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (f(mid) * f(lo) > 0 ? lo : hi) = mid;
        }
        LevelCurveOptions o;
        o.max_step = 5e-3;
        const LevelCurve c = trace_level_curve(kNearSurface, level, z.point.lifted() + Vec2{lo, 0}, o);
        CHECK(c.end == LevelCurveEnd::Closed);
        CHECK(c.arc_length < 1.0);
        for (const Vec2& q : c.points) {
            CHECK(std::abs(hamiltonian(kNearSurface, q) - level) <= 1e-8);
            CHECK(norm(q - z.point.lifted()) < 0.3);
        }
    }
}

TEST_CASE("level curves refuse critical points") {
    const auto zeros = find_zeros(kNearSurface);
    const SaddleTriple t = order_saddles(zeros);
    CHECK_THROWS_AS(trace_level_curve(kNearSurface, t.s1.u_value, t.s1.point.lifted()), NearCriticalPoint);
    CHECK_THROWS_AS(trace_level_curve(kNearSurface, 100.0, {1.0, 0.0}), PreconditionViolated);
}
