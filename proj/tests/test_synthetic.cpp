#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "support.hpp"
#include "torusflow/errors.hpp"
#include "torusflow/synthetic.hpp"

using namespace torusflow;

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

double mod1(double x) {
    const double r = x - std::floor(x);
    return r >= 1.0 ? 0.0 : r;
}

// An arc of R/Z as one or two intervals of [0, 1), built from its endpoints alone.
std::vector<std::pair<double, double>> pieces(const Arc& a) {
    const double s = mod1(a.center - a.half_width);
    const double e = mod1(a.center + a.half_width);
    if (s <= e) return {{s, e}};
    return {{s, 1.0}, {0.0, e}};
}

bool intervals_meet(const Arc& a, const Arc& b) {
    for (const auto& [s1, e1] : pieces(a))
        for (const auto& [s2, e2] : pieces(b))
            if (std::max(s1, s2) <= std::min(e1, e2)) return true;
    return false;
}

}  // namespace

TEST_CASE("separatrix hit sets") {
    const SyntheticField f = build(0.3, kGolden);
    const auto g2 = f.gamma2_hits(3);
    REQUIRE(g2.size() == 4);
    for (int n = 0; n <= 3; ++n) CHECK(circle_distance(g2[n], 0.3 - n * kGolden) < 1e-14);
    const auto g1 = f.gamma1_hits(3);
    for (int n = 0; n <= 3; ++n) CHECK(circle_distance(g1[n], -n * kGolden) < 1e-14);
    const auto big1 = f.big_gamma1_hits(2);
    const auto big2 = f.big_gamma2_hits(2);
    for (int n = 0; n <= 2; ++n) {
        CHECK(circle_distance(big1[n], (n + 1) * kGolden) < 1e-14);
        CHECK(circle_distance(big2[n], 0.3 + (n + 1) * kGolden) < 1e-14);
    }
    for (double h : g2) {
        CHECK(h >= 0.0);
        CHECK(h < 1.0);
    }
}

TEST_CASE("return map is the rotation by phi away from the stable separatrices") {
    const SyntheticField f = build(0.3, kGolden);
    CHECK(circle_distance(*f.return_map(0.11), 0.11 + kGolden) < 1e-15);
    CHECK_FALSE(f.return_map(0.0).has_value());
    CHECK_FALSE(f.return_map(0.3).has_value());   // gamma2 crosses M0 at rho
    CHECK(circle_distance(*f.lower_strip_map(0.2), 0.2 + kGolden / 2) < 1e-15);
    CHECK_FALSE(f.upper_strip_map(0.3 + kGolden / 2).has_value());

    testing_support::Rng rng(51);
    for (int k = 0; k < 500; ++k) {
        const double x = rng.uniform(0, 1);
        if (circle_distance(x, 0) < 1e-9 || circle_distance(x, 0.3) < 1e-9) continue;
        CHECK(circle_distance(*f.return_map(x), x + kGolden) < 1e-14);
    }
}

TEST_CASE("return map walks the gamma2 hits") {
    testing_support::Rng rng(52);
    for (int k = 0; k < 50; ++k) {
        const SyntheticField f = build(rng.uniform(0, 1), rng.uniform(0.01, 0.99));
        const auto hits = f.gamma2_hits(30);
        for (std::size_t n = 0; n + 1 < hits.size(); ++n) {
            const auto next = f.return_map(hits[n + 1]);
            if (!next) continue;   // hit coincides with gamma1 (rho on the orbit)
            CHECK(circle_distance(*next, hits[n]) < 1e-13);
        }
    }
}

TEST_CASE("separatrix connections at special rho") {
    const auto a = first_connection(build(0.0, kGolden), 10);
    REQUIRE(a.has_value());
    CHECK(a->kind == ConnectionKind::UnstableS1ToStableS2);
    CHECK(a->turns == 0);

    // rho = -phi: Gamma2's first hit on M0 is gamma1's base point 0.
    const SyntheticField g = build(mod1(-kGolden), kGolden);
    CHECK(circle_distance(g.big_gamma2_hits(0)[0], g.gamma1_hits(0)[0]) < 1e-14);
    const auto b = first_connection(g, 10);
    REQUIRE(b.has_value());
    CHECK(b->kind == ConnectionKind::UnstableS2ToStableS1);
    CHECK(b->turns == 0);

    const auto c = first_connection(build(mod1(3 * kGolden), kGolden), 10);
    REQUIRE(c.has_value());
    CHECK(c->kind == ConnectionKind::UnstableS1ToStableS2);
    CHECK(c->turns == 3);

    CHECK_FALSE(first_connection(build(kGolden / 2, kGolden), 100).has_value());
}

TEST_CASE("build validates its arguments") {
    CHECK_THROWS_AS(build(1.0, 0.5), PreconditionViolated);
    CHECK_THROWS_AS(build(-0.1, 0.5), PreconditionViolated);
    CHECK_THROWS_AS(build(0.1, 0.0), PreconditionViolated);
    CHECK_THROWS_AS(build(0.1, 1.0), PreconditionViolated);
    const SyntheticField f = build(0.1, 0.5);
    CHECK(f.lower_interior != f.upper_interior);
}

TEST_CASE("equivalence oracle: examples") {
    const double rho = 0.2;
    const EquivVerdict four = equivalence_oracle(build(rho, kGolden), build(mod1(rho + 4 * kGolden), kGolden), 100, 1e-9);
    CHECK(four.decision == Decision::Equivalent);
    CHECK(four.witness == 4);

    const EquivVerdict mismatch = equivalence_oracle(build(rho, kGolden), build(rho, std::sqrt(2.0) - 1.0), 100, 1e-9);
    CHECK(mismatch.decision == Decision::NotEquivalent);

    const EquivVerdict half = equivalence_oracle(build(0.2, kGolden), build(mod1(0.2 + kGolden / 2), kGolden), 100, 1e-9);
    CHECK(half.decision == Decision::NotEquivalentUpTo);
    CHECK(half.horizon == 100);
    for (int n = -100; n <= 100; ++n) CHECK(circle_distance(0.2 + kGolden / 2, 0.2 + n * kGolden) > 1e-9);

    CHECK_THROWS_AS(equivalence_oracle(build(mod1(7 * kGolden), kGolden), build(0.2, kGolden), 100, 1e-9),
                    PreconditionViolated);
}

TEST_CASE("interval decomposition: examples") {
    const double rho2 = 0.2;
    const double rho1 = mod1(rho2 + 3 * kGolden);
    const IntervalDecomposition dec = decomposition(rho1, rho2, kGolden, 3);
    const auto arcs = dec.all_arcs();
    CHECK(arcs.size() == 5);
    for (std::size_t a = 0; a < arcs.size(); ++a)
        for (std::size_t b = a + 1; b < arcs.size(); ++b) CHECK_FALSE(intervals_meet(arcs[a], arcs[b]));
    CHECK(dec.eps == doctest::Approx(dec.eps_max / 2));
    CHECK(arcs.size() * 2 * dec.eps < 1.0);

    const IntervalDecomposition zero = decomposition(0.5, 0.5, kGolden, 0);
    CHECK(zero.all_arcs().size() == 2);
    CHECK_FALSE(intervals_meet(zero.J, zero.I[0]));
    CHECK(zero.eps_max == doctest::Approx(0.25));

    // rho2 on the orbit of 0: rho2 + k phi returns to 0 for some k <= n.
    CHECK_THROWS_AS(decomposition(mod1(3 * kGolden - kGolden), mod1(-kGolden), kGolden, 3), DegenerateSpacing);
    CHECK_THROWS_AS(decomposition(0.0, 0.25, 0.25, 3), DegenerateSpacing);
    CHECK_THROWS_AS(decomposition(0.3, 0.2, kGolden, 1), PreconditionViolated);
    CHECK_THROWS_AS(decomposition(0.2, 0.2, kGolden, -1), PreconditionViolated);
}

TEST_CASE("interval decomposition: random cases are pairwise disjoint") {
    testing_support::Rng rng(53);
    int done = 0;
    while (done < 100) {
        const double phi = rng.uniform(0.01, 0.99);
        const double rho2 = rng.uniform(0, 1);
        const auto n = rng.integer(0, 10);
        const double rho1 = mod1(rho2 + n * phi);
        IntervalDecomposition dec;
        try {
            dec = decomposition(rho1, rho2, phi, n);
        } catch (const DegenerateSpacing&) {
            continue;   // rho2 numerically on the orbit of 0
        }
        const auto arcs = dec.all_arcs();
        REQUIRE(arcs.size() == static_cast<std::size_t>(n + 2));
        for (std::size_t a = 0; a < arcs.size(); ++a) {
            CHECK(arcs[a].half_width == dec.eps);
            for (std::size_t b = a + 1; b < arcs.size(); ++b) {
                CHECK_FALSE(intervals_meet(arcs[a], arcs[b]));
                CHECK(circle_distance(arcs[a].center, arcs[b].center) >= 2 * dec.eps_max - 1e-15);
            }
        }
        CHECK(circle_distance(dec.I.back().center, rho1) < 1e-12);
        ++done;
    }
}

TEST_CASE("boundary conjugacy is the identity off the free arcs") {
    const double rho2 = 0.2;
    const IntervalDecomposition dec = decomposition(mod1(rho2 + 4 * kGolden), rho2, kGolden, 4);
    const BoundaryConjugacy h = boundary_conjugacy(dec);
    CHECK(h.free_arcs().size() == 4);   // J, I1, I2, I3

    testing_support::Rng rng(54);
    for (int k = 0; k < 2000; ++k) {
        const double x = rng.uniform(0, 1);
        bool inside = false;
        for (const Arc& a : h.free_arcs()) inside = inside || a.contains_interior(x);
        const auto y = h(x);
        CHECK(y.has_value() == !inside);
        if (y) {
            CHECK(*y == x);
            CHECK(*h(*y) == x);
        }
    }
    for (const Arc& a : h.free_arcs()) {
        CHECK(h(a.start()).value() == a.start());
        CHECK(h(a.end()).value() == a.end());
        CHECK_FALSE(h(a.center).has_value());
    }
    // I0 and In are pinned pointwise.
    CHECK(h(dec.I.front().center).has_value());
    CHECK(h(dec.I.back().center).has_value());
}

TEST_CASE("equivalence oracle agrees with an exhaustive scan") {
    testing_support::Rng rng(55);
    const std::int64_t horizon = 100;
    const double eps = 1e-9;
    auto off_orbit = [&](double rho, double phi) {
        for (std::int64_t m = -horizon; m <= horizon; ++m)
            if (circle_distance(rho, static_cast<double>(m) * phi) <= 1e-6) return false;
        return true;
    };
    int done = 0;
    while (done < 200) {
        const double phi = rng.uniform(0.01, 0.99);
        const double rho1 = rng.uniform(0, 1);
        const auto n = rng.integer(-20, 20);
        const double rho2 = mod1(rho1 + n * phi);
        const double delta = rng.uniform(1e-3, 1e-1);
        const double rho3 = mod1(rho2 + delta);
        if (!off_orbit(rho1, phi) || !off_orbit(rho2, phi) || !off_orbit(rho3, phi)) continue;

        const EquivVerdict yes = equivalence_oracle(build(rho1, phi), build(rho2, phi), horizon, eps);
        REQUIRE(yes.decision == Decision::Equivalent);
        CHECK(std::abs(yes.witness) <= horizon);
        CHECK(circle_distance(rho1 + yes.witness * phi, rho2) <= eps);

        bool brute = false;
        for (std::int64_t m = -horizon; m <= horizon; ++m)
            brute = brute || circle_distance(rho1 + static_cast<double>(m) * phi, rho3) <= eps;
        const EquivVerdict other = equivalence_oracle(build(rho1, phi), build(rho3, phi), horizon, eps);
        CHECK(other.equivalent() == brute);
        if (!brute) CHECK(other.decision == Decision::NotEquivalentUpTo);
        ++done;
    }
}
