// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "torusflow/cli.hpp"
#include "torusflow/connection.hpp"
#include "torusflow/dulac.hpp"
#include "torusflow/errors.hpp"
#include "torusflow/flow.hpp"
#include "torusflow/rotation.hpp"
#include "torusflow/singularity.hpp"
#include "torusflow/synthetic.hpp"

using namespace torusflow;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double v, const char* format = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

double circle_gap(double a, double b) {
    const double r = wrap_coordinate(a - b);
    return std::min(r, kTwoPi - r);
}

double mod1(double x) {
    const double r = x - std::floor(x);
    return r >= 1.0 ? 0.0 : r;
}

const ConnectionSolution& surface_at_c1() {
    static const ConnectionSolution sol = solve_D(1.0 / 3.0, 2.0, 1.0);
    return sol;
}

Outcome zero_census() {
    int bad = 0;
    double min_det = 1e300;
    for (double c : grid_values(0.7, 1.1, 9)) {
        for (double d : grid_values(0.9, 1.3, 9)) {
            const auto zeros = find_zeros(FieldParams{1.0 / 3.0, 2.0, c, d});
            const ZeroCensus k = census(zeros);
            min_det = std::min(min_det, k.min_abs_det);
            if (zeros.size() != 6 || k.saddles != 3 || k.minima != 2 || k.maxima != 1 || !(k.min_abs_det > 2.0))
                ++bad;
        }
    }
    return {bad == 0, "81 vertices, " + std::to_string(bad) + " off census, min |det J| = " + num(min_det)};
}

Outcome connection_surface() {
    const ConnectionSolution a = solve_D(1.0 / 3.0, 2.0, 0.7);
    const ConnectionSolution b = solve_D(1.0 / 3.0, 2.0, 1.1);
    const bool ok = std::abs(a.d_star - 1.23) <= 0.01 && std::abs(a.rho - 3.40) <= 0.01 &&
                    std::abs(b.d_star - 0.92) <= 0.01 && std::abs(b.rho - 3.62) <= 0.01;
    return {ok, "c=0.7: d*=" + num(a.d_star, "%.6f") + " rho=" + num(a.rho, "%.6f") + "; c=1.1: d*=" +
                    num(b.d_star, "%.6f") + " rho=" + num(b.rho, "%.6f")};
}

Outcome transversality() {
    const double h = 1e-5;
    double lo = 1e300, hi = -1e300, worst_fd = 0.0;
    for (double c : grid_values(0.7, 1.1, 9)) {
        for (double d : grid_values(0.9, 1.3, 9)) {
            const FieldParams p{1.0 / 3.0, 2.0, c, d};
            const double dd = delta_derivative(p);
            lo = std::min(lo, dd);
            hi = std::max(hi, dd);
            const double fd = (delta({p.phi, p.b, c, d + h}) - delta({p.phi, p.b, c, d - h})) / (2 * h);
            worst_fd = std::max(worst_fd, std::abs(dd - fd));
        }
    }
    const bool ok = lo >= 2.05 && hi <= 2.15 && worst_fd < 1e-6;
    return {ok, "range [" + num(lo, "%.6f") + ", " + num(hi, "%.6f") + "], max |analytic - FD| = " + num(worst_fd, "%.2e")};
}

Outcome poincare_rotation() {
    const ConnectionSolution& sol = surface_at_c1();
    const PoincareSection section(sol.params());
    double worst = 0.0;
    for (int k = 0; k < 32; ++k) {
        const double x0 = (k + 0.37) * kTwoPi / 32;
        worst = std::max(worst, circle_gap(section(x0), x0 + kTwoPi / 3.0));
    }
    return {worst < 1e-6, "d = D(1) = " + num(sol.d_star, "%.10f") + ", 32 samples, max error " + num(worst, "%.2e")};
}

Outcome dulac_exponents() {
    const auto xs = log_spaced(1e-5, 1e-2, 16);
    double worst_linear = 0.0;
    for (double mu : {0.5, 1.0, 3.0}) {
        // mu = |lambda_s| / lambda_u
        const SaddleModel m = mu < 1.0 ? linear_saddle(-1.0, 2.0) : linear_saddle(-mu, 1.0);
        const DulacFit fit = fit_exponent(dulac_samples(m, 1.0, xs), m.mu_true);
        worst_linear = std::max(worst_linear, std::abs(fit.mu_hat - mu));
    }
    double worst_rel = 0.0;
    for (double mu : {0.5, 1.0, 2.0}) {
        const DulacFit fit = fit_exponent(dulac_samples(perturbed_saddle(mu), 1.0, log_spaced(1e-6, 1e-3, 16)), mu);
        worst_rel = std::max(worst_rel, std::abs(fit.mu_hat - mu) / mu);
    }
    const bool ok = worst_linear <= 1e-6 && worst_rel <= 0.02;
    return {ok, "linear max |mu_hat - mu| = " + num(worst_linear, "%.2e") + ", perturbed max relative error " +
                    num(worst_rel, "%.2e")};
}

Outcome synthetic_oracle() {
    testing_support::Rng rng(1006);
    const std::int64_t horizon = 100;
    const double eps = 1e-9;
    auto off_orbit = [&](double rho, double phi) {
        for (std::int64_t m = -horizon; m <= horizon; ++m)
            if (circle_distance(rho, static_cast<double>(m) * phi) <= 1e-6) return false;
        return true;
    };
    auto brute = [&](double a, double b, double phi) {
        for (std::int64_t m = -horizon; m <= horizon; ++m)
            if (circle_distance(a + static_cast<double>(m) * phi, b) <= eps) return true;
        return false;
    };
    int cases = 0, wrong = 0, not_up_to = 0;
    while (cases < 200) {
        const double phi = rng.uniform(0.01, 0.99);
        const double rho1 = rng.uniform(0, 1);
        const auto n = rng.integer(-20, 20);
        const double rho2 = mod1(rho1 + n * phi);
        const double rho3 = mod1(rho2 + rng.uniform(1e-3, 1e-1));
        if (!off_orbit(rho1, phi) || !off_orbit(rho2, phi) || !off_orbit(rho3, phi)) continue;
        if (brute(rho1, rho3, phi)) continue;   // the shifted point must stay away from the orbit

        const EquivVerdict yes = equivalence_oracle(build(rho1, phi), build(rho2, phi), horizon, eps);
        const EquivVerdict no = equivalence_oracle(build(rho1, phi), build(rho3, phi), horizon, eps);
        const bool yes_ok = yes.decision == Decision::Equivalent && brute(rho1, rho2, phi) &&
                            circle_distance(rho1 + yes.witness * phi, rho2) <= eps;
        const bool no_ok = no.decision == Decision::NotEquivalentUpTo && no.horizon == horizon;
        not_up_to += no_ok ? 1 : 0;
        wrong += (yes_ok && no_ok) ? 0 : 1;
        ++cases;
    }
    return {wrong == 0, std::to_string(cases) + " cases, " + std::to_string(not_up_to) +
                            " NotEquivalentUpTo(100) confirmed by scan, " + std::to_string(wrong) + " disagreements"};
}

// Arc of R/Z as intervals of [0, 1), from its endpoints only.
std::vector<std::pair<double, double>> pieces(const Arc& a) {
    const double s = mod1(a.center - a.half_width);
    const double e = mod1(a.center + a.half_width);
    if (s <= e) return {{s, e}};
    return {{s, 1.0}, {0.0, e}};
}

Outcome decompositions() {
    testing_support::Rng rng(1007);
    int done = 0, overlaps = 0;
    double min_gap = 1.0;
    while (done < 100) {
        const double phi = rng.uniform(0.01, 0.99);
        const double rho2 = rng.uniform(0, 1);
        const auto n = rng.integer(0, 10);
        IntervalDecomposition dec;
        try {
            dec = decomposition(mod1(rho2 + n * phi), rho2, phi, n);
        } catch (const DegenerateSpacing&) {
            continue;
        }
        const auto arcs = dec.all_arcs();
        for (std::size_t i = 0; i < arcs.size(); ++i) {
            for (std::size_t j = i + 1; j < arcs.size(); ++j) {
                for (const auto& [s1, e1] : pieces(arcs[i])) {
                    for (const auto& [s2, e2] : pieces(arcs[j])) {
                        const double gap = std::max(s1, s2) - std::min(e1, e2);
                        min_gap = std::min(min_gap, gap);
                        if (gap <= 0.0) ++overlaps;
                    }
                }
            }
        }
        ++done;
    }
    return {overlaps == 0, "100 decompositions, " + std::to_string(overlaps) + " overlapping pairs, smallest gap " +
                               num(min_gap, "%.2e")};
}

Outcome hygiene() {
    // Conservation over the trajectories this run integrates.
    double drift = 0.0;
    int trajectories = 0;
    const ConnectionSolution& sol = surface_at_c1();
    const FieldParams p = sol.params();
    const PoincareSection section(p);
    for (int k = 0; k < 32; ++k) {
        drift = std::max(drift, max_energy_drift(p, section.return_trajectory((k + 0.37) * kTwoPi / 32)));
        ++trajectories;
    }
    const auto zeros = find_zeros(p);
    for (const Singularity& z : zeros) {
        if (!z.is_saddle()) continue;
        for (Branch b : kAllBranches) {
            drift = std::max(drift, max_energy_drift(p, trace_separatrix(p, zeros, z, b, 1).trajectory));
            ++trajectories;
        }
    }
    testing_support::Rng rng(1008);
    while (trajectories < 100) {
        const FieldParams q{1.0 / 3.0, 2.0, rng.uniform(0.7, 1.1), rng.uniform(0.9, 1.3)};
        const Vec2 start = rng.point(0.0, kTwoPi);
        if (norm(field_at(q, start)) < 0.05) continue;
        StopSpec s;
        s.t_max = 15.0;
        drift = std::max(drift, max_energy_drift(q, integrate(analytic_field(q), start, rng.uniform(0, 1) < 0.5 ? -1 : 1, s)));
        ++trajectories;
    }

    // Analytic Jacobians against finite differences of the field.
    double jac = 0.0;
    for (int k = 0; k < 200; ++k) {
        const FieldParams q = rng.params();
        const Vec2 at = rng.point();
        const Mat2 fd = testing_support::numeric_jacobian([&](Vec2 z) { return field_at(q, z); }, at);
        jac = std::max(jac, testing_support::max_abs_diff(jacobian(q, at), fd));
    }

    // verify twice, byte for byte.
    std::ostringstream first, second, err;
    const int c1 = cli::run({"verify"}, first, err);
    const int c2 = cli::run({"verify"}, second, err);
    const bool same = c1 == 0 && c2 == 0 && first.str() == second.str() && !first.str().empty();

    const bool ok = drift < 1e-8 && jac < 1e-6 && same;
    return {ok, std::to_string(trajectories) + " trajectories, max drift " + num(drift, "%.2e") +
                    "; max Jacobian error " + num(jac, "%.2e") + "; verify output " +
                    (same ? "identical" : "DIFFERS or fails")};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"zero census on the 9x9 box", zero_census},
        {"connection surface D(c), rho(c)", connection_surface},
        {"transversality derivative", transversality},
        {"Poincare map on the connection surface", poincare_rotation},
        {"Dulac exponents", dulac_exponents},
        {"synthetic equivalence oracle", synthetic_oracle},
        {"interval decomposition", decompositions},
        {"conservation and numerical hygiene", hygiene},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += o.pass ? 0 : 1;
        std::printf("%s %zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
