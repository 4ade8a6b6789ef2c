#include "torusflow/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "torusflow/errors.hpp"

namespace torusflow {

CircleMapLift CircleMapLift::from_function(Function f) { return CircleMapLift(std::move(f)); }

CircleMapLift CircleMapLift::rotation(double alpha) {
    return CircleMapLift([alpha](double x) { return x + alpha; });
}

CircleMapLift CircleMapLift::from_samples(std::vector<double> xs, std::vector<double> values) {
    if (xs.size() != values.size() || xs.size() < 2) {
        throw PreconditionViolated("circle map table needs at least two (x, F(x)) pairs");
    }
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (xs[k] < 0.0 || xs[k] >= 1.0 || (k > 0 && xs[k] <= xs[k - 1])) {
            throw PreconditionViolated("circle map table abscissae must increase within [0, 1)");
        }
    }
    // Close the table periodically: (xs[0] + 1, values[0] + 1).
    xs.push_back(xs.front() + 1.0);
    values.push_back(values.front() + 1.0);
    return CircleMapLift([xs = std::move(xs), values = std::move(values)](double x) {
        const double shift = std::floor(x - xs.front());
        const double r = x - shift;   // in [xs[0], xs[0] + 1)
        auto it = std::upper_bound(xs.begin(), xs.end(), r);
        const std::size_t k = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(
            it - xs.begin(), 1, static_cast<std::ptrdiff_t>(xs.size()) - 1));
        const double s = (r - xs[k - 1]) / (xs[k] - xs[k - 1]);
        return values[k - 1] + s * (values[k] - values[k - 1]) + shift;
    });
}

void CircleMapLift::validate(int samples, double tol) const {
    double prev = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
        const double x = static_cast<double>(k) / samples;
        const double fx = f_(x);
        if (!(fx > prev)) {
            std::ostringstream msg;
            msg << "lift is not strictly increasing near x = " << x;
            throw NotMonotone(msg.str());
        }
        if (std::abs(f_(x + 1.0) - fx - 1.0) > tol) {
            std::ostringstream msg;
            msg << "lift violates F(x + 1) = F(x) + 1 at x = " << x;
            throw NotMonotone(msg.str());
        }
        prev = fx;
    }
    if (!(f_(1.0) > prev)) throw NotMonotone("lift is not increasing across x = 1");
}

std::vector<Convergent> convergents(double alpha, int depth) {
    std::vector<Convergent> out;
    if (!std::isfinite(alpha) || depth < 0) return out;
    // p_{-1}/q_{-1} = 1/0, p_{-2}/q_{-2} = 0/1.
    std::int64_t p_prev = 1, q_prev = 0;
    std::int64_t p_prev2 = 0, q_prev2 = 1;
    long double x = alpha;
    constexpr double kLimit = 1e15;
    for (int k = 0; k <= depth; ++k) {
        const long double a = std::floor(x);
        if (std::abs(static_cast<double>(a)) > kLimit) break;
        const auto ai = static_cast<std::int64_t>(a);
        const double p_next = static_cast<double>(ai) * p_prev + p_prev2;
        const double q_next = static_cast<double>(ai) * q_prev + q_prev2;
        if (std::abs(p_next) > kLimit || q_next > kLimit) break;
        const std::int64_t p = ai * p_prev + p_prev2;
        const std::int64_t q = ai * q_prev + q_prev2;
        out.push_back({p, q});
        p_prev2 = p_prev;
        q_prev2 = q_prev;
        p_prev = p;
        q_prev = q;
        const long double frac = x - a;
        const double err = std::abs(alpha - static_cast<double>(p) / static_cast<double>(q));
        if (err <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(alpha)) ||
            frac <= 0.0L) {
            break;
        }
        x = 1.0L / frac;
    }
    return out;
}

RotationEstimate rotation_number(const CircleMapLift& lift, double x0, int n_iters) {
    if (n_iters < 1) throw PreconditionViolated("rotation_number: n_iters must be >= 1");
    lift.validate();
    double x = x0;
    for (int k = 0; k < n_iters; ++k) x = lift(x);
    RotationEstimate est;
    est.iterations = n_iters;
    est.value = (x - x0) / n_iters;
    est.error_bound = 1.0 / n_iters;
    for (const Convergent& c : convergents(est.value, 64)) {
        est.convergent = c;
        if (std::abs(est.value - c.value()) <= est.error_bound) break;
    }
    return est;
}

double circle_distance(double a, double b) {
    double r = std::fmod(a - b, 1.0);
    if (r < 0.0) r += 1.0;
    return std::min(r, 1.0 - r);
}

const char* to_string(Decision d) {
    switch (d) {
        case Decision::Equivalent: return "Equivalent";
        case Decision::NotEquivalentUpTo: return "NotEquivalentUpTo";
        case Decision::NotEquivalent: return "NotEquivalent";
    }
    return "unknown";
}

EquivVerdict e_phi_equiv(double rho1, double rho2, double phi, std::int64_t horizon, double eps) {
    if (horizon < 0) throw PreconditionViolated("e_phi_equiv: horizon must be >= 0");
    if (!(eps > 0.0)) throw PreconditionViolated("e_phi_equiv: eps must be positive");
    EquivVerdict v;
    v.horizon = horizon;
    v.residual = std::numeric_limits<double>::infinity();
    const long double shift = static_cast<long double>(rho2) - rho1;
    auto residual = [&](std::int64_t n) {
        long double r = std::fmod(shift - static_cast<long double>(n) * phi, 1.0L);
        if (r < 0.0L) r += 1.0L;
        return static_cast<double>(std::min(r, 1.0L - r));
    };
    // Order 0, 1, -1, 2, -2, ... so strict improvement implements the tie-break.
    for (std::int64_t m = 0; m <= horizon; ++m) {
        for (std::int64_t n : {m, -m}) {
            if (m == 0 && n != 0) continue;
            const double r = residual(n);
            if (r < v.residual) {
                v.residual = r;
                v.witness = n;
            }
        }
    }
    v.decision = v.residual <= eps ? Decision::Equivalent : Decision::NotEquivalentUpTo;
    if (!v.equivalent()) v.witness = 0;
    return v;
}

bool orbit_membership(double rho, double phi, std::int64_t horizon, double eps) {
    return e_phi_equiv(0.0, rho, phi, horizon, eps).equivalent();
}

}  // namespace torusflow
