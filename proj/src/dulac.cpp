#include "torusflow/dulac.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "torusflow/errors.hpp"

namespace torusflow {

SaddleModel linear_saddle(double lambda_stable, double lambda_unstable) {
    if (!(lambda_stable < 0.0 && lambda_unstable > 0.0)) {
        throw PreconditionViolated("linear saddle needs lambda_stable < 0 < lambda_unstable");
    }
    SaddleModel m;
    std::ostringstream name;
    name << "linear(" << lambda_stable << "," << lambda_unstable << ")";
    m.name = name.str();
    m.field = [lambda_stable, lambda_unstable](Vec2 q) {
        return Vec2{lambda_unstable * q.x, lambda_stable * q.y};
    };
    m.mu_true = -lambda_stable / lambda_unstable;
    return m;
}

SaddleModel perturbed_saddle(double mu, double coupling) {
    if (!(mu > 0.0)) throw PreconditionViolated("perturbed saddle needs mu > 0");
    SaddleModel m;
    std::ostringstream name;
    name << "perturbed(" << mu << "," << coupling << ")";
    m.name = name.str();
    m.field = [mu, coupling](Vec2 q) { return Vec2{q.x, -mu * q.y + coupling * q.x * q.y}; };
    m.mu_true = mu;
    return m;
}

SaddleModel analytic_family_saddle(const FieldParams& p, const Singularity& saddle) {
    if (!saddle.is_saddle()) throw KindMismatch("analytic_family_saddle needs a saddle");
    const Vec2 origin = saddle.point.lifted();
    const Vec2 eu = saddle.unstable_direction;
    const Vec2 es = saddle.stable_direction;
    // q = origin + B (ξ, η), B = [eu es].
    const Mat2 basis{eu.x, es.x, eu.y, es.y};
    const double det = basis.det();
    const Mat2 inverse{basis.d / det, -basis.b / det, -basis.c / det, basis.a / det};

    SaddleModel m;
    std::ostringstream name;
    name << "analytic(" << saddle.point.x << "," << saddle.point.y << ")";
    m.name = name.str();
    m.field = [p, origin, basis, inverse](Vec2 local) {
        return inverse * field_at(p, origin + basis * local);
    };
    m.mu_true = characteristic_number(saddle);
    // origin + B (ξ, η) rounds at the scale of |origin|; v inherits that error.
    m.atol_floor = 1e-14;
    return m;
}

namespace {

double crossing(const SaddleModel& model, Vec2 start, int direction,
                std::function<double(Vec2)> transversal, bool want_x,
                const IntegratorOptions& options) {
    StopSpec stop;
    stop.transversal = std::move(transversal);
    stop.metric_period = 0.0;
    const Trajectory t = integrate(model.field, start, direction, stop, options);
    if (t.terminal_event != StopEvent::Transversal) {
        throw NonConvergence("Dulac trajectory did not reach its exit transversal");
    }
    return want_x ? t.back().point.x : t.back().point.y;
}

}  // namespace

std::vector<DulacSample> dulac_samples(const SaddleModel& model, double h, std::span<const double> xs,
                                       const DulacOptions& options) {
    if (!(h > 0.0)) throw PreconditionViolated("dulac_samples: h must be positive");
    for (double x : xs) {
        if (!(x > 0.0 && x <= h / 10.0 * (1.0 + 1e-12))) {
            std::ostringstream msg;
            msg << "dulac_samples: x = " << x << " outside (0, h/10]";
            throw PreconditionViolated(msg.str());
        }
    }
    const double delta = options.launch_offset * h;
    IntegratorOptions io = options.integrator;
    io.atol = std::max(io.atol, model.atol_floor);
    auto entry = [h](Vec2 q) { return q.y - h; };
    auto exit = [h](Vec2 q) { return q.x - h; };

    // Where the stable separatrix meets {η = h} and the unstable one meets {ξ = h}.
    const double stable_foot = crossing(model, {0.0, delta}, -1, entry, true, io);
    const double unstable_foot = crossing(model, {delta, 0.0}, 1, exit, false, io);

    std::vector<DulacSample> out;
    out.reserve(xs.size());
    for (double x : xs) {
        const double y_exit = crossing(model, {stable_foot + x, h}, 1, exit, false, io);
        out.push_back({x, y_exit - unstable_foot});
    }
    return out;
}

DulacFit fit_exponent(std::span<const DulacSample> samples, double mu_true) {
    if (samples.size() < 8) throw PreconditionViolated("fit_exponent needs at least 8 samples");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    DulacFit fit;
    fit.mu_true = mu_true;
    fit.count = samples.size();
    fit.x_min = samples.front().x;
    fit.x_max = samples.front().x;
    for (const DulacSample& s : samples) {
        if (!(s.x > 0.0 && s.y > 0.0)) {
            std::ostringstream msg;
            msg << "fit_exponent: non-positive sample (" << s.x << ", " << s.y << ")";
            throw NonPositiveSample(msg.str());
        }
        const double lx = std::log(s.x);
        const double ly = std::log(s.y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        fit.x_min = std::min(fit.x_min, s.x);
        fit.x_max = std::max(fit.x_max, s.x);
    }
    const double n = static_cast<double>(samples.size());
    const double mx = sx / n;
    const double my = sy / n;
    const double var = sxx / n - mx * mx;
    if (!(var > 0.0)) throw PreconditionViolated("fit_exponent needs distinct x values");
    fit.mu_hat = (sxy / n - mx * my) / var;
    const double intercept = my - fit.mu_hat * mx;
    fit.c_hat = std::exp(intercept);
    for (const DulacSample& s : samples) {
        const double dev = std::abs(std::log(s.y) - (intercept + fit.mu_hat * std::log(s.x)));
        fit.residual = std::max(fit.residual, dev);
    }
    return fit;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
    std::vector<double> v;
    if (n <= 0) return v;
    if (n == 1) return {lo};
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (int k = 0; k < n; ++k) v.push_back(std::exp(a + (b - a) * k / (n - 1)));
    v.front() = lo;
    v.back() = hi;
    return v;
}

std::vector<bool> codim_check(std::span<const SaddlePair> pairs, double tol) {
    std::vector<bool> out;
    out.reserve(pairs.size());
    for (const SaddlePair& p : pairs) out.push_back(std::abs(p.mu * p.nu - 1.0) <= tol);
    return out;
}

std::vector<SaddlePair> saddle_pairs(const SaddleTriple& s) {
    return {{characteristic_number(s.s1), characteristic_number(s.s1)},
            {characteristic_number(s.s2), characteristic_number(s.s3)}};
}

}  // namespace torusflow
