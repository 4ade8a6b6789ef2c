#include "torusflow/connection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "torusflow/errors.hpp"

namespace torusflow {

double delta(const SaddleTriple& saddles) { return saddles.s2.u_value - saddles.s3.u_value; }

double delta(const FieldParams& p, const ZeroSearch& search) {
    const auto zeros = find_zeros(p, search);
    return delta(order_saddles(zeros));
}

double delta_derivative(const SaddleTriple& saddles) {
    return du_dd(saddles.s2.point.lifted()) - du_dd(saddles.s3.point.lifted());
}

double delta_derivative(const FieldParams& p, const ZeroSearch& search) {
    const auto zeros = find_zeros(p, search);
    return delta_derivative(order_saddles(zeros));
}

ConnectionSolution solve_D(double phi, double b, double c, const ConnectionOptions& options) {
    auto saddles_at = [&](double d) {
        const auto zeros = find_zeros(FieldParams{phi, b, c, d}, options.search);
        return order_saddles(zeros);
    };

    double lo = options.d_lo;
    double hi = options.d_hi;
    const double f_lo = delta(saddles_at(lo));
    const double f_hi = delta(saddles_at(hi));
    if ((f_lo > 0.0) == (f_hi > 0.0) && f_lo != 0.0 && f_hi != 0.0) {
        std::ostringstream msg;
        msg << "connection defect has no sign change on d in [" << lo << ", " << hi
            << "] at c = " << c << " (Δ = " << f_lo << ", " << f_hi << ")";
        throw NoSignChange(msg.str());
    }
    const bool increasing = f_hi > f_lo;

    // Secant start inside the bracket.
    double d = lo - f_lo * (hi - lo) / (f_hi - f_lo);
    for (int it = 1; it <= options.max_iterations; ++it) {
        const SaddleTriple s = saddles_at(d);
        const double f = delta(s);
        if (std::abs(f) <= options.tol || hi - lo < 1e-15) {
            ConnectionSolution sol;
            sol.phi = phi;
            sol.b = b;
            sol.c = c;
            sol.d_star = d;
            sol.rho = s.s2.u_value - s.s1.u_value;
            sol.d_delta_dd = delta_derivative(s);
            sol.residual = f;
            sol.iterations = it;
            sol.saddles = s;
            return sol;
        }
        if ((f > 0.0) == increasing) hi = d; else lo = d;
        const double df = delta_derivative(s);
        double next = df != 0.0 ? d - f / df : std::numeric_limits<double>::quiet_NaN();
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        d = next;
    }
    throw NonConvergence("solve_D: no convergence within the iteration limit");
}

SeparationResult critical_value_separation(std::span<const double> critical_values,
                                           std::span<const double> targets, double min_margin) {
    SeparationResult r;
    r.margin = std::numeric_limits<double>::infinity();
    for (double v : critical_values) {
        for (double t : targets) {
            const double gap = wrap_coordinate(v - t);
            const double dist = std::min(gap, kTwoPi - gap);
            if (dist < r.margin) {
                r.margin = dist;
                r.closest_value = v;
                r.closest_target = t;
            }
        }
    }
    r.separated = r.margin > min_margin;
    return r;
}

SeparationResult critical_value_separation(std::span<const Singularity> zeros,
                                           std::span<const double> targets, double min_margin) {
    std::vector<double> values;
    values.reserve(zeros.size());
    for (const Singularity& z : zeros) values.push_back(z.u_value);
    return critical_value_separation(values, targets, min_margin);
}

std::vector<double> grid_values(double lo, double hi, int n) {
    std::vector<double> v;
    if (n <= 1) {
        v.push_back(lo);
        return v;
    }
    v.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) v.push_back(lo + (hi - lo) * k / (n - 1));
    return v;
}

namespace {

// Continues {u = level} upward from (level, 0), where u(x, 0) = x.
LevelCurveEnd cross_strip(const FieldParams& p, double level, LevelCurveOptions options) {
    const Vec2 seed{level, 0.0};
    options.orientation = grad_u(p, seed).x > 0.0 ? -1 : 1;
    options.y_min = 0.0;
    options.y_max = kTwoPi;
    return trace_level_curve(p, level, seed, options).end;
}

CellResult verify_cell(const VerifyConfig& cfg, int i, int j, double c, double d) {
    CellResult cell;
    cell.i = i;
    cell.j = j;
    cell.c = c;
    cell.d = d;
    const FieldParams p{cfg.box.phi, cfg.box.b, c, d};
    try {
        const auto zeros = find_zeros(p, cfg.search);
        cell.zero_count = static_cast<int>(zeros.size());
        cell.census = census(zeros);
        cell.zero_count_ok = cell.zero_count == cfg.expected_zeros;
        cell.census_ok = cell.census.saddles == 3 && cell.census.minima == 2 &&
                         cell.census.maxima == 1 && cell.census.min_abs_det > cfg.det_threshold;

        const double targets[] = {cfg.level_lo, cfg.level_hi};
        const auto sep = critical_value_separation(zeros, targets, cfg.margin_min);
        cell.margin = sep.margin;
        cell.level_lo_end = cross_strip(p, cfg.level_lo, cfg.level_curve);
        cell.level_hi_end = cross_strip(p, cfg.level_hi, cfg.level_curve);
        cell.strip_ok = sep.separated && cell.level_lo_end == LevelCurveEnd::ExitedTop &&
                        cell.level_hi_end == LevelCurveEnd::ExitedTop;

        cell.derivative = delta_derivative(order_saddles(zeros));
        cell.transversality_ok =
            cell.derivative >= cfg.derivative_lo && cell.derivative <= cfg.derivative_hi;
    } catch (const Error& e) {
        cell.error = e.what();
    }
    return cell;
}

}  // namespace

VerificationReport verify_parameter_box(const VerifyConfig& cfg) {
    VerificationReport report;
    report.config = cfg;
    const auto cs = grid_values(cfg.box.c_lo, cfg.box.c_hi, cfg.grid_n);
    const auto ds = grid_values(cfg.box.d_lo, cfg.box.d_hi, cfg.grid_n);

    for (int i = 0; i < static_cast<int>(cs.size()); ++i) {
        for (int j = 0; j < static_cast<int>(ds.size()); ++j) {
            report.cells.push_back(verify_cell(cfg, i, j, cs[i], ds[j]));
        }
    }

    ConnectionOptions copt;
    copt.search = cfg.search;
    copt.d_lo = cfg.box.d_lo;
    copt.d_hi = cfg.box.d_hi;
    copt.tol = cfg.connection_tol;
    for (int i = 0; i < static_cast<int>(cs.size()); ++i) {
        ConnectionRow row;
        row.i = i;
        row.c = cs[i];
        try {
            row.solution = solve_D(cfg.box.phi, cfg.box.b, cs[i], copt);
            row.ok = row.solution->d_star >= cfg.box.d_lo && row.solution->d_star <= cfg.box.d_hi &&
                     row.solution->d_delta_dd > 0.0;
        } catch (const Error& e) {
            row.error = e.what();
        }
        report.connections.push_back(std::move(row));
    }

    auto cell_check = [&](const char* name, bool CellResult::*flag) {
        CheckOutcome out;
        out.name = name;
        for (const CellResult& c : report.cells) {
            if (!(c.*flag)) ++out.failures;
        }
        out.pass = out.failures == 0 && !report.cells.empty();
        out.detail = std::to_string(report.cells.size() - out.failures) + "/" +
                     std::to_string(report.cells.size()) + " cells";
        return out;
    };
    report.checks.push_back(cell_check("zero_count", &CellResult::zero_count_ok));
    report.checks.push_back(cell_check("hyperbolic_census", &CellResult::census_ok));
    report.checks.push_back(cell_check("strip_division", &CellResult::strip_ok));
    report.checks.push_back(cell_check("transversality", &CellResult::transversality_ok));

    {
        CheckOutcome out;
        out.name = "connection_surface";
        for (const ConnectionRow& r : report.connections) {
            if (!r.ok) ++out.failures;
        }
        out.pass = out.failures == 0 && !report.connections.empty();
        out.detail = std::to_string(report.connections.size() - out.failures) + "/" +
                     std::to_string(report.connections.size()) + " c values";
        report.checks.push_back(out);
    }
    {
        CheckOutcome out;
        out.name = "rho_nonconstant";
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        int solved = 0;
        for (const ConnectionRow& r : report.connections) {
            if (!r.solution) continue;
            lo = std::min(lo, r.solution->rho);
            hi = std::max(hi, r.solution->rho);
            ++solved;
        }
        const double spread = solved > 0 ? hi - lo : 0.0;
        out.pass = solved >= 2 && spread > cfg.rho_min_spread;
        out.failures = out.pass ? 0 : 1;
        std::ostringstream detail;
        detail.precision(6);
        detail << std::fixed << "spread " << spread;
        out.detail = detail.str();
        report.checks.push_back(out);
    }

    report.pass = std::all_of(report.checks.begin(), report.checks.end(),
                              [](const CheckOutcome& c) { return c.pass; });
    return report;
}

}  // namespace torusflow
