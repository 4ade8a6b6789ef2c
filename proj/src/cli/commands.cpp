#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "torusflow/cli.hpp"
#include "torusflow/connection.hpp"
#include "torusflow/dulac.hpp"
#include "torusflow/errors.hpp"
#include "torusflow/flow.hpp"
#include "torusflow/portrait.hpp"
#include "torusflow/rotation.hpp"
#include "torusflow/singularity.hpp"
#include "torusflow/synthetic.hpp"
#include "torusflow/text.hpp"

namespace torusflow::cli {

namespace {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

Range parse_range(const std::string& text, const char* flag) {
    const auto sep = text.find_first_of(":,");
    if (sep == std::string::npos) throw UsageError(std::string(flag) + " expects LO:HI");
    try {
        std::size_t used = 0;
        const std::string a = text.substr(0, sep);
        const std::string b = text.substr(sep + 1);
        Range r{std::stod(a, &used), 0.0};
        if (used != a.size()) throw std::invalid_argument(a);
        r.hi = std::stod(b, &used);
        if (used != b.size()) throw std::invalid_argument(b);
        if (!(r.lo <= r.hi)) throw UsageError(std::string(flag) + " needs LO <= HI");
        return r;
    } catch (const std::logic_error&) {
        throw UsageError(std::string(flag) + " expects LO:HI, got '" + text + "'");
    }
}

std::string range_text(Range r) { return exact(r.lo) + ":" + exact(r.hi); }

/// "Equivalent(n)", "NotEquivalentUpTo(N)" or the bare decision.
std::string verdict_text(const EquivVerdict& v) {
    if (v.equivalent()) return std::string(to_string(v.decision)) + "(" + std::to_string(v.witness) + ")";
    if (v.decision == Decision::NotEquivalentUpTo)
        return std::string(to_string(v.decision)) + "(" + std::to_string(v.horizon) + ")";
    return to_string(v.decision);
}

/// Sends a finished document to --out, to $TORUSFLOW_OUT_DIR/<default_name>, or to stdout.
void emit(const std::string& content, const std::string& out_path, const std::string& default_name,
          std::ostream& out) {
    std::filesystem::path target;
    if (!out_path.empty()) {
        target = out_path;
    } else if (const char* dir = std::getenv(kOutDirEnv); dir != nullptr && *dir != '\0') {
        target = std::filesystem::path(dir) / default_name;
    } else {
        out << content;
        return;
    }
    std::ofstream file(target, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot open output file: " + target.string());
    file << content;
    file.close();
    if (!file) throw IoError("failed writing output file: " + target.string());
    out << "wrote " << target.string() << "\n";
}

struct FieldFlags {
    double phi = 1.0 / 3.0;
    double b = 2.0;
    double c = 1.0;
    double d = 1.0016;

    void add(CLI::App* app) {
        app->add_option("--phi", phi, "Rotation parameter phi")->capture_default_str();
        app->add_option("--b", b, "Coefficient b")->capture_default_str();
        app->add_option("--c", c, "Coefficient c")->capture_default_str();
        app->add_option("--d", d, "Coefficient d")->capture_default_str();
    }
    FieldParams params() const { return {phi, b, c, d}; }
    void record(Settings& s) const {
        s.emplace_back("phi", exact(phi));
        s.emplace_back("b", exact(b));
        s.emplace_back("c", exact(c));
        s.emplace_back("d", exact(d));
    }
};

void record_integrator(Settings& s, const IntegratorOptions& o, const std::string& prefix = "integrator.") {
    s.emplace_back(prefix + "rtol", exact(o.rtol));
    s.emplace_back(prefix + "atol", exact(o.atol));
    s.emplace_back(prefix + "initial_step", exact(o.initial_step));
    s.emplace_back(prefix + "max_step", exact(o.max_step));
    s.emplace_back(prefix + "max_steps", std::to_string(o.max_steps));
}

std::string kv(const std::string& key, const std::string& value) { return key + "=" + value + "\n"; }
const char* yes_no(bool b) { return b ? "true" : "false"; }

// ---------------------------------------------------------------------------

struct VerifyCmd {
    double phi = 1.0 / 3.0;
    double b = 2.0;
    std::string c_range = "0.7:1.1";
    std::string d_range = "0.9:1.3";
    int grid_n = 9;
    int mesh_n = 32;
    double tol = 1e-12;
    double connection_tol = 1e-10;
    std::string out;
    std::string csv;

    void add(CLI::App* app) {
        app->add_option("--phi", phi, "Rotation parameter phi")->capture_default_str();
        app->add_option("--b", b, "Coefficient b")->capture_default_str();
        app->add_option("--c-range", c_range, "c interval LO:HI")->capture_default_str();
        app->add_option("--d-range", d_range, "d interval LO:HI")->capture_default_str();
        app->add_option("--grid-n", grid_n, "Grid points per axis")->capture_default_str()->check(CLI::PositiveNumber);
        app->add_option("--mesh-n", mesh_n, "Zero-search seed mesh per axis")->capture_default_str()->check(CLI::PositiveNumber);
        app->add_option("--tol", tol, "Newton tolerance of the zero search")->capture_default_str()->check(CLI::PositiveNumber);
        app->add_option("--connection-tol", connection_tol, "Tolerance of the D(c) solve")->capture_default_str()->check(CLI::PositiveNumber);
        app->add_option("--out", out, "Report path (default: stdout or $TORUSFLOW_OUT_DIR/verify_report.txt)");
        app->add_option("--csv", csv, "Optional per-cell CSV path");
    }

    int run(std::ostream& out_stream) const {
        VerifyConfig cfg;
        const Range cr = parse_range(c_range, "--c-range");
        const Range dr = parse_range(d_range, "--d-range");
        cfg.box = {phi, b, cr.lo, cr.hi, dr.lo, dr.hi};
        cfg.grid_n = grid_n;
        cfg.search = {mesh_n, tol};
        cfg.connection_tol = connection_tol;

        Settings s;
        s.emplace_back("phi", exact(phi));
        s.emplace_back("b", exact(b));
        s.emplace_back("c_range", range_text(cr));
        s.emplace_back("d_range", range_text(dr));
        s.emplace_back("grid_n", std::to_string(grid_n));
        s.emplace_back("mesh_n", std::to_string(mesh_n));
        s.emplace_back("tol", exact(tol));
        s.emplace_back("connection_tol", exact(connection_tol));
        s.emplace_back("expected_zeros", std::to_string(cfg.expected_zeros));
        s.emplace_back("det_threshold", exact(cfg.det_threshold));
        s.emplace_back("derivative_range", exact(cfg.derivative_lo) + ":" + exact(cfg.derivative_hi));
        s.emplace_back("margin_min", exact(cfg.margin_min));
        s.emplace_back("rho_min_spread", exact(cfg.rho_min_spread));
        s.emplace_back("levels", exact(cfg.level_lo) + "," + exact(cfg.level_hi));
        s.emplace_back("strip", "0<y<2pi");   // the strip between two lifts of the meridian
        s.emplace_back("level_curve.corrector_tol", exact(cfg.level_curve.corrector_tol));
        s.emplace_back("level_curve.max_step", exact(cfg.level_curve.max_step));
        s.emplace_back("level_curve.arc_budget", exact(cfg.level_curve.arc_budget));

        const VerificationReport report = verify_parameter_box(cfg);

        std::string doc = comment_header("verify", s);
        doc += kv("pass", yes_no(report.pass));
        for (const CheckOutcome& c : report.checks) {
            doc += kv("check." + c.name + ".pass", yes_no(c.pass));
            doc += kv("check." + c.name + ".failures", std::to_string(c.failures));
            doc += kv("check." + c.name + ".detail", c.detail);
        }
        double min_det = 1e300, dmin = 1e300, dmax = -1e300, margin = 1e300;
        for (const CellResult& cell : report.cells) {
            if (!cell.error.empty()) continue;
            min_det = std::min(min_det, cell.census.min_abs_det);
            dmin = std::min(dmin, cell.derivative);
            dmax = std::max(dmax, cell.derivative);
            margin = std::min(margin, cell.margin);
        }
        doc += kv("cells", std::to_string(report.cells.size()));
        doc += kv("summary.min_abs_det", fixed(min_det, 6));
        doc += kv("summary.derivative_min", fixed(dmin, 6));
        doc += kv("summary.derivative_max", fixed(dmax, 6));
        doc += kv("summary.level_margin_min", fixed(margin, 6));
        for (const CellResult& cell : report.cells) {
            if (cell.error.empty()) continue;
            doc += kv("cell." + std::to_string(cell.i) + "." + std::to_string(cell.j) + ".error", cell.error);
        }
        for (const ConnectionRow& row : report.connections) {
            const std::string key = "connection." + std::to_string(row.i);
            doc += kv(key + ".c", fixed(row.c, 6));
            doc += kv(key + ".ok", yes_no(row.ok));
            if (row.solution) {
                doc += kv(key + ".d_star", fixed(row.solution->d_star, 10));
                doc += kv(key + ".rho", fixed(row.solution->rho, 10));
                doc += kv(key + ".d_delta_dd", fixed(row.solution->d_delta_dd, 10));
            }
            if (!row.error.empty()) doc += kv(key + ".error", row.error);
        }

        if (!csv.empty()) {
            std::string table = comment_header("verify", s);
            table += "i,j,c,d,zeros,saddles,minima,maxima,min_abs_det,level_margin,derivative,d_star,rho\n";
            for (const CellResult& cell : report.cells) {
                const ConnectionRow* row = nullptr;
                for (const ConnectionRow& r : report.connections)
                    if (r.i == cell.i) row = &r;
                const bool solved = row != nullptr && row->solution.has_value();
                table += std::to_string(cell.i) + "," + std::to_string(cell.j) + "," + fixed(cell.c, 6) + "," +
                         fixed(cell.d, 6) + "," + std::to_string(cell.zero_count) + "," +
                         std::to_string(cell.census.saddles) + "," + std::to_string(cell.census.minima) + "," +
                         std::to_string(cell.census.maxima) + "," + fixed(cell.census.min_abs_det, 6) + "," +
                         fixed(cell.margin, 6) + "," + fixed(cell.derivative, 6) + "," +
                         (solved ? fixed(row->solution->d_star, 10) : std::string("nan")) + "," +
                         (solved ? fixed(row->solution->rho, 10) : std::string("nan")) + "\n";
            }
            emit(table, csv, "verify_cells.csv", out_stream);
        }
        emit(doc, out, "verify_report.txt", out_stream);
        return report.pass ? kPass : kCheckFailed;
    }
};

struct PortraitCmd {
    FieldFlags field;
    int size_px = 640;
    int mesh_n = 32;
    std::string out;

    void add(CLI::App* app) {
        field.add(app);
        app->add_option("--size", size_px, "Plot size in pixels")->capture_default_str()->check(CLI::Range(64, 8192));
        app->add_option("--mesh-n", mesh_n, "Zero-search seed mesh per axis")->capture_default_str()->check(CLI::PositiveNumber);
        app->add_option("--out", out, "SVG path (default: stdout or $TORUSFLOW_OUT_DIR/portrait.svg)");
    }

    int run(std::ostream& out_stream) const {
        PortraitOptions o;
        o.size_px = size_px;
        o.search.mesh_n = mesh_n;
        Settings s;
        field.record(s);
        s.emplace_back("size", std::to_string(size_px));
        s.emplace_back("mesh_n", std::to_string(mesh_n));
        s.emplace_back("tol", exact(o.search.tol));
        s.emplace_back("levels", exact(o.level_lo) + "," + exact(o.level_hi));
        s.emplace_back("background_spacing", exact(o.background_spacing));
        s.emplace_back("separatrix.launch_offset", exact(o.separatrix.launch_offset));
        s.emplace_back("separatrix.saddle_radius", exact(o.separatrix.saddle_radius));
        record_integrator(s, o.separatrix.integrator);
        emit(render_portrait_svg(field.params(), o, s), out, "portrait.svg", out_stream);
        return kPass;
    }
};

struct SweepCmd {
    double phi = 1.0 / 3.0;
    double b = 2.0;
    std::string c_range = "0.7:1.1";
    std::string d_range = "0.9:1.3";
    int grid_n = 9;
    double tol = 1e-10;
    int mesh_n = 32;
    std::string out;

    void add(CLI::App* app) {
        app->add_option("--phi", phi, "Rotation parameter phi")->capture_default_str();
        app->add_option("--b", b, "Coefficient b")->capture_default_str();
        app->add_option("--c-range", c_range, "c interval LO:HI")->capture_default_str();
        app->add_option("--d-range", d_range, "Bracket for D(c) LO:HI")->capture_default_str();
        app->add_option("--grid-n", grid_n, "Number of c values")->capture_default_str()->check(CLI::PositiveNumber);
        app->add_option("--tol", tol, "Tolerance of the D(c) solve")->capture_default_str()->check(CLI::PositiveNumber);
        app->add_option("--mesh-n", mesh_n, "Zero-search seed mesh per axis")->capture_default_str()->check(CLI::PositiveNumber);
        app->add_option("--out", out, "CSV path (default: stdout or $TORUSFLOW_OUT_DIR/sweep.csv)");
    }

    int run(std::ostream& out_stream) const {
        const Range cr = parse_range(c_range, "--c-range");
        const Range dr = parse_range(d_range, "--d-range");
        ConnectionOptions o;
        o.d_lo = dr.lo;
        o.d_hi = dr.hi;
        o.tol = tol;
        o.search.mesh_n = mesh_n;
        Settings s;
        s.emplace_back("phi", exact(phi));
        s.emplace_back("b", exact(b));
        s.emplace_back("c_range", range_text(cr));
        s.emplace_back("d_range", range_text(dr));
        s.emplace_back("grid_n", std::to_string(grid_n));
        s.emplace_back("tol", exact(tol));
        s.emplace_back("mesh_n", std::to_string(mesh_n));
        s.emplace_back("zero_tol", exact(o.search.tol));
        s.emplace_back("max_iterations", std::to_string(o.max_iterations));

        std::string doc = comment_header("sweep", s);
        doc += "c,d_star,rho,d_delta_dd,residual,iterations\n";
        bool all_ok = true;
        for (double c : grid_values(cr.lo, cr.hi, grid_n)) {
            try {
                const ConnectionSolution sol = solve_D(phi, b, c, o);
                doc += fixed(c, 6) + "," + fixed(sol.d_star, 10) + "," + fixed(sol.rho, 10) + "," +
                       fixed(sol.d_delta_dd, 10) + "," + fixed(std::abs(sol.residual), 14) + "," +
                       std::to_string(sol.iterations) + "\n";
            } catch (const Error& e) {
                all_ok = false;
                doc += fixed(c, 6) + ",nan,nan,nan,nan,0\n";
                doc += "# c=" + fixed(c, 6) + " failed: " + e.what() + "\n";
            }
        }
        emit(doc, out, "sweep.csv", out_stream);
        return all_ok ? kPass : kCheckFailed;
    }
};

struct EquivCmd {
    double rho1 = 0.0;
    double rho2 = 0.0;
    double phi = 0.0;
    std::int64_t horizon = 10000;
    double eps = 1e-9;
    std::string out;

    void add(CLI::App* app) {
        app->add_option("rho1", rho1, "First point of R/Z")->required();
        app->add_option("rho2", rho2, "Second point of R/Z")->required();
        app->add_option("phi", phi, "Rotation parameter")->required();
        app->add_option("--horizon", horizon, "Largest |n| scanned")->capture_default_str()->check(CLI::NonNegativeNumber);
        app->add_option("--eps", eps, "Match tolerance on R/Z")->capture_default_str()->check(CLI::PositiveNumber);
        app->add_option("--out", out, "Report path (default: stdout or $TORUSFLOW_OUT_DIR/equiv.txt)");
    }

    int run(std::ostream& out_stream) const {
        Settings s;
        s.emplace_back("rho1", exact(rho1));
        s.emplace_back("rho2", exact(rho2));
        s.emplace_back("phi", exact(phi));
        s.emplace_back("horizon", std::to_string(horizon));
        s.emplace_back("eps", exact(eps));
        const EquivVerdict v = e_phi_equiv(rho1, rho2, phi, horizon, eps);
        std::string doc = comment_header("equiv", s);
        doc += kv("decision", to_string(v.decision));
        doc += kv("verdict", verdict_text(v));
        if (v.equivalent()) doc += kv("witness", std::to_string(v.witness));
        doc += kv("horizon", std::to_string(v.horizon));
        doc += kv("residual", fixed(v.residual, 15));
        emit(doc, out, "equiv.txt", out_stream);
        return kPass;
    }
};

std::vector<std::pair<double, double>> read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read table: " + path);
    std::vector<std::pair<double, double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        try {
            rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
        } catch (const std::logic_error&) {
            if (rows.empty()) continue;   // header line
            throw UsageError("malformed row in " + path + ": " + line);
        }
    }
    return rows;
}

struct RotationCmd {
    std::string map = "rigid";
    double alpha = 0.0;
    std::string table;
    int iters = 1000;
    double x0 = 0.0;
    FieldFlags field;
    std::string out;

    void add(CLI::App* app) {
        app->add_option("--map", map, "rigid | family | table")
            ->capture_default_str()
            ->check(CLI::IsMember({"rigid", "family", "table"}));
        app->add_option("--alpha", alpha, "Rotation of the rigid map (fraction of a turn)")->capture_default_str();
        app->add_option("--table", table, "CSV of x,F(x) samples on [0,1) for --map table");
        app->add_option("--iters", iters, "Number of iterates n")->capture_default_str()->check(CLI::PositiveNumber);
        app->add_option("--x0", x0, "Initial point (fraction of a turn)")->capture_default_str();
        field.add(app);
        app->add_option("--out", out, "Report path (default: stdout or $TORUSFLOW_OUT_DIR/rotation.txt)");
    }

    int run(std::ostream& out_stream) const {
        Settings s;
        s.emplace_back("map", map);
        s.emplace_back("iters", std::to_string(iters));
        s.emplace_back("x0", exact(x0));
        std::optional<CircleMapLift> lift;
        if (map == "rigid") {
            s.emplace_back("alpha", exact(alpha));
            lift = CircleMapLift::rotation(alpha);
        } else if (map == "table") {
            if (table.empty()) throw UsageError("--map table requires --table FILE");
            s.emplace_back("table", table);
            const auto rows = read_table(table);
            std::vector<double> xs, fs;
            for (const auto& [x, f] : rows) {
                xs.push_back(x);
                fs.push_back(f);
            }
            lift = CircleMapLift::from_samples(std::move(xs), std::move(fs));
        } else {
            field.record(s);
            PoincareOptions po;
            record_integrator(s, po.integrator);
            s.emplace_back("saddle_radius", exact(po.saddle_radius));
            auto section = std::make_shared<PoincareSection>(field.params(), po);
            lift = CircleMapLift::from_function(
                [section](double x) { return section->lift(x * kTwoPi) / kTwoPi; });
        }
        const RotationEstimate est = rotation_number(*lift, x0, iters);
        std::string doc = comment_header("rotation", s);
        doc += kv("rotation_number", fixed(est.value, 15));
        doc += kv("error_bound", exact(est.error_bound));
        doc += kv("convergent", std::to_string(est.convergent.p) + "/" + std::to_string(est.convergent.q));
        doc += kv("iterations", std::to_string(est.iterations));
        emit(doc, out, "rotation.txt", out_stream);
        return kPass;
    }
};

struct DulacCmd {
    std::string model = "linear";
    double lambda1 = -2.0;
    double lambda2 = 1.0;
    double mu = 2.0;
    double coupling = 0.1;
    int saddle = 1;
    FieldFlags field;
    double h = 1e-2;
    double x_min = 1e-6;
    double x_max = 1e-3;
    int samples = 16;
    std::string out;

    void add(CLI::App* app) {
        app->add_option("--model", model, "linear | perturbed | family")
            ->capture_default_str()
            ->check(CLI::IsMember({"linear", "perturbed", "family"}));
        app->add_option("--lambda1", lambda1, "Stable eigenvalue (< 0) of the linear model")->capture_default_str();
        app->add_option("--lambda2", lambda2, "Unstable eigenvalue (> 0) of the linear model")->capture_default_str();
        app->add_option("--mu", mu, "Characteristic number of the perturbed model")->capture_default_str();
        app->add_option("--coupling", coupling, "Nonlinear coupling of the perturbed model")->capture_default_str();
        app->add_option("--saddle", saddle, "Saddle index 1..3 of the analytic family")
            ->capture_default_str()
            ->check(CLI::Range(1, 3));
        field.add(app);
        app->add_option("--height", h, "Distance of the transversals from the saddle")->capture_default_str()->check(CLI::PositiveNumber);
        app->add_option("--x-min", x_min, "Smallest sample")->capture_default_str()->check(CLI::PositiveNumber);
        app->add_option("--x-max", x_max, "Largest sample (at most height/10)")->capture_default_str()->check(CLI::PositiveNumber);
        app->add_option("--samples", samples, "Number of log-spaced samples")->capture_default_str()->check(CLI::Range(8, 100000));
        app->add_option("--out", out, "CSV path (default: stdout or $TORUSFLOW_OUT_DIR/dulac.csv)");
    }

    int run(std::ostream& out_stream) const {
        Settings s;
        s.emplace_back("model", model);
        SaddleModel m;
        if (model == "linear") {
            s.emplace_back("lambda1", exact(lambda1));
            s.emplace_back("lambda2", exact(lambda2));
            m = linear_saddle(lambda1, lambda2);
        } else if (model == "perturbed") {
            s.emplace_back("mu", exact(mu));
            s.emplace_back("coupling", exact(coupling));
            m = perturbed_saddle(mu, coupling);
        } else {
            field.record(s);
            s.emplace_back("saddle", std::to_string(saddle));
            const auto zeros = find_zeros(field.params());
            const SaddleTriple triple = order_saddles(zeros);
            m = analytic_family_saddle(field.params(), triple[static_cast<std::size_t>(saddle - 1)]);
        }
        DulacOptions o;
        s.emplace_back("h", exact(h));
        s.emplace_back("x_min", exact(x_min));
        s.emplace_back("x_max", exact(x_max));
        s.emplace_back("samples", std::to_string(samples));
        s.emplace_back("launch_offset", exact(o.launch_offset));
        record_integrator(s, o.integrator);

        const auto xs = log_spaced(x_min, x_max, samples);
        const auto pts = dulac_samples(m, h, xs, o);
        const DulacFit fit = fit_exponent(pts, m.mu_true);

        std::string doc = comment_header("dulac", s);
        doc += "# model_name=" + m.name + "\n";
        doc += "# mu_true=" + fixed(fit.mu_true, 12) + "\n";
        doc += "# mu_hat=" + fixed(fit.mu_hat, 12) + "\n";
        doc += "# c_hat=" + exact(fit.c_hat) + "\n";
        doc += "# log_residual=" + exact(fit.residual) + "\n";
        doc += "x,y,y_fit\n";
        for (const DulacSample& p : pts)
            doc += exact(p.x) + "," + exact(p.y) + "," + exact(fit.c_hat * std::pow(p.x, fit.mu_hat)) + "\n";
        emit(doc, out, "dulac.csv", out_stream);
        return kPass;
    }
};

struct SyntheticEquivCmd {
    double rho1 = 0.0;
    double phi1 = 0.0;
    double rho2 = 0.0;
    double phi2 = 0.0;
    std::int64_t horizon = 10000;
    double eps = 1e-9;
    std::string out;

    void add(CLI::App* app) {
        app->add_option("rho1", rho1, "Shift of the first field")->required();
        app->add_option("phi1", phi1, "Rotation of the first field")->required();
        app->add_option("rho2", rho2, "Shift of the second field")->required();
        app->add_option("phi2", phi2, "Rotation of the second field")->required();
        app->add_option("--horizon", horizon, "Largest |n| scanned")->capture_default_str()->check(CLI::NonNegativeNumber);
        app->add_option("--eps", eps, "Match tolerance on R/Z")->capture_default_str()->check(CLI::PositiveNumber);
        app->add_option("--out", out, "Output path (default: stdout or $TORUSFLOW_OUT_DIR/synthetic_equiv.txt)");
    }

    int run(std::ostream& out_stream) const {
        Settings s;
        s.emplace_back("rho1", exact(rho1));
        s.emplace_back("phi1", exact(phi1));
        s.emplace_back("rho2", exact(rho2));
        s.emplace_back("phi2", exact(phi2));
        s.emplace_back("horizon", std::to_string(horizon));
        s.emplace_back("eps", exact(eps));
        const SyntheticField f1 = build(rho1, phi1);
        const SyntheticField f2 = build(rho2, phi2);
        const EquivVerdict v = equivalence_oracle(f1, f2, horizon, eps);

        std::string doc = comment_header("synthetic-equiv", s);
        doc += kv("decision", to_string(v.decision));
        doc += kv("verdict", verdict_text(v));
        doc += kv("witness", v.equivalent() ? std::to_string(v.witness) : std::string("none"));
        doc += kv("horizon", std::to_string(v.horizon));
        doc += kv("residual", fixed(v.residual, 15));
        if (v.equivalent()) {
            // decomposition() wants rho_a = rho_b + n phi with n >= 0.
            const bool swap = v.witness > 0;
            const double ra = swap ? rho2 : rho1;
            const double rb = swap ? rho1 : rho2;
            const std::int64_t n = swap ? v.witness : -v.witness;
            const IntervalDecomposition dec = decomposition(ra, rb, phi1, n);
            doc += kv("decomposition.base", swap ? "rho1" : "rho2");
            doc += kv("decomposition.n", std::to_string(dec.n));
            doc += kv("decomposition.eps", exact(dec.eps));
            doc += kv("decomposition.eps_max", exact(dec.eps_max));
            doc += "arc,center,start,end,half_width,free\n";
            const BoundaryConjugacy bc = boundary_conjugacy(dec);
            auto row = [&](const std::string& name, const Arc& a, bool free) {
                doc += name + "," + fixed(a.center, 15) + "," + fixed(a.start(), 15) + "," + fixed(a.end(), 15) +
                       "," + exact(a.half_width) + "," + yes_no(free) + "\n";
            };
            row("J", dec.J, true);
            for (std::size_t k = 0; k < dec.I.size(); ++k)
                row("I" + std::to_string(k), dec.I[k], k >= 1 && k + 1 < dec.I.size());
            (void)bc;
        }
        emit(doc, out, "synthetic_equiv.txt", out_stream);
        return kPass;
    }
};

Branch parse_branch(const std::string& name) {
    for (Branch b : kAllBranches)
        if (name == to_string(b)) return b;
    throw UsageError("unknown branch: " + name);
}

struct TraceCmd {
    FieldFlags field;
    double x0 = 0.0;
    double y0 = 0.0;
    int direction = 1;
    double t_max = 20.0;
    int saddle = 0;
    std::string branch = "unstable_right";
    int hits = 2;
    std::string out;

    void add(CLI::App* app) {
        field.add(app);
        app->add_option("--x0", x0, "Start x")->capture_default_str();
        app->add_option("--y0", y0, "Start y")->capture_default_str();
        app->add_option("--direction", direction, "+1 forward, -1 backward")
            ->capture_default_str()
            ->check(CLI::IsMember({-1, 1}));
        app->add_option("--t-max", t_max, "Time span")->capture_default_str()->check(CLI::PositiveNumber);
        app->add_option("--saddle", saddle, "Trace a separatrix of saddle 1..3 instead (0: off)")
            ->capture_default_str()
            ->check(CLI::Range(0, 3));
        app->add_option("--branch", branch, "stable_left | stable_right | unstable_left | unstable_right")
            ->capture_default_str();
        app->add_option("--hits", hits, "Meridian crossings before a separatrix trace stops")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        app->add_option("--out", out, "CSV path (default: stdout or $TORUSFLOW_OUT_DIR/trace.csv)");
    }

    int run(std::ostream& out_stream) const {
        Settings s;
        field.record(s);
        const FieldParams p = field.params();
        Trajectory traj;
        IntegratorOptions io;
        if (saddle == 0) {
            s.emplace_back("x0", exact(x0));
            s.emplace_back("y0", exact(y0));
            s.emplace_back("direction", std::to_string(direction));
            s.emplace_back("t_max", exact(t_max));
            record_integrator(s, io);
            StopSpec stop;
            stop.t_max = t_max;
            traj = integrate(analytic_field(p), {x0, y0}, direction, stop, io);
        } else {
            const Branch br = parse_branch(branch);
            SeparatrixOptions so;
            s.emplace_back("saddle", std::to_string(saddle));
            s.emplace_back("branch", to_string(br));
            s.emplace_back("hits", std::to_string(hits));
            s.emplace_back("launch_offset", exact(so.launch_offset));
            s.emplace_back("saddle_radius", exact(so.saddle_radius));
            record_integrator(s, so.integrator);
            const auto zeros = find_zeros(p);
            const SaddleTriple triple = order_saddles(zeros);
            traj = trace_separatrix(p, zeros, triple[static_cast<std::size_t>(saddle - 1)], br, hits, so)
                       .trajectory;
        }
        std::string doc = comment_header("trace", s);
        doc += "# terminal_event=" + std::string(to_string(traj.terminal_event)) + "\n";
        doc += "# energy_drift=" + exact(max_energy_drift(p, traj)) + "\n";
        doc += "t,x,y\n";
        for (const TrajectorySample& q : traj.samples)
            doc += fixed(q.t, 12) + "," + fixed(q.point.x, 12) + "," + fixed(q.point.y, 12) + "\n";
        emit(doc, out, "trace.csv", out_stream);
        return kPass;
    }
};

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    try {
        args = splice_config(std::move(args));
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    CLI::App app{"Vector fields on the two-torus: singularities, separatrix connections, "
                 "rotation numbers and Dulac maps."};
    app.name("torusflow");
    app.set_version_flag("--version", version());
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.add_option("--config", "key=value file applied before the flags of the subcommand");

    VerifyCmd verify;
    PortraitCmd portrait;
    SweepCmd sweep;
    EquivCmd equiv;
    RotationCmd rotation;
    DulacCmd dulac;
    SyntheticEquivCmd synthetic;
    TraceCmd trace;

    std::function<int()> action;
    auto sub = [&](const char* name, const char* help, auto& cmd) {
        CLI::App* s = app.add_subcommand(name, help);
        s->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        cmd.add(s);
        s->callback([&, ptr = &cmd] { action = [&out, ptr] { return ptr->run(out); }; });
    };
    sub("verify", "Check the numerical claims over a (c, d) parameter box; exit 2 if any fails", verify);
    sub("portrait", "SVG phase portrait with separatrices, zeros and the u=1, u=5 curves", portrait);
    sub("sweep", "Solve for the connection surface d = D(c) and the invariant rho along c", sweep);
    sub("equiv", "Decide rho1 ~ rho2 modulo integer multiples of phi within a horizon", equiv);
    sub("rotation", "Rotation number of a circle map", rotation);
    sub("dulac", "Measure the Dulac exponent of a saddle", dulac);
    sub("synthetic-equiv", "Equivalence oracle for the synthetic family, with the interval decomposition",
        synthetic);
    sub("trace", "Export a trajectory or separatrix as CSV (t, x, y)", trace);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err) == 0 ? kPass : kUsage;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kUsage;
    }

    try {
        return action();
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const PreconditionViolated& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kCheckFailed;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
}

}  // namespace torusflow::cli
