#include "torusflow/portrait.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "torusflow/errors.hpp"

namespace torusflow {

namespace {

class Canvas {
public:
    Canvas(int size, int margin) : size_(size), margin_(margin) {}

    double px(double x) const { return margin_ + x / kTwoPi * size_; }
    double py(double y) const { return margin_ + (1.0 - y / kTwoPi) * size_; }
    std::string coord(Vec2 q) const { return fixed(px(q.x), 2) + "," + fixed(py(q.y), 2); }

    // Path data of a lifted polyline drawn on the torus, split where it wraps.
    std::string wrapped_path(const std::vector<Vec2>& lifted) const {
        std::string d, last;
        Vec2 prev{};
        bool have_prev = false;
        for (const Vec2& q : lifted) {
            const TorusPoint w = wrap(q);
            const Vec2 cur{w.x, w.y};
            const bool jump = have_prev && (std::abs(cur.x - prev.x) > M_PI || std::abs(cur.y - prev.y) > M_PI);
            std::string c = coord(cur);
            if (jump || c != last) {   // points closer than the output resolution are dropped
                d += (!have_prev || jump) ? "M" : "L";
                d += c;
                last = std::move(c);
            }
            prev = cur;
            have_prev = true;
        }
        return d;
    }

private:
    int size_;
    int margin_;
};

std::vector<Vec2> points_of(const Trajectory& t) {
    std::vector<Vec2> pts;
    pts.reserve(t.samples.size());
    for (const auto& s : t.samples) pts.push_back(s.point);
    return pts;
}

// Marching squares on u over [0, 2π]^2 for levels k * spacing.
std::string background_contours(const FieldParams& p, const Canvas& canvas, int n, double spacing) {
    const double h = kTwoPi / n;
    std::vector<double> u(static_cast<std::size_t>(n + 1) * (n + 1));
    auto at = [&](int i, int j) -> double& { return u[static_cast<std::size_t>(i) * (n + 1) + j]; };
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) at(i, j) = hamiltonian(p, {i * h, j * h});

    std::string d;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double c[4] = {at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
            const Vec2 v[4] = {{i * h, j * h}, {(i + 1) * h, j * h}, {(i + 1) * h, (j + 1) * h}, {i * h, (j + 1) * h}};
            const double lo = std::min(std::min(c[0], c[1]), std::min(c[2], c[3]));
            const double hi = std::max(std::max(c[0], c[1]), std::max(c[2], c[3]));
            for (double k = std::ceil(lo / spacing); k * spacing <= hi; k += 1.0) {
                const double level = k * spacing;
                Vec2 cut[4];
                int m = 0;
                for (int e = 0; e < 4; ++e) {
                    const double a = c[e] - level;
                    const double b = c[(e + 1) % 4] - level;
                    if ((a < 0.0) != (b < 0.0)) {
                        const double s = a / (a - b);
                        cut[m++] = v[e] + s * (v[(e + 1) % 4] - v[e]);
                    }
                }
                for (int s = 0; s + 1 < m; s += 2) {
                    d += "M" + canvas.coord(cut[s]) + "L" + canvas.coord(cut[s + 1]);
                }
            }
        }
    }
    return d;
}

}  // namespace

std::string render_portrait_svg(const FieldParams& p, const PortraitOptions& options,
                                const Settings& header_settings) {
    const Canvas canvas(options.size_px, options.margin_px);
    const int total = options.size_px + 2 * options.margin_px;
    const auto zeros = find_zeros(p, options.search);

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<!--\n" << comment_header("portrait", header_settings, "  ") << "-->\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << total << "\" height=\"" << total
        << "\" viewBox=\"0 0 " << total << " " << total << "\">\n";
    svg << "<style>\n"
           "  .frame{fill:none;stroke:#000;stroke-width:1.5}\n"
           "  .level-bg{fill:none;stroke:#b8b8b8;stroke-width:0.6}\n"
           "  .level-mark{fill:none;stroke:#000;stroke-width:1.2;stroke-dasharray:6 4}\n"
           "  .sep-s1{fill:none;stroke:#f28c28;stroke-width:2.6}\n"
           "  .sep-s23{fill:none;stroke:#2a62c9;stroke-width:2.6}\n"
           "  .zero{fill:#d62728;stroke:none}\n"
           "</style>\n";
    svg << "<rect class=\"frame\" x=\"" << options.margin_px << "\" y=\"" << options.margin_px
        << "\" width=\"" << options.size_px << "\" height=\"" << options.size_px << "\"/>\n";

    if (options.background_levels) {
        svg << "<path class=\"level-bg\" d=\""
            << background_contours(p, canvas, options.background_grid, options.background_spacing)
            << "\"/>\n";
    }

    for (double level : {options.level_lo, options.level_hi}) {
        LevelCurveOptions lc = options.level_curve;
        const Vec2 seed{level, 0.0};
        lc.orientation = grad_u(p, seed).x > 0.0 ? -1 : 1;
        lc.y_min = 0.0;
        lc.y_max = kTwoPi;
        try {
            const LevelCurve curve = trace_level_curve(p, level, seed, lc);
            svg << "<path class=\"level-mark\" data-level=\"" << fixed(level, 3) << "\" d=\""
                << canvas.wrapped_path(curve.points) << "\"/>\n";
        } catch (const Error& e) {
            svg << "<!-- level " << fixed(level, 3) << " not drawn: " << e.what() << " -->\n";
        }
    }

    std::vector<const Singularity*> saddles;
    for (const Singularity& z : zeros)
        if (z.is_saddle()) saddles.push_back(&z);
    std::sort(saddles.begin(), saddles.end(),
              [](const Singularity* a, const Singularity* b) { return a->point.x < b->point.x; });
    for (std::size_t k = 0; k < saddles.size(); ++k) {
        const char* cls = k == 0 ? "sep-s1" : "sep-s23";
        for (Branch branch : kAllBranches) {
            const SeparatrixTrace trace =
                trace_separatrix(p, zeros, *saddles[k], branch, 1, options.separatrix);
            std::vector<Vec2> pts{saddles[k]->point.lifted()};
            const auto tail = points_of(trace.trajectory);
            pts.insert(pts.end(), tail.begin(), tail.end());
            svg << "<path class=\"" << cls << "\" data-saddle=\"s" << (k + 1) << "\" data-branch=\""
                << to_string(branch) << "\" d=\"" << canvas.wrapped_path(pts) << "\"/>\n";
        }
    }

    for (const Singularity& z : zeros) {
        svg << "<circle class=\"zero\" data-kind=\"" << to_string(z.kind) << "\" cx=\""
            << fixed(canvas.px(z.point.x), 2) << "\" cy=\"" << fixed(canvas.py(z.point.y), 2)
            << "\" r=\"5\"/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace torusflow
