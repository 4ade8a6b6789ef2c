#include "torusflow/singularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "torusflow/errors.hpp"

namespace torusflow {

const char* to_string(SingularityKind kind) {
    switch (kind) {
        case SingularityKind::Saddle: return "saddle";
        case SingularityKind::Minimum: return "minimum";
        case SingularityKind::Maximum: return "maximum";
    }
    return "unknown";
}

const Singularity& SaddleTriple::operator[](std::size_t i) const {
    switch (i) {
        case 0: return s1;
        case 1: return s2;
        case 2: return s3;
    }
    throw std::out_of_range("SaddleTriple index");
}

namespace {

struct NewtonResult {
    Vec2 root;
    bool converged = false;
};

// Damped Newton on field_at = 0: the step is halved until the residual drops.
NewtonResult newton(const FieldParams& p, Vec2 q, double tol) {
    constexpr int kMaxIterations = 100;
    constexpr int kMaxHalvings = 50;
    constexpr int kPolishSteps = 2;

    double residual = norm(field_at(p, q));
    int polish = 0;
    for (int it = 0; it < kMaxIterations; ++it) {
        if (residual < tol && polish++ >= kPolishSteps) return {q, true};
        const Vec2 f = field_at(p, q);
        const Mat2 j = jacobian(p, q);
        const double det = j.det();
        if (std::abs(det) < 1e-14) return {q, false};
        const Vec2 step{-(j.d * f.x - j.b * f.y) / det, -(-j.c * f.x + j.a * f.y) / det};

        // The field is periodic, so a step longer than a cell only wanders between
        // basins; cap it at one radian.
        double scale = std::min(1.0, 1.0 / norm(step));
        Vec2 trial = q + scale * step;
        double trial_residual = norm(field_at(p, trial));
        int halvings = 0;
        while (trial_residual >= residual && halvings < kMaxHalvings) {
            scale *= 0.5;
            trial = q + scale * step;
            trial_residual = norm(field_at(p, trial));
            ++halvings;
        }
        if (trial_residual >= residual) {
            // Stalled at the rounding floor.
            return {q, residual < tol};
        }
        // Stay in the fundamental square so rounding is relative to O(1) coordinates.
        const TorusPoint w = wrap(trial);
        q = {w.x, w.y};
        residual = trial_residual;
    }
    return {q, residual < tol};
}

Vec2 unit_eigenvector(const Mat2& j, double lambda) {
    const Vec2 r1{j.b, lambda - j.a};
    const Vec2 r2{lambda - j.d, j.c};
    Vec2 v = norm(r1) >= norm(r2) ? r1 : r2;
    const double n = norm(v);
    if (n == 0.0) {
        // Diagonal matrix: the eigenvector is a coordinate axis.
        v = std::abs(j.a - lambda) <= std::abs(j.d - lambda) ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
    } else {
        v = (1.0 / n) * v;
    }
    if (v.x < 0.0 || (v.x == 0.0 && v.y < 0.0)) v = -v;
    return v;
}

}  // namespace

Singularity classify_linearization(TorusPoint q, const Mat2& jac, std::optional<Mat2> hessian,
                                   double u_value) {
    const double det = jac.det();
    if (!(std::abs(det) >= kDegenerateDet)) {
        std::ostringstream msg;
        msg << "non-hyperbolic zero at (" << q.x << ", " << q.y << "): det J = " << det;
        throw DegenerateZero(msg.str());
    }
    Singularity s;
    s.point = q;
    s.det_j = det;
    s.u_value = u_value;

    const double half_trace = 0.5 * jac.trace();
    const double disc = half_trace * half_trace - det;
    if (disc >= 0.0) {
        const double r = std::sqrt(disc);
        s.eigenvalues = {std::complex<double>(half_trace - r, 0.0),
                         std::complex<double>(half_trace + r, 0.0)};
    } else {
        const double r = std::sqrt(-disc);
        s.eigenvalues = {std::complex<double>(half_trace, -r),
                         std::complex<double>(half_trace, r)};
    }

    if (det < 0.0) {
        s.kind = SingularityKind::Saddle;
        s.stable_direction = unit_eigenvector(jac, s.eigenvalues[0].real());
        s.unstable_direction = unit_eigenvector(jac, s.eigenvalues[1].real());
        return s;
    }
    if (!hessian) {
        throw KindMismatch("positive-determinant zero needs a Hessian to tell minimum from maximum");
    }
    s.kind = hessian->a > 0.0 ? SingularityKind::Minimum : SingularityKind::Maximum;
    return s;
}

Singularity classify(const FieldParams& p, TorusPoint q) {
    const Vec2 lifted = q.lifted();
    return classify_linearization(q, jacobian(p, lifted), hessian_u(p, lifted),
                                  hamiltonian_standard_lift(p, q));
}

std::vector<Singularity> find_zeros(const FieldParams& p, ZeroSearch search) {
    if (search.mesh_n < 16) throw PreconditionViolated("find_zeros: mesh_n must be >= 16");
    if (!(search.tol > 0.0)) throw PreconditionViolated("find_zeros: tol must be positive");

    const int n = search.mesh_n;
    const double h = kTwoPi / n;
    const double merge_radius = 10.0 * search.tol;

    std::vector<TorusPoint> roots;
    std::vector<double> vertex_residual(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const Vec2 seed{i * h, j * h};
            vertex_residual[static_cast<std::size_t>(i) * n + j] = norm(field_at(p, seed));
            const NewtonResult r = newton(p, seed, search.tol);
            if (!r.converged) continue;
            const TorusPoint root = wrap(r.root);
            const bool known = std::any_of(roots.begin(), roots.end(), [&](const TorusPoint& z) {
                return torus_distance(z.lifted(), root.lifted()) <= merge_radius;
            });
            if (!known) roots.push_back(root);
        }
    }

    // A near-zero of |v| on the mesh with no root nearby means the mesh missed a zero.
    const double suspicious = std::sqrt(search.tol);
    auto at = [&](int i, int j) {
        i = (i % n + n) % n;
        j = (j % n + n) % n;
        return vertex_residual[static_cast<std::size_t>(i) * n + j];
    };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double r = at(i, j);
            if (r >= suspicious) continue;
            bool local_min = true;
            for (int di = -1; di <= 1 && local_min; ++di)
                for (int dj = -1; dj <= 1; ++dj)
                    if ((di || dj) && at(i + di, j + dj) < r) { local_min = false; break; }
            if (!local_min) continue;
            const Vec2 vertex{i * h, j * h};
            const bool covered = std::any_of(roots.begin(), roots.end(), [&](const TorusPoint& z) {
                return torus_distance(z.lifted(), vertex) <= std::sqrt(2.0) * h;
            });
            if (!covered) {
                std::ostringstream msg;
                msg << "Newton failed near mesh vertex (" << vertex.x << ", " << vertex.y
                    << ") where |v| = " << r << "; refine the mesh";
                throw NonConvergence(msg.str());
            }
        }
    }

    std::sort(roots.begin(), roots.end(), [](const TorusPoint& a, const TorusPoint& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    std::vector<Singularity> zeros;
    zeros.reserve(roots.size());
    for (const TorusPoint& r : roots) zeros.push_back(classify(p, r));
    return zeros;
}

SaddleTriple order_saddles(std::span<const Singularity> zeros) {
    std::vector<Singularity> saddles;
    std::copy_if(zeros.begin(), zeros.end(), std::back_inserter(saddles),
                 [](const Singularity& s) { return s.is_saddle(); });
    if (saddles.size() != 3) {
        throw WrongSaddleCount("expected 3 saddles, found " + std::to_string(saddles.size()));
    }
    std::sort(saddles.begin(), saddles.end(), [](const Singularity& a, const Singularity& b) {
        return a.point.x < b.point.x;
    });
    return {saddles[0], saddles[1], saddles[2]};
}

double characteristic_number(const Singularity& s) {
    if (!s.is_saddle()) {
        throw KindMismatch(std::string("characteristic number of a ") + to_string(s.kind));
    }
    return std::abs(s.lambda_stable()) / std::abs(s.lambda_unstable());
}

int poincare_index(const Singularity& s) { return s.is_saddle() ? -1 : 1; }

ZeroCensus census(std::span<const Singularity> zeros) {
    ZeroCensus c;
    c.min_abs_det = zeros.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    for (const Singularity& s : zeros) {
        switch (s.kind) {
            case SingularityKind::Saddle: ++c.saddles; break;
            case SingularityKind::Minimum: ++c.minima; break;
            case SingularityKind::Maximum: ++c.maxima; break;
        }
        c.min_abs_det = std::min(c.min_abs_det, std::abs(s.det_j));
    }
    return c;
}

}  // namespace torusflow
