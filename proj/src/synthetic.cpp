#include "torusflow/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "torusflow/errors.hpp"

namespace torusflow {

namespace {

double mod1(double x) {
    double r = std::fmod(x, 1.0);
    if (r < 0.0) r += 1.0;
    if (r >= 1.0) r = 0.0;
    return r;
}

double mod1_scaled(double base, std::int64_t k, double phi) {
    long double r = std::fmod(static_cast<long double>(base) + static_cast<long double>(k) * phi, 1.0L);
    if (r < 0.0L) r += 1.0L;
    return mod1(static_cast<double>(r));
}

}  // namespace

std::optional<double> SyntheticField::lower_strip_map(double x, double tol) const {
    if (circle_distance(x, 0.0) <= tol) return std::nullopt;
    return mod1(x + 0.5 * phi);
}

std::optional<double> SyntheticField::upper_strip_map(double x, double tol) const {
    if (circle_distance(x, rho + 0.5 * phi) <= tol) return std::nullopt;
    return mod1(x + 0.5 * phi);
}

std::optional<double> SyntheticField::return_map(double x, double tol) const {
    const auto mid = lower_strip_map(x, tol);
    if (!mid) return std::nullopt;
    return upper_strip_map(*mid, tol);
}

std::vector<double> SyntheticField::gamma1_hits(int depth) const {
    std::vector<double> hits;
    for (int n = 0; n <= depth; ++n) hits.push_back(mod1_scaled(0.0, -n, phi));
    return hits;
}

std::vector<double> SyntheticField::gamma2_hits(int depth) const {
    std::vector<double> hits;
    for (int n = 0; n <= depth; ++n) hits.push_back(mod1_scaled(rho, -n, phi));
    return hits;
}

std::vector<double> SyntheticField::big_gamma1_hits(int depth) const {
    std::vector<double> hits;
    for (int n = 0; n <= depth; ++n) hits.push_back(mod1_scaled(0.0, n + 1, phi));
    return hits;
}

std::vector<double> SyntheticField::big_gamma2_hits(int depth) const {
    std::vector<double> hits;
    for (int n = 0; n <= depth; ++n) hits.push_back(mod1_scaled(rho, n + 1, phi));
    return hits;
}

SyntheticField build(double rho, double phi) {
    if (!(phi > 0.0 && phi < 1.0)) throw PreconditionViolated("synthetic field needs 0 < phi < 1");
    if (!(rho >= 0.0 && rho < 1.0)) throw PreconditionViolated("synthetic field needs 0 <= rho < 1");
    SyntheticField f;
    f.rho = rho;
    f.phi = phi;
    return f;
}

std::optional<SeparatrixConnection> first_connection(const SyntheticField& f, int depth, double tol) {
    for (int k = 0; k <= depth; ++k) {
        // Gamma1 leaves S1 through phi/2 on M_1/2 and advances by phi per turn;
        // gamma2 enters s2 through rho + phi/2 on M_1/2.
        if (circle_distance(mod1_scaled(0.5 * f.phi, k, f.phi), f.rho + 0.5 * f.phi) <= tol) {
            return SeparatrixConnection{ConnectionKind::UnstableS1ToStableS2, k};
        }
        // Gamma2 leaves S2 through rho + phi on M1 = M0; gamma1 enters through 0.
        if (circle_distance(mod1_scaled(f.rho + f.phi, k, f.phi), 0.0) <= tol) {
            return SeparatrixConnection{ConnectionKind::UnstableS2ToStableS1, k};
        }
    }
    return std::nullopt;
}

EquivVerdict equivalence_oracle(const SyntheticField& f1, const SyntheticField& f2,
                                std::int64_t horizon, double eps) {
    for (const SyntheticField* f : {&f1, &f2}) {
        if (orbit_membership(f->rho, f->phi, horizon, eps)) {
            std::ostringstream msg;
            msg << "rho = " << f->rho << " lies on the orbit {n phi} of phi = " << f->phi;
            throw PreconditionViolated(msg.str());
        }
    }
    if (std::abs(f1.phi - f2.phi) > eps) {
        EquivVerdict v;
        v.decision = Decision::NotEquivalent;
        v.horizon = horizon;
        v.residual = std::abs(f1.phi - f2.phi);
        return v;
    }
    return e_phi_equiv(f1.rho, f2.rho, f1.phi, horizon, eps);
}

double Arc::start() const { return mod1(center - half_width); }
double Arc::end() const { return mod1(center + half_width); }
bool Arc::contains(double x) const { return circle_distance(x, center) <= half_width; }
bool Arc::contains_interior(double x) const { return circle_distance(x, center) < half_width; }

bool arcs_disjoint(const Arc& a, const Arc& b) {
    return circle_distance(a.center, b.center) > a.half_width + b.half_width;
}

std::vector<Arc> IntervalDecomposition::all_arcs() const {
    std::vector<Arc> arcs{J};
    arcs.insert(arcs.end(), I.begin(), I.end());
    return arcs;
}

IntervalDecomposition decomposition(double rho1, double rho2, double phi, std::int64_t n) {
    if (n < 0) throw PreconditionViolated("decomposition needs n >= 0 (swap the fields)");
    if (circle_distance(rho1, mod1_scaled(rho2, n, phi)) > 1e-12) {
        std::ostringstream msg;
        msg << "rho1 = " << rho1 << " is not rho2 + n phi with n = " << n;
        throw PreconditionViolated(msg.str());
    }
    std::vector<double> points{0.0};
    for (std::int64_t k = 0; k <= n; ++k) points.push_back(mod1_scaled(rho2, k, phi));

    double spacing = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < points.size(); ++a)
        for (std::size_t b = a + 1; b < points.size(); ++b)
            spacing = std::min(spacing, circle_distance(points[a], points[b]));
    if (spacing < 1e-10) {
        std::ostringstream msg;
        msg << "separatrix hits collide (minimal spacing " << spacing << "); rho2 is on the orbit of 0";
        throw DegenerateSpacing(msg.str());
    }

    IntervalDecomposition dec;
    dec.n = n;
    dec.eps_max = 0.5 * spacing;
    dec.eps = 0.5 * dec.eps_max;
    dec.J = {0.0, dec.eps};
    for (std::size_t k = 1; k < points.size(); ++k) dec.I.push_back({points[k], dec.eps});

    const auto arcs = dec.all_arcs();
    for (std::size_t a = 0; a < arcs.size(); ++a)
        for (std::size_t b = a + 1; b < arcs.size(); ++b)
            if (!arcs_disjoint(arcs[a], arcs[b])) {
                throw DegenerateSpacing("decomposition arcs overlap");
            }
    return dec;
}

BoundaryConjugacy::BoundaryConjugacy(const IntervalDecomposition& dec) {
    free_.push_back(dec.J);
    for (std::int64_t k = 1; k + 1 <= dec.n; ++k) free_.push_back(dec.I[static_cast<std::size_t>(k)]);
}

bool BoundaryConjugacy::pinned(double x) const {
    return std::none_of(free_.begin(), free_.end(), [x](const Arc& a) { return a.contains_interior(x); });
}

std::optional<double> BoundaryConjugacy::operator()(double x) const {
    if (!pinned(x)) return std::nullopt;
    return x;
}

BoundaryConjugacy boundary_conjugacy(const IntervalDecomposition& dec) { return BoundaryConjugacy(dec); }

}  // namespace torusflow
