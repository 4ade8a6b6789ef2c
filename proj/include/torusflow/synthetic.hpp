#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "torusflow/rotation.hpp"

namespace torusflow {

/// Phase portrait inside the regions bounded by each strip's separatrix connections.
/// The two differ, so an equivalence must send U1 to U1 and U2 to U2.
enum class InteriorKind { NodePair, NodeAndLimitCycle };

/// Combinatorial model of the piecewise family on the unit torus (R/Z)^2: the field is
/// (phi, 1) near the meridians y = 0 and y = 1/2, the strip 0 < y < 1/2 carries the saddle
/// pair (s1, S1) and the strip 1/2 < y < 1 carries (s2, S2) shifted by rho in x.
///
/// Separatrix bookkeeping on the meridians:
///   gamma1 (stable, s1) meets M0 at 0,          Gamma1 (unstable, S1) meets M_1/2 at phi/2;
///   gamma2 (stable, s2) meets M_1/2 at rho+phi/2, Gamma2 (unstable, S2) meets M1 at rho+phi.
struct SyntheticField {
    double rho = 0.0;
    double phi = 0.0;
    InteriorKind lower_interior = InteriorKind::NodePair;
    InteriorKind upper_interior = InteriorKind::NodeAndLimitCycle;

    /// Correspondence M0 -> M_1/2 along the lower strip; undefined on gamma1.
    std::optional<double> lower_strip_map(double x, double tol = 1e-14) const;
    /// Correspondence M_1/2 -> M1 along the upper strip; undefined on gamma2.
    std::optional<double> upper_strip_map(double x, double tol = 1e-14) const;
    /// Poincaré map M0 -> M0, x -> x + phi (mod 1) except at the first hits of gamma1, gamma2.
    std::optional<double> return_map(double x, double tol = 1e-14) const;

    /// gamma1 ∩ M0 = {-n phi}, n = 0..depth.
    std::vector<double> gamma1_hits(int depth) const;
    /// gamma2 ∩ M0 = {rho - n phi}, n = 0..depth.
    std::vector<double> gamma2_hits(int depth) const;
    /// Gamma1 ∩ M0 = {(n + 1) phi} and Gamma2 ∩ M0 = {rho + (n + 1) phi}, n = 0..depth.
    std::vector<double> big_gamma1_hits(int depth) const;
    std::vector<double> big_gamma2_hits(int depth) const;
};

SyntheticField build(double rho, double phi);

enum class ConnectionKind { UnstableS1ToStableS2, UnstableS2ToStableS1 };

struct SeparatrixConnection {
    ConnectionKind kind;
    /// Number of full turns around the torus the unstable separatrix makes first.
    int turns = 0;
};

/// First coincidence of an unstable separatrix with a stable one within `depth` turns:
/// Gamma1 meets gamma2 when rho = k phi, Gamma2 meets gamma1 when rho = -(k + 1) phi.
std::optional<SeparatrixConnection> first_connection(const SyntheticField& f, int depth,
                                                     double tol = 1e-12);

/// Equivalent iff |phi1 - phi2| <= eps and rho2 = rho1 + n phi (mod 1) for some |n| <= horizon.
/// Throws PreconditionViolated if either rho lies on the orbit {n phi} within (horizon, eps).
EquivVerdict equivalence_oracle(const SyntheticField& f1, const SyntheticField& f2,
                                std::int64_t horizon, double eps);

/// Closed arc [center - half_width, center + half_width] of R/Z.
struct Arc {
    double center = 0.0;
    double half_width = 0.0;

    double start() const;   // in [0, 1)
    double end() const;     // in [0, 1)
    bool contains(double x) const;           // closed arc
    bool contains_interior(double x) const;  // open arc
};

bool arcs_disjoint(const Arc& a, const Arc& b);

/// Arcs J = [-eps, eps] and I_k = [rho2 + k phi - eps, rho2 + k phi + eps], k = 0..n,
/// around the separatrix hits used to build the equivalence between the fields with
/// rho1 = rho2 + n phi.
struct IntervalDecomposition {
    std::int64_t n = 0;
    double eps = 0.0;
    /// Largest eps for which the arcs stay disjoint (half the minimal spacing).
    double eps_max = 0.0;
    Arc J;
    std::vector<Arc> I;   // I[k], k = 0..n

    std::vector<Arc> all_arcs() const;   // J, I_0, ..., I_n
};

/// eps is half of the admissible maximum. Requires n >= 0 and
/// |rho1 - (rho2 + n phi)| <= 1e-12 (mod 1); throws DegenerateSpacing when two of the
/// points {0} ∪ {rho2 + k phi} are closer than 1e-10.
IntervalDecomposition decomposition(double rho1, double rho2, double phi, std::int64_t n);

/// Boundary data on M0 of the equivalence: the identity away from the free arcs
/// J, I_1, ..., I_{n-1}, where only the endpoints are pinned.
class BoundaryConjugacy {
public:
    explicit BoundaryConjugacy(const IntervalDecomposition& dec);

    /// x itself where the map is pinned, nullopt inside a free arc.
    std::optional<double> operator()(double x) const;
    bool pinned(double x) const;
    const std::vector<Arc>& free_arcs() const { return free_; }

private:
    std::vector<Arc> free_;
};

BoundaryConjugacy boundary_conjugacy(const IntervalDecomposition& dec);

}  // namespace torusflow
