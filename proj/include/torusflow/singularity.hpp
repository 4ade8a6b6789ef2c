#pragma once

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "torusflow/field.hpp"

namespace torusflow {

enum class SingularityKind { Saddle, Minimum, Maximum };

const char* to_string(SingularityKind kind);

struct Singularity {
    TorusPoint point;
    SingularityKind kind = SingularityKind::Saddle;
    /// Ordered by real part; for saddles eigenvalues[0] = λ1 < 0 < λ2 = eigenvalues[1].
    std::array<std::complex<double>, 2> eigenvalues{};
    /// Unit eigenvectors for saddles (stable, unstable), oriented with non-negative
    /// x-component. Zero vectors for extrema.
    Vec2 stable_direction;
    Vec2 unstable_direction;
    double det_j = 0.0;
    double u_value = 0.0;

    bool is_saddle() const { return kind == SingularityKind::Saddle; }
    double lambda_stable() const { return eigenvalues[0].real(); }
    double lambda_unstable() const { return eigenvalues[1].real(); }
};

struct SaddleTriple {
    Singularity s1, s2, s3;

    const Singularity& operator[](std::size_t i) const;
};

struct ZeroSearch {
    int mesh_n = 32;
    double tol = 1e-12;
};

inline constexpr double kDegenerateDet = 1e-6;

/// Newton from every vertex of a mesh_n x mesh_n grid over [0, 2π)^2, with steps capped
/// at length 1 and halved until the residual decreases. Roots are merged modulo the 2π lattice at
/// distance 10 * tol and returned sorted by (x, y).
///
/// Throws NonConvergence when a grid vertex that is a local minimum of |v| below
/// sqrt(tol) has no converged root within one mesh cell.
std::vector<Singularity> find_zeros(const FieldParams& p, ZeroSearch search = {});
inline std::vector<Singularity> find_zeros(const FieldParams& p, int mesh_n, double tol) {
    return find_zeros(p, ZeroSearch{mesh_n, tol});
}

/// Classifies a zero of the analytic family. Extrema are told apart by the Hessian of u.
Singularity classify(const FieldParams& p, TorusPoint q);

/// Classifies a zero from its linearisation alone. `hessian` decides Minimum/Maximum
/// when det > 0; without it a positive determinant is rejected with KindMismatch.
Singularity classify_linearization(TorusPoint q, const Mat2& jac,
                                   std::optional<Mat2> hessian = std::nullopt,
                                   double u_value = 0.0);

/// Picks the three saddles out of `zeros`, sorted by x in [0, 2π).
SaddleTriple order_saddles(std::span<const Singularity> zeros);

/// |λ1| / |λ2| for a saddle.
double characteristic_number(const Singularity& s);

/// Poincaré index: -1 for saddles, +1 for centres.
int poincare_index(const Singularity& s);

struct ZeroCensus {
    int saddles = 0;
    int minima = 0;
    int maxima = 0;
    double min_abs_det = 0.0;
};

ZeroCensus census(std::span<const Singularity> zeros);

}  // namespace torusflow
