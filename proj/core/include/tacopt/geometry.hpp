#pragma once

#include "tacopt/types.hpp"

namespace tacopt {

// Eigenvalue floor used when logging near-singular SPD matrices and when
// capping manipulability denominators.
inline constexpr double kSingularEps = 1e-10;

// Tolerance for "is this vector unit length" preconditions.
inline constexpr double kUnitTol = 1e-9;

// --- Unit sphere S^{d-1} ---------------------------------------------------
//
// Points are unit vectors in R^d; tangent vectors at x live in x's orthogonal
// complement. Distances are great-circle angles.

double sphere_distance(const Vec& x, const Vec& y);

// Log map at x of y: tangent vector whose norm is the great-circle distance.
// Throws GeometryError for antipodal pairs (distance within 1e-9 of pi).
Vec sphere_log(const Vec& x, const Vec& y);

// Exp map at x of tangent u. Requires |x . u| <= 1e-6; exp of 0 is x.
Vec sphere_exp(const Vec& x, const Vec& u);

// --- Symmetric positive (semi-)definite matrices ---------------------------

struct SpdLogResult {
  Mat value;
  bool regularized = false;  // true if an eigenvalue fell below kSingularEps
};

// Matrix logarithm through a symmetric eigendecomposition. Near-singular
// inputs are regularized by adding kSingularEps * I before the log, and the
// result is flagged. Asymmetry beyond 1e-9 (relative) throws GeometryError.
SpdLogResult spd_log(const Mat& m);

// Matrix exponential of a symmetric matrix, same eigendecomposition route.
Mat spd_exp(const Mat& m);

// M^{-1/2} for SPD M; regularizes like spd_log.
Mat spd_inv_sqrt(const Mat& m);

// Frobenius norm of spd_log(md^{-1/2} m md^{-1/2}): the affine-invariant
// distance between SPD matrices m and md.
double spd_distance(const Mat& m, const Mat& md);

}  // namespace tacopt
