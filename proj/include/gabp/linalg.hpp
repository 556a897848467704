#pragma once

#include "gabp/types.hpp"

namespace gabp {

// Condition-estimate cutoff above which a matrix is treated as singular.
inline constexpr double kSingularConditionLimit = 1e12;

// Relative tolerance used when checking that a matrix is symmetric:
// |M_ij - M_ji| <= tol * max(1, |M_ij|).
inline constexpr double kSymmetryTolerance = 1e-12;

// 2x2 block partition of a matrix. Dimensions must tile:
// a.rows = b.rows, c.rows = d.rows, a.cols = c.cols, b.cols = d.cols.
struct BlockMatrix2x2 {
  Matrix a;
  Matrix b;
  Matrix c;
  Matrix d;

  // Throws DimensionMismatch if the blocks do not tile.
  void validate() const;

  // The assembled (a.rows + c.rows) x (a.cols + b.cols) matrix.
  Matrix assemble() const;
};

// Conditional distribution of the second block given the first.
struct ConditionalGaussian {
  Vector mean;
  Matrix covariance;
};

bool is_symmetric(const Matrix& m, double tol = kSymmetryTolerance);

// (M + M^T)/2. Applied to every result documented as a covariance to
// suppress round-off drift.
Matrix symmetrize(const Matrix& m);

// Condition estimate sigma_max/sigma_min via SVD; infinity when rank
// deficient.
double condition_estimate(const Matrix& m);

// D - C A^{-1} B. Throws SingularBlock when A is numerically singular.
Matrix schur_complement(const BlockMatrix2x2& m);

// MMSE conditioning of the second block on an observation x of the first,
// for a joint covariance [[S_xx, S_xy], [S_yx, S_yy]]:
//   covariance = (S_yy - S_yx S_xx^{-1} S_xy)^{-1}
//   mean       = covariance * S_yx * S_xx^{-1} * x
ConditionalGaussian mmse_condition(const BlockMatrix2x2& joint,
                                   const Vector& x);

// Dense inverse. Throws SingularMatrix when the condition estimate
// exceeds kSingularConditionLimit.
Matrix direct_inverse(const Matrix& m);

// ainv + ainv B (D - C ainv B)^{-1} C ainv. Throws SingularBlock when the
// inner term is singular.
Matrix matrix_inversion_lemma(const Matrix& ainv, const Matrix& b,
                              const Matrix& c, const Matrix& d);

}  // namespace gabp
