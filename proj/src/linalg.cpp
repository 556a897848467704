#include "gabp/linalg.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace gabp {

namespace {

std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// Inverse with a singularity gate; `what` names the offending operand in
// the error message.
Matrix gated_inverse(const Matrix& m, const char* what, bool as_block) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch(std::string(what) + " is not square: " + dims(m));
  }
  const double cond = condition_estimate(m);
  if (!std::isfinite(cond) || cond > kSingularConditionLimit) {
    const std::string msg = std::string(what) +
                            " is numerically singular (condition estimate " +
                            std::to_string(cond) + ")";
    if (as_block) throw SingularBlock(msg);
    throw SingularMatrix(msg);
  }
  return m.partialPivLu().solve(Matrix::Identity(m.rows(), m.rows()));
}

}  // namespace

void BlockMatrix2x2::validate() const {
  if (a.rows() != b.rows() || c.rows() != d.rows() || a.cols() != c.cols() ||
      b.cols() != d.cols()) {
    throw DimensionMismatch("block partition does not tile: a=" + dims(a) +
                            " b=" + dims(b) + " c=" + dims(c) +
                            " d=" + dims(d));
  }
}

Matrix BlockMatrix2x2::assemble() const {
  validate();
  Matrix m(a.rows() + c.rows(), a.cols() + b.cols());
  m.topLeftCorner(a.rows(), a.cols()) = a;
  m.topRightCorner(b.rows(), b.cols()) = b;
  m.bottomLeftCorner(c.rows(), c.cols()) = c;
  m.bottomRightCorner(d.rows(), d.cols()) = d;
  return m;
}

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      if (std::abs(m(i, j) - m(j, i)) > tol * std::max(1.0, std::abs(m(i, j))))
        return false;
    }
  }
  return true;
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double condition_estimate(const Matrix& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (smin <= 0.0 || !std::isfinite(smax)) {
    return std::numeric_limits<double>::infinity();
  }
  return smax / smin;
}

Matrix schur_complement(const BlockMatrix2x2& m) {
  m.validate();
  const Matrix ainv = gated_inverse(m.a, "upper-left block", /*as_block=*/true);
  return m.d - m.c * ainv * m.b;
}

ConditionalGaussian mmse_condition(const BlockMatrix2x2& joint,
                                   const Vector& x) {
  joint.validate();
  if (x.size() != joint.a.rows()) {
    throw DimensionMismatch("observation length " + std::to_string(x.size()) +
                            " does not match observed block side " +
                            std::to_string(joint.a.rows()));
  }
  const Matrix sxx_inv =
      gated_inverse(joint.a, "observed block", /*as_block=*/true);
  const Matrix schur = joint.d - joint.c * sxx_inv * joint.b;
  ConditionalGaussian out;
  out.covariance =
      symmetrize(gated_inverse(schur, "Schur complement", /*as_block=*/true));
  out.mean = out.covariance * (joint.c * (sxx_inv * x));
  return out;
}

Matrix direct_inverse(const Matrix& m) {
  return gated_inverse(m, "matrix", /*as_block=*/false);
}

Matrix matrix_inversion_lemma(const Matrix& ainv, const Matrix& b,
                              const Matrix& c, const Matrix& d) {
  if (ainv.rows() != ainv.cols()) {
    throw DimensionMismatch("ainv is not square: " + dims(ainv));
  }
  if (b.rows() != ainv.rows() || c.cols() != ainv.cols() ||
      d.rows() != c.rows() || d.cols() != b.cols()) {
    throw DimensionMismatch("inversion-lemma blocks do not chain: ainv=" +
                            dims(ainv) + " b=" + dims(b) + " c=" + dims(c) +
                            " d=" + dims(d));
  }
  const Matrix inner = d - c * ainv * b;
  const Matrix inner_inv =
      gated_inverse(inner, "inner term", /*as_block=*/true);
  return ainv + ainv * b * inner_inv * c * ainv;
}

}  // namespace gabp
