#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gabp/linalg.hpp"
#include "gabp/types.hpp"

using gabp::BlockMatrix2x2;
using gabp::Matrix;
using gabp::Vector;

namespace {

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

double max_abs_diff(const Matrix& x, const Matrix& y) {
  return (x - y).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("block partition assembles and validates") {
  BlockMatrix2x2 blocks;
  blocks.a = m2(1, 2, 3, 4);
  blocks.b = Matrix::Constant(2, 1, 5.0);
  blocks.c = Matrix::Constant(1, 2, 6.0);
  blocks.d = Matrix::Constant(1, 1, 7.0);
  const Matrix full = blocks.assemble();
  REQUIRE(full.rows() == 3);
  REQUIRE(full.cols() == 3);
  CHECK(full(0, 2) == 5.0);
  CHECK(full(2, 0) == 6.0);
  CHECK(full(2, 2) == 7.0);

  blocks.b = Matrix::Constant(1, 1, 5.0);
  CHECK_THROWS_AS(blocks.validate(), gabp::DimensionMismatch);
}

TEST_CASE("symmetry check and symmetrize") {
  CHECK(gabp::is_symmetric(m2(2, 1, 1, 2)));
  CHECK_FALSE(gabp::is_symmetric(m2(2, 1, 1.5, 2)));
  CHECK_FALSE(gabp::is_symmetric(Matrix::Zero(2, 3)));
  const Matrix s = gabp::symmetrize(m2(2, 1, 3, 2));
  CHECK(s(0, 1) == 2.0);
  CHECK(s(1, 0) == 2.0);
}

TEST_CASE("condition estimate flags rank deficiency") {
  CHECK(gabp::condition_estimate(Matrix::Identity(3, 3)) == doctest::Approx(1.0));
  const double singular = gabp::condition_estimate(m2(1, 1, 1, 1));
  CHECK(std::isinf(singular));
}

TEST_CASE("schur complement of a 2x2 scalar partition") {
  BlockMatrix2x2 blocks;
  blocks.a = Matrix::Constant(1, 1, 4.0);
  blocks.b = Matrix::Constant(1, 1, 2.0);
  blocks.c = Matrix::Constant(1, 1, 2.0);
  blocks.d = Matrix::Constant(1, 1, 3.0);
  const Matrix s = gabp::schur_complement(blocks);
  CHECK(s(0, 0) == doctest::Approx(3.0 - 2.0 * 2.0 / 4.0));
}

TEST_CASE("schur complement matches the inverse-of-inverse identity") {
  // For an SPD matrix, the lower-right block of the inverse is the inverse
  // of the Schur complement of the upper-left block.
  Matrix full(3, 3);
  full << 4, 1, 0.5,
          1, 3, 0.2,
          0.5, 0.2, 2;
  BlockMatrix2x2 blocks;
  blocks.a = full.topLeftCorner(1, 1);
  blocks.b = full.topRightCorner(1, 2);
  blocks.c = full.bottomLeftCorner(2, 1);
  blocks.d = full.bottomRightCorner(2, 2);
  const Matrix schur = gabp::schur_complement(blocks);
  const Matrix inv = gabp::direct_inverse(full);
  const Matrix lower_right_inv = gabp::direct_inverse(inv.bottomRightCorner(2, 2));
  CHECK(max_abs_diff(schur, lower_right_inv) < 1e-10);
}

TEST_CASE("schur complement rejects a singular pivot block") {
  BlockMatrix2x2 blocks;
  blocks.a = m2(1, 1, 1, 1);
  blocks.b = Matrix::Identity(2, 2);
  blocks.c = Matrix::Identity(2, 2);
  blocks.d = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(gabp::schur_complement(blocks), gabp::SingularBlock);
}

TEST_CASE("mmse conditioning on a scalar observation") {
  // Joint covariance [[1, 0.5], [0.5, 2]]; conditioning the second variable
  // on x. The returned covariance is the inverted Schur complement.
  BlockMatrix2x2 joint;
  joint.a = Matrix::Constant(1, 1, 1.0);
  joint.b = Matrix::Constant(1, 1, 0.5);
  joint.c = Matrix::Constant(1, 1, 0.5);
  joint.d = Matrix::Constant(1, 1, 2.0);
  Vector x(1);
  x << 2.0;
  const gabp::ConditionalGaussian cond = gabp::mmse_condition(joint, x);
  const double schur = 2.0 - 0.5 * 0.5 / 1.0;
  CHECK(cond.covariance(0, 0) == doctest::Approx(1.0 / schur));
  CHECK(cond.mean(0) == doctest::Approx((1.0 / schur) * 0.5 * 2.0));
  Vector wrong(2);
  wrong << 1.0, 1.0;
  CHECK_THROWS_AS(gabp::mmse_condition(joint, wrong), gabp::DimensionMismatch);
}

TEST_CASE("direct inverse round-trips and gates singular input") {
  const Matrix a = m2(2, 1, 1, 2);
  const Matrix inv = gabp::direct_inverse(a);
  CHECK(max_abs_diff(a * inv, Matrix::Identity(2, 2)) < 1e-12);
  CHECK_THROWS_AS(gabp::direct_inverse(m2(1, 1, 1, 1)), gabp::SingularMatrix);
  CHECK_THROWS_AS(gabp::direct_inverse(Matrix::Zero(2, 3)),
                  gabp::DimensionMismatch);
}

TEST_CASE("inversion lemma agrees with the direct update") {
  // (A^-1 considered known) the lemma evaluates (A - B D^-1 C)^-1 style
  // updates; cross-check against directly inverting the downdated matrix.
  Matrix a(2, 2), b(2, 1), c(1, 2), d(1, 1);
  a << 3, 0.5, 0.5, 2;
  b << 1, 0.25;
  c << 1, 0.25;
  d << 4;
  const Matrix ainv = gabp::direct_inverse(a);
  const Matrix lemma = gabp::matrix_inversion_lemma(ainv, b, c, d);
  // ainv + ainv B (D - C ainv B)^-1 C ainv equals (A - B D^-1 C)^-1.
  const Matrix target = gabp::direct_inverse(
      a - b * gabp::direct_inverse(d) * c);
  CHECK(max_abs_diff(lemma, target) < 1e-10);
}

TEST_CASE("inversion lemma covariance form") {
  // The measurement-update shape: P - P H^T (R + H P H^T)^-1 H P obtained
  // by passing (P, -H^T, H, R).
  Matrix p(2, 2), h(1, 2), r(1, 1);
  p << 2, 0.3, 0.3, 1.5;
  h << 1, 0.5;
  r << 1;
  const Matrix updated = gabp::matrix_inversion_lemma(p, -h.transpose(), h, r);
  const Matrix s = r + h * p * h.transpose();
  const Matrix expected = p - p * h.transpose() * gabp::direct_inverse(s) * h * p;
  CHECK(max_abs_diff(updated, expected) < 1e-12);
}

TEST_CASE("inversion lemma reports a singular inner term as a block failure") {
  // D - C ainv B = 0 for this choice.
  Matrix ainv = Matrix::Identity(1, 1);
  Matrix b = Matrix::Constant(1, 1, 2.0);
  Matrix c = Matrix::Constant(1, 1, 2.0);
  Matrix d = Matrix::Constant(1, 1, 4.0);
  CHECK_THROWS_AS(gabp::matrix_inversion_lemma(ainv, b, c, d),
                  gabp::SingularBlock);
  CHECK_THROWS_AS(gabp::matrix_inversion_lemma(ainv, b, Matrix::Identity(2, 2), d),
                  gabp::DimensionMismatch);
}
