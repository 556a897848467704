#include "gabp/gib.hpp"

#include <cmath>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "gabp/linalg.hpp"

namespace gabp {

namespace {

Matrix covariance_inverse(const Matrix& m, const char* what) {
  try {
    return direct_inverse(m);
  } catch (const SingularMatrix& e) {
    throw SingularCovariance(std::string(what) + " is singular: " + e.what());
  }
}

double log_det(const Matrix& m) {
  const auto lu = m.partialPivLu();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    sum += std::log(std::abs(lu.matrixLU()(i, i)));
  }
  return sum;
}

}  // namespace

void GibProblem::validate() const {
  const int n = dim();
  if (sigma_x.rows() != n || sigma_x.cols() != n || sigma_y.rows() != n ||
      sigma_y.cols() != n || sigma_xy.rows() != n || sigma_xy.cols() != n) {
    throw DimensionMismatch(
        "sigma_x, sigma_y, sigma_xy must all be square with one shared "
        "dimension");
  }
  if (!is_symmetric(sigma_x) || !is_symmetric(sigma_y)) {
    throw DimensionMismatch("sigma_x and sigma_y must be symmetric");
  }
  if (!(beta > 0.0)) {
    throw BetaOutOfRange("beta must be positive, got " + std::to_string(beta));
  }
  Matrix joint(2 * n, 2 * n);
  joint.topLeftCorner(n, n) = sigma_x;
  joint.topRightCorner(n, n) = sigma_xy;
  joint.bottomLeftCorner(n, n) = sigma_xy.transpose();
  joint.bottomRightCorner(n, n) = sigma_y;
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(joint);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw SingularCovariance("joint covariance of (X, Y) is not positive "
                             "definite (smallest eigenvalue " +
                             std::to_string(eig.eigenvalues().minCoeff()) +
                             ")");
  }
}

GibState initial_state(const GibProblem& problem, std::uint64_t seed) {
  const int n = problem.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Matrix a = Matrix::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      a(i, j) += 0.1 * unit(rng);
    }
  }
  return {a, Matrix::Identity(n, n)};
}

Matrix sigma_t(const GibProblem& problem, const GibState& state) {
  return state.a_k.transpose() * problem.sigma_x * state.a_k + state.sigma_xi;
}

Matrix sigma_ty(const GibProblem& problem, const GibState& state) {
  return state.a_k.transpose() * problem.sigma_xy;
}

Matrix sigma_t_given_y(const GibProblem& problem, const GibState& state) {
  const Matrix ty = sigma_ty(problem, state);
  BlockMatrix2x2 joint;
  joint.a = problem.sigma_y;
  joint.b = ty.transpose();
  joint.c = ty;
  joint.d = sigma_t(problem, state);
  return schur_complement(joint);
}

Matrix sigma_y_given_x(const GibProblem& problem) {
  BlockMatrix2x2 joint;
  joint.a = problem.sigma_x;
  joint.b = problem.sigma_xy;
  joint.c = problem.sigma_xy.transpose();
  joint.d = problem.sigma_y;
  return schur_complement(joint);
}

namespace {

Matrix projection_update(const GibProblem& problem, const GibState& state,
                         const Matrix& sigma_xi_next,
                         const Matrix& t_given_y) {
  const int n = problem.dim();
  const Matrix y_given_x = sigma_y_given_x(problem);
  const Matrix x_inv = covariance_inverse(problem.sigma_x, "sigma_x");
  const Matrix t_given_y_inv =
      covariance_inverse(t_given_y, "sigma_{t|y}");
  return problem.beta * sigma_xi_next * t_given_y_inv * state.a_k *
         (Matrix::Identity(n, n) - y_given_x * x_inv);
}

void check_state(const GibProblem& problem, const GibState& state) {
  const int n = problem.dim();
  if (state.a_k.rows() != n || state.a_k.cols() != n ||
      state.sigma_xi.rows() != n || state.sigma_xi.cols() != n) {
    throw DimensionMismatch("state blocks must be " + std::to_string(n) + "x" +
                            std::to_string(n));
  }
}

}  // namespace

GibState gib_iterate(const GibProblem& problem, const GibState& state) {
  problem.validate();
  check_state(problem, state);
  const Matrix t = sigma_t(problem, state);
  const Matrix t_given_y = sigma_t_given_y(problem, state);
  const Matrix t_inv = covariance_inverse(t, "sigma_t");
  const Matrix t_given_y_inv = covariance_inverse(t_given_y, "sigma_{t|y}");
  const Matrix precision_blend =
      problem.beta * t_given_y_inv - (problem.beta - 1.0) * t_inv;
  GibState next;
  next.sigma_xi =
      symmetrize(covariance_inverse(precision_blend, "blended precision"));
  next.a_k = projection_update(problem, state, next.sigma_xi, t_given_y);
  return next;
}

Matrix sigma_xi_update_mixed(const GibProblem& problem,
                             const GibState& state) {
  problem.validate();
  check_state(problem, state);
  const Matrix t_inv =
      covariance_inverse(sigma_t(problem, state), "sigma_t");
  return problem.beta * sigma_t_given_y(problem, state) -
         (problem.beta - 1.0) * t_inv;
}

Matrix sigma_xi_weighted(const GibProblem& problem, const GibState& state) {
  problem.validate();
  check_state(problem, state);
  return problem.beta * sigma_t_given_y(problem, state) +
         (1.0 - problem.beta) * sigma_t(problem, state);
}

GibFixedPointResult gib_fixed_point(const GibProblem& problem,
                                    const GibState& init, double tol,
                                    int max_rounds) {
  GibFixedPointResult result;
  result.state = init;
  for (int round = 0; round < max_rounds; ++round) {
    const GibState next = gib_iterate(problem, result.state);
    const double delta =
        std::max((next.a_k - result.state.a_k).cwiseAbs().maxCoeff(),
                 (next.sigma_xi - result.state.sigma_xi).cwiseAbs().maxCoeff());
    result.state = next;
    result.rounds = round + 1;
    if (delta <= tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

MappedKalman kalman_from_gib(const GibProblem& problem,
                             const GibState& state) {
  problem.validate();
  check_state(problem, state);
  const Matrix t = sigma_t(problem, state);
  const Matrix ty = sigma_ty(problem, state);
  const Matrix t_inv = covariance_inverse(t, "sigma_t");
  MappedKalman mapped;
  mapped.model.a = state.a_k;
  mapped.model.q = state.sigma_xi;
  mapped.model.h = ty.transpose() * t_inv;
  mapped.model.r = problem.sigma_y - ty.transpose() * t_inv * ty;
  mapped.p_prev = problem.sigma_x;
  return mapped;
}

GibState gib_via_modified_kalman(const GibProblem& problem,
                                 const GibState& state) {
  return gib_via_modified_kalman(problem, state, KalmanEngine::Schur);
}

GibState gib_via_modified_kalman(const GibProblem& problem,
                                 const GibState& state, KalmanEngine engine,
                                 double tol) {
  problem.validate();
  check_state(problem, state);
  if (problem.beta < 1.0) {
    throw BetaOutOfRange("the modified filter requires beta >= 1, got " +
                         std::to_string(problem.beta));
  }
  const MappedKalman mapped = kalman_from_gib(problem, state);
  // Prediction phase: covariance of T.
  const Matrix p_minus = mapped.model.q + mapped.model.a.transpose() *
                                              mapped.p_prev * mapped.model.a;
  // Measurement phase: covariance of T given Y. The classical engine is not
  // offered because the mapping relies on the A^T P A prediction convention.
  Matrix p_k;
  switch (engine) {
    case KalmanEngine::Schur:
      p_k = matrix_inversion_lemma(p_minus, -mapped.model.h.transpose(),
                                   mapped.model.h, mapped.model.r);
      break;
    case KalmanEngine::Gabp:
      p_k = pk_via_gabp(mapped.p_prev, mapped.model, tol);
      break;
    default:
      throw Error(
          "the bottleneck mapping supports only the schur and gabp engines");
  }
  GibState next;
  next.sigma_xi = symmetrize(problem.beta * p_k +
                             (1.0 - problem.beta) * p_minus);
  next.a_k = projection_update(problem, state, next.sigma_xi, p_k);
  return next;
}

GibInfo mutual_information(const GibProblem& problem, const GibState& state) {
  problem.validate();
  check_state(problem, state);
  const double log_det_t = log_det(sigma_t(problem, state));
  GibInfo info;
  info.compression = 0.5 * (log_det_t - log_det(state.sigma_xi));
  info.relevance = 0.5 * (log_det_t - log_det(sigma_t_given_y(problem, state)));
  return info;
}

}  // namespace gabp
