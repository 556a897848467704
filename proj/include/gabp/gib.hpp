#pragma once

#include <cstdint>

#include "gabp/kalman.hpp"
#include "gabp/types.hpp"

namespace gabp {

// Joint Gaussian (X, Y) with a trade-off weight beta. The bottleneck
// variable is T = A_k^T X + xi with xi ~ N(0, Sigma_xi); all three blocks
// share one dimension so the Kalman bridge below is well-formed.
struct GibProblem {
  Matrix sigma_x;
  Matrix sigma_y;
  Matrix sigma_xy;
  double beta = 1.0;

  int dim() const { return static_cast<int>(sigma_x.rows()); }
  void validate() const;
};

struct GibState {
  Matrix a_k;
  Matrix sigma_xi;
};

// Seeded starting point: A_0 is the identity plus a small uniform
// perturbation, Sigma_xi0 = I.
GibState initial_state(const GibProblem& problem, std::uint64_t seed);

// Covariance of T = A_k^T X + xi.
Matrix sigma_t(const GibProblem& problem, const GibState& state);
// Cross covariance of T and Y: A_k^T Sigma_xy.
Matrix sigma_ty(const GibProblem& problem, const GibState& state);
// Conditional covariance Sigma_t - Sigma_ty Sigma_y^-1 Sigma_yt.
Matrix sigma_t_given_y(const GibProblem& problem, const GibState& state);
// Conditional covariance Sigma_y - Sigma_yx Sigma_x^-1 Sigma_xy.
Matrix sigma_y_given_x(const GibProblem& problem);

// One bottleneck round. The noise update is the precision-space blend
// (beta Sigma_{t|y}^-1 - (beta-1) Sigma_t^-1)^-1; the projection update is
// A_{k+1} = beta Sigma_xi' Sigma_{t|y}^-1 A_k (I - Sigma_{y|x} Sigma_x^-1).
GibState gib_iterate(const GibProblem& problem, const GibState& state);

// The noise update as beta Sigma_{t|y} - (beta-1) Sigma_t^-1, which mixes a
// covariance with a precision. Dimensionally inconsistent as an update rule;
// retained for side-by-side comparison with the consistent form above.
Matrix sigma_xi_update_mixed(const GibProblem& problem, const GibState& state);

// Covariance-space blend beta Sigma_{t|y} + (1-beta) Sigma_t.
Matrix sigma_xi_weighted(const GibProblem& problem, const GibState& state);

struct GibFixedPointResult {
  GibState state;
  int rounds = 0;
  bool converged = false;
};

// Iterates gib_iterate until both max-norm deltas drop to tol or the round
// budget runs out.
GibFixedPointResult gib_fixed_point(const GibProblem& problem,
                                    const GibState& init, double tol,
                                    int max_rounds);

// Kalman model whose covariance round reproduces one bottleneck round at
// beta = 1: transition A_k, process noise Sigma_xi, prior Sigma_x,
// measurement H = Sigma_yt Sigma_t^-1 with noise R = Sigma_{y|t}. With these
// the prediction covariance is Sigma_t, the innovation is Sigma_y, and the
// posterior covariance is exactly Sigma_{t|y}.
MappedKalman kalman_from_gib(const GibProblem& problem, const GibState& state);

// Runs the mapped Kalman prediction and measurement phases, blends the two
// resulting covariances as beta Sigma_{t|y} + (1-beta) Sigma_t, and applies
// the projection update. Requires beta >= 1.
GibState gib_via_modified_kalman(const GibProblem& problem,
                                 const GibState& state);

// Engine-aware variant: Schur computes the measurement reduction in closed
// form, Gabp inverts the innovation with the iterative solver at the given
// tolerance. The classical engine is rejected because the mapping depends on
// the A^T P A prediction convention.
GibState gib_via_modified_kalman(const GibProblem& problem,
                                 const GibState& state, KalmanEngine engine,
                                 double tol = kDefaultTolerance);

struct GibInfo {
  double compression = 0.0;  // I(X;T)
  double relevance = 0.0;    // I(T;Y)
};

GibInfo mutual_information(const GibProblem& problem, const GibState& state);

}  // namespace gabp
