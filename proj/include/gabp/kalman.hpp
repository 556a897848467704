#pragma once

#include <vector>

#include "gabp/solver.hpp"
#include "gabp/types.hpp"

namespace gabp {

// Discrete-time model x_k = A x_{k-1} + B u_{k-1} + w, z_k = H x_k + v with
// process noise covariance Q and measurement noise covariance R. B may be
// empty (no control input). The transition is allowed to be rectangular
// (p x n) because the interior-point reduction maps A*diag(x) onto it; the
// classical prediction step itself requires a square transition.
struct KalmanModel {
  Matrix a;
  Matrix b;
  Matrix h;
  Matrix q;
  Matrix r;

  int state_dim() const { return static_cast<int>(q.rows()); }
  int measurement_dim() const { return static_cast<int>(r.rows()); }
  void validate() const;
};

struct KalmanState {
  Vector xhat;
  Matrix p;
  int k = 0;
};

struct Prediction {
  Vector xhat_minus;
  Matrix p_minus;
  int k = 0;  // index of the state the prediction was made from
};

enum class KalmanEngine { Classical, Schur, Gabp };

// A model plus the prior covariance it should be run from; produced by the
// bottleneck and interior-point reductions.
struct MappedKalman {
  KalmanModel model;
  Matrix p_prev;
};

// x^-_k = A xhat + B u, P^-_k = A P A^T + Q. An empty u is treated as zero.
Prediction predict(const KalmanModel& model, const KalmanState& state,
                   const Vector& u = Vector());

// K = P^- H^T (H P^- H^T + R)^-1, xhat = x^- + K(z - H x^-),
// P = (I - K H) P^-.
KalmanState measure(const KalmanModel& model, const Prediction& pred,
                    const Vector& z);

// The (2n+m) x (2n+m) symmetric block matrix whose inversion reproduces one
// covariance update:
//   [ -P_{k-1}  A    0  ]
//   [  A^T      Q   H^T ]
//   [  0        H    R  ]
Matrix build_e_matrix(const Matrix& p_prev, const KalmanModel& model);

// Covariance update as two Schur-complement reductions of the block matrix
// above: first P^- = Q + A^T P_{k-1} A, then the matrix-inversion-lemma step
// P_k = P^- - P^- H^T (R + H P^- H^T)^-1 H P^-. Note the first step uses the
// A^T P A convention, which differs from the classical A P A^T for
// non-symmetric transitions; see README.
Matrix pk_via_two_schur(const Matrix& p_prev, const KalmanModel& model);

// Same contract as pk_via_two_schur, with the one internal matrix inversion
// (the innovation R + H P^- H^T) performed by GaBP. The innovation system is
// checked against the walk-summability condition first.
Matrix pk_via_gabp(const Matrix& p_prev, const KalmanModel& model,
                   double tol = kDefaultTolerance);

// Runs predict+measure per observation. The covariance path is computed by
// the selected engine; the mean path always uses the closed-form gain.
std::vector<KalmanState> filter_sequence(const KalmanModel& model,
                                         const KalmanState& init,
                                         const std::vector<Vector>& observations,
                                         KalmanEngine engine,
                                         double tol = kDefaultTolerance);

}  // namespace gabp
