#include "gabp/kalman.hpp"

#include <string>

#include "gabp/linalg.hpp"

namespace gabp {

namespace {

Matrix innovation_inverse(const Matrix& s) {
  try {
    return direct_inverse(s);
  } catch (const SingularMatrix& e) {
    throw SingularInnovation(std::string("innovation matrix is singular: ") +
                             e.what());
  }
}

void require_square_transition(const KalmanModel& model, const char* op) {
  if (model.a.rows() != model.a.cols()) {
    throw DimensionMismatch(std::string(op) +
                            " requires a square transition matrix, got " +
                            std::to_string(model.a.rows()) + "x" +
                            std::to_string(model.a.cols()));
  }
}

}  // namespace

void KalmanModel::validate() const {
  if (q.rows() != q.cols()) {
    throw DimensionMismatch("Q must be square");
  }
  if (r.rows() != r.cols()) {
    throw DimensionMismatch("R must be square");
  }
  const int n = state_dim();
  const int m = measurement_dim();
  if (a.cols() != n) {
    throw DimensionMismatch("transition has " + std::to_string(a.cols()) +
                            " columns, state dimension is " +
                            std::to_string(n));
  }
  if (h.rows() != m || h.cols() != n) {
    throw DimensionMismatch("H must be " + std::to_string(m) + "x" +
                            std::to_string(n) + ", got " +
                            std::to_string(h.rows()) + "x" +
                            std::to_string(h.cols()));
  }
  if (b.size() != 0 && b.rows() != n) {
    throw DimensionMismatch("B must have " + std::to_string(n) + " rows");
  }
  if (!is_symmetric(q)) {
    throw DimensionMismatch("Q must be symmetric");
  }
  if (!is_symmetric(r)) {
    throw DimensionMismatch("R must be symmetric");
  }
}

Prediction predict(const KalmanModel& model, const KalmanState& state,
                   const Vector& u) {
  model.validate();
  require_square_transition(model, "classical prediction");
  const int n = model.state_dim();
  if (state.xhat.size() != n || state.p.rows() != n || state.p.cols() != n) {
    throw DimensionMismatch("state does not match model dimension " +
                            std::to_string(n));
  }
  Prediction pred;
  pred.xhat_minus = model.a * state.xhat;
  if (u.size() != 0) {
    if (model.b.size() == 0) {
      throw DimensionMismatch("control input given but model has no B");
    }
    if (u.size() != model.b.cols()) {
      throw DimensionMismatch("control input has length " +
                              std::to_string(u.size()) + ", B has " +
                              std::to_string(model.b.cols()) + " columns");
    }
    pred.xhat_minus += model.b * u;
  }
  pred.p_minus = model.a * state.p * model.a.transpose() + model.q;
  pred.k = state.k;
  return pred;
}

KalmanState measure(const KalmanModel& model, const Prediction& pred,
                    const Vector& z) {
  model.validate();
  const int n = model.state_dim();
  const int m = model.measurement_dim();
  if (pred.xhat_minus.size() != n || pred.p_minus.rows() != n ||
      pred.p_minus.cols() != n) {
    throw DimensionMismatch("prediction does not match model dimension " +
                            std::to_string(n));
  }
  if (z.size() != m) {
    throw DimensionMismatch("observation has length " +
                            std::to_string(z.size()) + ", expected " +
                            std::to_string(m));
  }
  const Matrix s = model.h * pred.p_minus * model.h.transpose() + model.r;
  const Matrix gain = pred.p_minus * model.h.transpose() * innovation_inverse(s);
  KalmanState next;
  next.xhat = pred.xhat_minus + gain * (z - model.h * pred.xhat_minus);
  next.p = (Matrix::Identity(n, n) - gain * model.h) * pred.p_minus;
  next.k = pred.k + 1;
  return next;
}

Matrix build_e_matrix(const Matrix& p_prev, const KalmanModel& model) {
  model.validate();
  require_square_transition(model, "the block-matrix construction");
  const int n = model.state_dim();
  const int m = model.measurement_dim();
  if (p_prev.rows() != n || p_prev.cols() != n) {
    throw DimensionMismatch("P_{k-1} must be " + std::to_string(n) + "x" +
                            std::to_string(n));
  }
  Matrix e = Matrix::Zero(2 * n + m, 2 * n + m);
  e.block(0, 0, n, n) = -p_prev;
  e.block(0, n, n, n) = model.a;
  e.block(n, 0, n, n) = model.a.transpose();
  e.block(n, n, n, n) = model.q;
  e.block(n, 2 * n, n, m) = model.h.transpose();
  e.block(2 * n, n, m, n) = model.h;
  e.block(2 * n, 2 * n, m, m) = model.r;
  return e;
}

Matrix pk_via_two_schur(const Matrix& p_prev, const KalmanModel& model) {
  model.validate();
  if (p_prev.rows() != model.a.rows() || p_prev.cols() != model.a.rows()) {
    throw DimensionMismatch("P_{k-1} must be " + std::to_string(model.a.rows()) +
                            "x" + std::to_string(model.a.rows()));
  }
  const Matrix p_minus = model.q + model.a.transpose() * p_prev * model.a;
  return matrix_inversion_lemma(p_minus, -model.h.transpose(), model.h,
                                model.r);
}

Matrix pk_via_gabp(const Matrix& p_prev, const KalmanModel& model, double tol) {
  model.validate();
  if (p_prev.rows() != model.a.rows() || p_prev.cols() != model.a.rows()) {
    throw DimensionMismatch("P_{k-1} must be " + std::to_string(model.a.rows()) +
                            "x" + std::to_string(model.a.rows()));
  }
  const Matrix p_minus = model.q + model.a.transpose() * p_prev * model.a;
  const Matrix s = model.r + model.h * p_minus * model.h.transpose();
  const SpectralRadiusResult check = spectral_radius_check(s);
  if (!check.satisfied) {
    throw NotConverged(
        "innovation system fails the walk-summability condition (radius " +
            std::to_string(check.radius) + ")",
        {}, {}, "measurement");
  }
  Matrix s_inverse;
  try {
    s_inverse = invert_via_gabp(s, tol);
  } catch (const NotConverged& e) {
    throw NotConverged(e.what(), e.failed_columns, e.partial, "measurement");
  }
  return p_minus -
         p_minus * model.h.transpose() * s_inverse * model.h * p_minus;
}

std::vector<KalmanState> filter_sequence(const KalmanModel& model,
                                         const KalmanState& init,
                                         const std::vector<Vector>& observations,
                                         KalmanEngine engine, double tol) {
  model.validate();
  require_square_transition(model, "filtering");
  std::vector<KalmanState> path;
  path.reserve(observations.size());
  KalmanState current = init;
  for (size_t round = 0; round < observations.size(); ++round) {
    try {
      if (engine == KalmanEngine::Classical) {
        current = measure(model, predict(model, current), observations[round]);
      } else {
        // Covariance by the selected engine (A^T P A convention), mean by the
        // closed-form gain built on that engine's prediction covariance.
        const Matrix p_minus =
            model.q + model.a.transpose() * current.p * model.a;
        const Matrix p_k = engine == KalmanEngine::Schur
                               ? pk_via_two_schur(current.p, model)
                               : pk_via_gabp(current.p, model, tol);
        const Matrix s = model.h * p_minus * model.h.transpose() + model.r;
        const Matrix gain =
            p_minus * model.h.transpose() * innovation_inverse(s);
        const Vector xm = model.a * current.xhat;
        KalmanState next;
        next.xhat = xm + gain * (observations[round] - model.h * xm);
        next.p = p_k;
        next.k = current.k + 1;
        current = next;
      }
    } catch (const Error& e) {
      throw Error("round " + std::to_string(round + 1) + ": " + e.what());
    }
    path.push_back(current);
  }
  return path;
}

}  // namespace gabp
