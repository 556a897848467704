#include "gabp/affine.hpp"

#include <cmath>
#include <string>

#include "gabp/linalg.hpp"
#include "gabp/solver.hpp"

namespace gabp {

namespace {

constexpr double kGammaFloor = 1e-14;
constexpr double kFeasibilityTolerance = 1e-8;
constexpr double kReducedCostFloor = 1e-10;

Matrix normal_matrix_inverse(const Matrix& normal, bool gabp_normal_solver) {
  try {
    if (gabp_normal_solver) {
      return invert_via_gabp(normal);
    }
    return direct_inverse(normal);
  } catch (const SingularMatrix& e) {
    throw SingularNormalMatrix(std::string("A D^2 A^T is singular: ") +
                               e.what());
  }
}

void check_state(const LpProblem& problem, const AffineState& state) {
  if (state.x.size() != problem.num_variables()) {
    throw DimensionMismatch("point has length " +
                            std::to_string(state.x.size()) + ", expected " +
                            std::to_string(problem.num_variables()));
  }
}

}  // namespace

void LpProblem::validate() const {
  const int p = num_constraints();
  const int n = num_variables();
  if (b.size() != p) {
    throw DimensionMismatch("b has length " + std::to_string(b.size()) +
                            ", expected " + std::to_string(p));
  }
  if (c.size() != n) {
    throw DimensionMismatch("c has length " + std::to_string(c.size()) +
                            ", expected " + std::to_string(n));
  }
  if (p >= n) {
    throw DimensionMismatch(
        "canonical form requires fewer constraints than variables, got " +
        std::to_string(p) + " x " + std::to_string(n));
  }
  const double cond = condition_estimate(a * a.transpose());
  if (!std::isfinite(cond) || cond > kSingularConditionLimit) {
    throw SingularNormalMatrix("constraint matrix is rank deficient");
  }
}

AffineState affine_step(const LpProblem& problem, const AffineState& state,
                        double alpha, bool gabp_normal_solver) {
  problem.validate();
  check_state(problem, state);
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error("step size alpha must lie in (0, 1), got " +
                std::to_string(alpha));
  }
  const Vector& x = state.x;
  const Matrix ad = problem.a * x.asDiagonal();          // A D
  const Matrix normal = ad * ad.transpose();             // A D^2 A^T
  const Matrix normal_inv = normal_matrix_inverse(normal, gabp_normal_solver);
  const Vector w = normal_inv * (ad * x.cwiseProduct(problem.c));
  const Vector r = problem.c - problem.a.transpose() * w;
  // The projected scaled gradient P D c equals D r, so gamma is read off r.
  const double gamma = x.cwiseProduct(r).maxCoeff();
  if (gamma <= kGammaFloor) {
    throw DegenerateStep("projected gradient is numerically zero (gamma = " +
                         std::to_string(gamma) + ")");
  }
  AffineState next;
  next.x = x - (alpha / gamma) * x.cwiseProduct(x).cwiseProduct(r);
  // The exact step keeps A x = b (A D^2 r = 0 for the projected r); repair
  // the floating-point drift, which the 1/gamma factor amplifies near a
  // vertex, by projecting back onto the constraint set.
  const Vector residual = problem.b - problem.a * next.x;
  next.x += problem.a.transpose() *
            (problem.a * problem.a.transpose()).partialPivLu().solve(residual);
  next.iteration = state.iteration + 1;
  next.last_step = {r, w, gamma};
  return next;
}

StepDiagnostics step_diagnostics(const LpProblem& problem,
                                 const AffineState& state) {
  problem.validate();
  check_state(problem, state);
  const int n = problem.num_variables();
  const Matrix ad = problem.a * state.x.asDiagonal();
  const Matrix normal_inv = normal_matrix_inverse(ad * ad.transpose(), false);
  StepDiagnostics diag;
  diag.d = Matrix(state.x.asDiagonal());
  diag.p = Matrix::Identity(n, n) - ad.transpose() * normal_inv * ad;
  diag.objective = problem.c.dot(state.x);
  return diag;
}

LpResult solve_lp(const LpProblem& problem, const Vector& x0, double alpha,
                  double tol, int max_iterations, bool gabp_normal_solver,
                  std::vector<AffineState>* history) {
  problem.validate();
  if (x0.size() != problem.num_variables()) {
    throw InfeasibleStart("x0 has length " + std::to_string(x0.size()) +
                          ", expected " +
                          std::to_string(problem.num_variables()));
  }
  if (x0.minCoeff() <= 0.0) {
    throw InfeasibleStart("x0 must be strictly positive");
  }
  const double residual = (problem.a * x0 - problem.b).cwiseAbs().maxCoeff();
  if (residual > kFeasibilityTolerance) {
    throw InfeasibleStart("A x0 deviates from b by " + std::to_string(residual));
  }

  LpResult result;
  result.state = AffineState{x0, 0, {}};
  if (history != nullptr) {
    history->push_back(result.state);
  }
  double objective = problem.c.dot(x0);
  for (int iter = 0; iter < max_iterations; ++iter) {
    AffineState next;
    try {
      next = affine_step(problem, result.state, alpha, gabp_normal_solver);
    } catch (const DegenerateStep&) {
      // Projected gradient vanished: the current point is optimal for the
      // scaled problem, so stop here.
      result.converged = true;
      break;
    }
    const double scaled_cost =
        result.state.x.cwiseProduct(next.last_step.r).cwiseAbs().maxCoeff();
    if (scaled_cost <= kReducedCostFloor) {
      // The optimality proxy already holds at the current point, so the step
      // just computed is amplified rounding noise; keep the point and record
      // the multipliers that certify it.
      result.state.last_step = next.last_step;
      result.converged = true;
      break;
    }
    if (next.x.minCoeff() <= 0.0) {
      // The exact update scales every coordinate by at least 1 - alpha, so a
      // sign loss can only come from rounding noise amplified by 1/gamma;
      // treat it as the numerical optimum.
      result.state.last_step = next.last_step;
      result.converged = true;
      break;
    }
    const double next_objective = problem.c.dot(next.x);
    if (next_objective >= objective) {
      // The exact iteration descends strictly while the projected gradient
      // is nonzero, so a non-improving step means rounding noise dominates;
      // keep the current point and stop.
      result.state.last_step = next.last_step;
      result.converged = true;
      break;
    }
    const double drop = objective - next_objective;
    result.state = next;
    if (history != nullptr) {
      history->push_back(result.state);
    }
    if (drop <= tol * std::max(1.0, std::abs(objective))) {
      result.converged = true;
      break;
    }
    objective = next_objective;
  }
  return result;
}

Matrix build_lp_block_matrix(const LpProblem& problem,
                             const AffineState& state) {
  problem.validate();
  check_state(problem, state);
  const int p = problem.num_constraints();
  const int n = problem.num_variables();
  const Matrix ad = problem.a * state.x.asDiagonal();
  Matrix block = Matrix::Zero(2 * n + p, 2 * n + p);
  block.block(0, n, n, p) = ad.transpose();
  block.block(n, 0, p, n) = ad;
  block.block(n, n, p, p) = Matrix::Identity(p, p);
  block.block(n, n + p, p, n) = ad;
  block.block(n + p, n, n, p) = ad.transpose();
  block.block(n + p, n + p, n, n) = Matrix::Identity(n, n);
  return block;
}

MappedKalman kalman_params_from_lp(const LpProblem& problem,
                                   const AffineState& state) {
  problem.validate();
  check_state(problem, state);
  const int p = problem.num_constraints();
  const int n = problem.num_variables();
  const Matrix ad = problem.a * state.x.asDiagonal();
  MappedKalman mapped;
  mapped.model.a = ad;
  mapped.model.h = ad;
  mapped.model.q = Matrix::Identity(n, n);
  mapped.model.r = Matrix::Identity(p, p);
  mapped.p_prev = Matrix::Zero(p, p);
  return mapped;
}

}  // namespace gabp
