#pragma once

#include <vector>

#include "gabp/kalman.hpp"
#include "gabp/types.hpp"

namespace gabp {

// Canonical-form LP: minimize c.x subject to A x = b, x >= 0, with A of full
// row rank p < n.
struct LpProblem {
  Matrix a;
  Vector b;
  Vector c;

  int num_constraints() const { return static_cast<int>(a.rows()); }
  int num_variables() const { return static_cast<int>(a.cols()); }
  void validate() const;
};

struct AffineLastStep {
  Vector r;  // reduced cost c - A^T w
  Vector w;  // dual estimate (A D^2 A^T)^-1 A D^2 c
  double gamma = 0.0;
};

struct AffineState {
  Vector x;  // strictly feasible interior point
  int iteration = 0;
  AffineLastStep last_step;
};

struct StepDiagnostics {
  Matrix d;  // diag(x)
  Matrix p;  // projector I - D A^T (A D^2 A^T)^-1 A D onto null(A D)
  double objective = 0.0;
};

// One interior-point update x1 = x0 - (alpha/gamma) D^2 r with D = diag(x0),
// w = (A D^2 A^T)^-1 A D^2 c, r = c - A^T w, and gamma the largest entry of
// the projected scaled gradient P D c (equal to D r, which is how it is
// computed). With gabp_normal_solver the SPD normal matrix A D^2 A^T is
// inverted by GaBP instead of the direct routine.
AffineState affine_step(const LpProblem& problem, const AffineState& state,
                        double alpha, bool gabp_normal_solver = false);

StepDiagnostics step_diagnostics(const LpProblem& problem,
                                 const AffineState& state);

struct LpResult {
  AffineState state;
  bool converged = false;
};

// Repeats affine_step from x0 until the relative objective decrease drops to
// tol, the scaled reduced cost ||D r||_inf drops below 1e-10, or the step
// degenerates (projected gradient numerically zero, meaning every descent
// direction has left the feasible cone). When history is given it receives
// the initial state followed by every accepted iterate.
LpResult solve_lp(const LpProblem& problem, const Vector& x0, double alpha,
                  double tol, int max_iterations,
                  bool gabp_normal_solver = false,
                  std::vector<AffineState>* history = nullptr);

// The symmetric 3x3 block matrix exhibiting one interior-point iteration as
// a covariance-style block computation, with block dimensions (n, p, n):
//   [ 0      D A^T   0   ]
//   [ A D    I_p     A D ]
//   [ 0      D A^T   I_n ]
Matrix build_lp_block_matrix(const LpProblem& problem,
                             const AffineState& state);

// Kalman parameters realizing the interior-point iteration: transition and
// measurement both A D, unit process and measurement noise, zero prior.
MappedKalman kalman_params_from_lp(const LpProblem& problem,
                                   const AffineState& state);

}  // namespace gabp
