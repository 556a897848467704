#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gabp/matrix_io.hpp"
#include "gabp/types.hpp"

namespace gabp {

enum class Schedule { Synchronous, Sequential };

inline constexpr double kDefaultTolerance = 1e-10;

// Default iteration budget: sparse well-conditioned systems settle in a few
// dozen rounds, so 10n + 200 leaves generous headroom.
inline int default_max_rounds(int n) { return 10 * n + 200; }

struct SolveOptions {
  double tol = kDefaultTolerance;
  int max_rounds = 0;  // 0 means default_max_rounds(n)
  Schedule schedule = Schedule::Synchronous;
  double damping = 0.0;  // 0 disables damping (extension, off by default)
};

// Undirected graphical model of the linear system Ax = b: one node per
// variable, one edge per nonzero off-diagonal pair. A must be symmetric with
// nonzero diagonal; the diagonal requirement is enforced at init() so that a
// graph with a zero diagonal entry can still be constructed and rejected
// there. Adjacency is CSR with neighbors sorted ascending per node; every
// directed edge knows the slot of its reverse.
class GabpGraph {
 public:
  GabpGraph(const Matrix& a, const Vector& b);
  GabpGraph(const SparseMatrixData& a, const Vector& b);

  int size() const { return n_; }
  const Vector& diagonal() const { return diag_; }
  const Vector& rhs() const { return b_; }
  int edge_count() const { return static_cast<int>(neighbors_.size()); }

  // Directed edges out of `node` occupy slots [edge_begin, edge_end).
  int edge_begin(int node) const { return offsets_[node]; }
  int edge_end(int node) const { return offsets_[node + 1]; }
  int neighbor(int slot) const { return neighbors_[slot]; }
  // A_{i,j} for the directed edge i -> j stored at `slot`.
  double coefficient(int slot) const { return coeffs_[slot]; }
  // Slot of the opposite directed edge j -> i.
  int reverse_slot(int slot) const { return reverse_[slot]; }

  Matrix dense_matrix() const;

 private:
  void build(std::vector<Triplet> off_diagonal);

  int n_ = 0;
  Vector diag_;
  Vector b_;
  std::vector<int> offsets_;
  std::vector<int> neighbors_;
  std::vector<double> coeffs_;
  std::vector<int> reverse_;
};

struct GabpMessage {
  double precision = 0.0;
  double mean = 0.0;
};

struct GabpState {
  std::shared_ptr<const GabpGraph> graph;
  Vector self_precision;  // P_ii = A_ii
  Vector self_mean;       // mu_ii = b_i / A_ii
  std::vector<GabpMessage> messages;  // one per directed edge, slot order
  int round = 0;
};

struct SolveReport {
  Vector solution;
  Vector marginal_precisions;
  int rounds = 0;
  bool converged = false;
  std::vector<double> residual_history;  // max message delta per round
  bool diverged = false;
  std::string error;
};

namespace detail {

// Running totals for one node: precision = P_ii + sum of incoming message
// precisions, weighted_mean = P_ii*mu_ii + sum of P_ki*mu_ki. Incoming
// messages must be added in ascending sender order; the centralized solver
// and the distributed harness both rely on that so their floating-point
// results are bit-identical.
struct NodeAccumulator {
  double precision;
  double weighted_mean;

  NodeAccumulator(double self_precision, double self_mean)
      : precision(self_precision), weighted_mean(self_precision * self_mean) {}

  void add(const GabpMessage& incoming) {
    precision += incoming.precision;
    weighted_mean += incoming.precision * incoming.mean;
  }
};

// One outgoing message i -> j. The exclusion sums P_{i\j}, mu_{i\j} are the
// node totals minus the reverse message's contribution.
inline GabpMessage edge_message(const NodeAccumulator& totals,
                                const GabpMessage& reverse, double a_ij,
                                double a_ji) {
  const double excl_precision = totals.precision - reverse.precision;
  if (excl_precision == 0.0) {
    throw ZeroIntermediatePrecision("P_{i\\j} is zero");
  }
  const double excl_mean =
      (totals.weighted_mean - reverse.precision * reverse.mean) /
      excl_precision;
  GabpMessage out;
  out.precision = -a_ij * (1.0 / excl_precision) * a_ji;
  if (out.precision == 0.0) {
    throw ZeroIntermediatePrecision("P_ij is zero");
  }
  out.mean = -(1.0 / out.precision) * a_ij * excl_mean;
  return out;
}

struct Marginal {
  double precision;
  double mean;
};

inline Marginal node_marginal(const NodeAccumulator& totals, int node) {
  if (totals.precision == 0.0) {
    throw ZeroMarginalPrecision("marginal precision of node " +
                                std::to_string(node) + " is zero");
  }
  return {totals.precision, totals.weighted_mean / totals.precision};
}

}  // namespace detail

GabpState init(std::shared_ptr<const GabpGraph> graph);
GabpState init(const GabpGraph& graph);

GabpState iterate_round(const GabpState& state, Schedule schedule,
                        double damping = 0.0);

// Largest absolute per-message change between two states on the same graph.
double message_delta(const GabpState& prev, const GabpState& next);

bool has_converged(const GabpState& prev, const GabpState& next, double tol);

SolveReport infer(const GabpState& state);

SolveReport solve(std::shared_ptr<const GabpGraph> graph,
                  const SolveOptions& options = {});
SolveReport solve(const GabpGraph& graph, const SolveOptions& options = {});
SolveReport solve(const Matrix& a, const Vector& b,
                  const SolveOptions& options = {});
SolveReport solve(const Matrix& a, const Vector& b, double tol, int max_rounds,
                  Schedule schedule);

// Inverse of a computed column by column, solving A x = e_i for each i.
Matrix invert_via_gabp(const Matrix& a, double tol = kDefaultTolerance,
                       int max_rounds = 0);

// Strict row dominance: |A_ii| > sum_{j != i} |A_ij| for every row.
bool diagonal_dominance_check(const Matrix& a);

struct SpectralRadiusResult {
  double radius = 0.0;
  bool satisfied = false;
};

// Walk-summability condition: normalize A to unit diagonal and take the
// spectral radius of |I - A_norm| by power iteration; satisfied iff < 1.
SpectralRadiusResult spectral_radius_check(const Matrix& a);

}  // namespace gabp
