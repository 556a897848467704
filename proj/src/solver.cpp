#include "gabp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "gabp/linalg.hpp"

namespace gabp {

namespace {

void check_vector_length(const Vector& b, int n) {
  if (b.size() != n) {
    throw DimensionMismatch("right-hand side has length " +
                            std::to_string(b.size()) + ", expected " +
                            std::to_string(n));
  }
}

bool all_finite(const GabpState& state) {
  for (const auto& m : state.messages) {
    if (!std::isfinite(m.precision) || !std::isfinite(m.mean)) return false;
  }
  return true;
}

// Totals for one node from the message array of `state`, incoming messages
// added in ascending sender order (CSR neighbors are sorted, and the reverse
// slot of edge i->j carries the message j->i).
detail::NodeAccumulator node_totals(const GabpState& state, int node) {
  const GabpGraph& g = *state.graph;
  detail::NodeAccumulator acc(state.self_precision(node),
                              state.self_mean(node));
  for (int s = g.edge_begin(node); s < g.edge_end(node); ++s) {
    acc.add(state.messages[g.reverse_slot(s)]);
  }
  return acc;
}

void update_node_messages(const GabpState& source, GabpState& target,
                          int node, double damping) {
  const GabpGraph& g = *source.graph;
  const detail::NodeAccumulator totals = node_totals(source, node);
  for (int s = g.edge_begin(node); s < g.edge_end(node); ++s) {
    const int rs = g.reverse_slot(s);
    const GabpMessage fresh = detail::edge_message(
        totals, source.messages[rs], g.coefficient(s), g.coefficient(rs));
    if (damping == 0.0) {
      target.messages[s] = fresh;
    } else {
      const GabpMessage& old = source.messages[s];
      target.messages[s].precision =
          (1.0 - damping) * fresh.precision + damping * old.precision;
      target.messages[s].mean =
          (1.0 - damping) * fresh.mean + damping * old.mean;
    }
  }
}

}  // namespace

GabpGraph::GabpGraph(const Matrix& a, const Vector& b) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch("system matrix must be square, got " +
                            std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()));
  }
  n_ = static_cast<int>(a.rows());
  check_vector_length(b, n_);
  if (!is_symmetric(a)) {
    throw Error("system matrix must be symmetric");
  }
  diag_ = a.diagonal();
  b_ = b;
  std::vector<Triplet> off;
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (i != j && a(i, j) != 0.0) {
        off.push_back({i, j, a(i, j)});
      }
    }
  }
  build(std::move(off));
}

GabpGraph::GabpGraph(const SparseMatrixData& a, const Vector& b) {
  if (a.rows != a.cols) {
    throw DimensionMismatch("system matrix must be square, got " +
                            std::to_string(a.rows) + "x" +
                            std::to_string(a.cols));
  }
  n_ = a.rows;
  check_vector_length(b, n_);
  diag_ = Vector::Zero(n_);
  b_ = b;
  std::vector<Triplet> off;
  off.reserve(a.entries.size());
  for (const auto& t : a.entries) {
    if (t.row < 0 || t.row >= n_ || t.col < 0 || t.col >= n_) {
      throw DimensionMismatch("triplet index out of range");
    }
    if (t.row == t.col) {
      diag_(t.row) += t.value;
    } else {
      off.push_back(t);
    }
  }
  build(std::move(off));
}

void GabpGraph::build(std::vector<Triplet> off_diagonal) {
  // Collapse duplicate triplets, then lay the adjacency out in CSR with
  // neighbors ascending per node.
  std::vector<std::vector<std::pair<int, double>>> adj(n_);
  for (const auto& t : off_diagonal) {
    adj[t.row].push_back({t.col, t.value});
  }
  for (auto& row : adj) {
    std::sort(row.begin(), row.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    size_t w = 0;
    for (size_t r = 0; r < row.size(); ++r) {
      if (w > 0 && row[w - 1].first == row[r].first) {
        row[w - 1].second += row[r].second;
      } else {
        row[w++] = row[r];
      }
    }
    row.resize(w);
    row.erase(std::remove_if(row.begin(), row.end(),
                             [](const auto& e) { return e.second == 0.0; }),
              row.end());
  }

  offsets_.assign(n_ + 1, 0);
  for (int i = 0; i < n_; ++i) {
    offsets_[i + 1] = offsets_[i] + static_cast<int>(adj[i].size());
  }
  neighbors_.reserve(offsets_[n_]);
  coeffs_.reserve(offsets_[n_]);
  for (int i = 0; i < n_; ++i) {
    for (const auto& [j, v] : adj[i]) {
      neighbors_.push_back(j);
      coeffs_.push_back(v);
    }
  }

  reverse_.assign(neighbors_.size(), -1);
  for (int i = 0; i < n_; ++i) {
    for (int s = offsets_[i]; s < offsets_[i + 1]; ++s) {
      const int j = neighbors_[s];
      const auto begin = neighbors_.begin() + offsets_[j];
      const auto end = neighbors_.begin() + offsets_[j + 1];
      const auto it = std::lower_bound(begin, end, i);
      if (it == end || *it != i) {
        throw Error("system matrix structure must be symmetric: entry (" +
                    std::to_string(i) + "," + std::to_string(j) +
                    ") has no transpose partner");
      }
      const int rs = static_cast<int>(it - neighbors_.begin());
      reverse_[s] = rs;
      const double scale =
          std::max({1.0, std::abs(coeffs_[s]), std::abs(coeffs_[rs])});
      if (std::abs(coeffs_[s] - coeffs_[rs]) > kSymmetryTolerance * scale) {
        throw Error("system matrix must be symmetric: A(" + std::to_string(i) +
                    "," + std::to_string(j) + ") != A(" + std::to_string(j) +
                    "," + std::to_string(i) + ")");
      }
    }
  }
}

Matrix GabpGraph::dense_matrix() const {
  Matrix a = Matrix::Zero(n_, n_);
  a.diagonal() = diag_;
  for (int i = 0; i < n_; ++i) {
    for (int s = offsets_[i]; s < offsets_[i + 1]; ++s) {
      a(i, neighbors_[s]) = coeffs_[s];
    }
  }
  return a;
}

GabpState init(std::shared_ptr<const GabpGraph> graph) {
  const GabpGraph& g = *graph;
  const int n = g.size();
  for (int i = 0; i < n; ++i) {
    if (g.diagonal()(i) == 0.0) {
      throw ZeroDiagonal("A(" + std::to_string(i) + "," + std::to_string(i) +
                         ") is zero");
    }
  }
  GabpState state;
  state.graph = std::move(graph);
  state.self_precision = g.diagonal();
  state.self_mean = g.rhs().cwiseQuotient(g.diagonal());
  state.messages.assign(g.edge_count(), GabpMessage{});
  state.round = 0;
  return state;
}

GabpState init(const GabpGraph& graph) {
  return init(std::make_shared<const GabpGraph>(graph));
}

GabpState iterate_round(const GabpState& state, Schedule schedule,
                        double damping) {
  const GabpGraph& g = *state.graph;
  GabpState next = state;
  if (schedule == Schedule::Synchronous) {
    // All messages from the previous round's values.
    for (int i = 0; i < g.size(); ++i) {
      update_node_messages(state, next, i, damping);
    }
  } else {
    // Fixed node order, each node reading the freshest messages.
    for (int i = 0; i < g.size(); ++i) {
      update_node_messages(next, next, i, damping);
    }
  }
  next.round = state.round + 1;
  if (!all_finite(next)) {
    throw Divergence("non-finite message at round " +
                     std::to_string(next.round));
  }
  return next;
}

double message_delta(const GabpState& prev, const GabpState& next) {
  if (prev.messages.size() != next.messages.size()) {
    throw DimensionMismatch("states belong to different graphs");
  }
  double delta = 0.0;
  for (size_t s = 0; s < prev.messages.size(); ++s) {
    delta = std::max(
        delta, std::abs(next.messages[s].precision - prev.messages[s].precision));
    delta =
        std::max(delta, std::abs(next.messages[s].mean - prev.messages[s].mean));
  }
  return delta;
}

bool has_converged(const GabpState& prev, const GabpState& next, double tol) {
  return message_delta(prev, next) <= tol;
}

SolveReport infer(const GabpState& state) {
  const GabpGraph& g = *state.graph;
  const int n = g.size();
  SolveReport report;
  report.solution = Vector::Zero(n);
  report.marginal_precisions = Vector::Zero(n);
  report.rounds = state.round;
  for (int i = 0; i < n; ++i) {
    const detail::Marginal m = detail::node_marginal(node_totals(state, i), i);
    report.marginal_precisions(i) = m.precision;
    report.solution(i) = m.mean;
  }
  return report;
}

SolveReport solve(std::shared_ptr<const GabpGraph> graph,
                  const SolveOptions& options) {
  const int n = graph->size();
  const int max_rounds =
      options.max_rounds > 0 ? options.max_rounds : default_max_rounds(n);

  GabpState state = init(std::move(graph));
  std::vector<double> history;
  bool converged = state.graph->edge_count() == 0;  // no messages to settle
  bool diverged = false;
  std::string error;

  if (!converged) {
    for (int round = 0; round < max_rounds; ++round) {
      GabpState next;
      try {
        next = iterate_round(state, options.schedule, options.damping);
      } catch (const Divergence& e) {
        diverged = true;
        error = e.what();
        break;
      } catch (const ZeroIntermediatePrecision& e) {
        error = e.what();
        break;
      }
      const double delta = message_delta(state, next);
      history.push_back(delta);
      state = std::move(next);
      if (delta <= options.tol) {
        converged = true;
        break;
      }
    }
  }

  SolveReport report;
  try {
    report = infer(state);
  } catch (const ZeroMarginalPrecision& e) {
    report.solution = Vector::Zero(n);
    report.marginal_precisions = Vector::Zero(n);
    report.rounds = state.round;
    if (error.empty()) error = e.what();
    converged = false;
  }
  report.converged = converged;
  report.diverged = diverged;
  report.error = error;
  report.residual_history = std::move(history);
  return report;
}

SolveReport solve(const GabpGraph& graph, const SolveOptions& options) {
  return solve(std::make_shared<const GabpGraph>(graph), options);
}

SolveReport solve(const Matrix& a, const Vector& b,
                  const SolveOptions& options) {
  return solve(std::make_shared<const GabpGraph>(a, b), options);
}

SolveReport solve(const Matrix& a, const Vector& b, double tol, int max_rounds,
                  Schedule schedule) {
  SolveOptions options;
  options.tol = tol;
  options.max_rounds = max_rounds;
  options.schedule = schedule;
  return solve(a, b, options);
}

Matrix invert_via_gabp(const Matrix& a, double tol, int max_rounds) {
  const int n = static_cast<int>(a.rows());
  Matrix inverse = Matrix::Zero(n, n);
  std::vector<int> failed;
  SolveOptions options;
  options.tol = tol;
  options.max_rounds = max_rounds;
  for (int col = 0; col < n; ++col) {
    const SolveReport report = solve(a, Vector::Unit(n, col), options);
    inverse.col(col) = report.solution;
    if (!report.converged) failed.push_back(col);
  }
  if (!failed.empty()) {
    throw NotConverged("inversion failed to converge on " +
                           std::to_string(failed.size()) + " of " +
                           std::to_string(n) + " columns",
                       failed, inverse, "invert");
  }
  return inverse;
}

bool diagonal_dominance_check(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch("matrix must be square");
  }
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double off = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j != i) off += std::abs(a(i, j));
    }
    if (!(std::abs(a(i, i)) > off)) return false;
  }
  return true;
}

SpectralRadiusResult spectral_radius_check(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch("matrix must be square");
  }
  const int n = static_cast<int>(a.rows());
  for (int i = 0; i < n; ++i) {
    if (!(a(i, i) > 0.0)) {
      throw NonPositiveDiagonal("A(" + std::to_string(i) + "," +
                                std::to_string(i) + ") = " +
                                std::to_string(a(i, i)));
    }
  }
  const Vector scale = a.diagonal().cwiseSqrt().cwiseInverse();
  const Matrix normalized = scale.asDiagonal() * a * scale.asDiagonal();
  const Matrix m =
      (Matrix::Identity(n, n) - normalized).cwiseAbs();

  // m is symmetric and entrywise nonnegative, so its largest eigenvalue is
  // the spectral radius and power iteration from a positive vector reaches it.
  Vector v = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  double radius = 0.0;
  for (int it = 0; it < 1000; ++it) {
    const Vector w = m * v;
    const double norm = w.norm();
    if (norm == 0.0) {
      radius = 0.0;
      break;
    }
    const double estimate = v.dot(w);
    v = w / norm;
    if (it > 0 && std::abs(estimate - radius) <=
                      1e-12 * std::max(1.0, std::abs(estimate))) {
      radius = estimate;
      break;
    }
    radius = estimate;
  }
  return {radius, radius < 1.0};
}

}  // namespace gabp
