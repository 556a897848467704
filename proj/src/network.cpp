#include "gabp/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "gabp/linalg.hpp"

namespace gabp {

NodeActor::NodeActor(NodeRow row) : row_(std::move(row)) {
  if (row_.neighbors.size() != row_.coefficients.size()) {
    throw DimensionMismatch("node " + std::to_string(row_.id) +
                            ": neighbor and coefficient counts differ");
  }
  if (!std::is_sorted(row_.neighbors.begin(), row_.neighbors.end())) {
    throw DimensionMismatch("node " + std::to_string(row_.id) +
                            ": neighbors must ascend");
  }
  if (row_.diagonal == 0.0) {
    throw ZeroDiagonal("A(" + std::to_string(row_.id) + "," +
                       std::to_string(row_.id) + ") is zero");
  }
  self_mean_ = row_.b / row_.diagonal;
  inbox_.assign(row_.neighbors.size(), GabpMessage{});
}

int NodeActor::neighbor_index(int node) const {
  const auto it =
      std::lower_bound(row_.neighbors.begin(), row_.neighbors.end(), node);
  if (it == row_.neighbors.end() || *it != node) {
    throw DimensionMismatch("node " + std::to_string(row_.id) +
                            " has no edge to node " + std::to_string(node));
  }
  return static_cast<int>(it - row_.neighbors.begin());
}

void NodeActor::receive(int from, const GabpMessage& message) {
  inbox_[neighbor_index(from)] = message;
}

GabpMessage NodeActor::compute_message(int to) const {
  detail::NodeAccumulator totals(row_.diagonal, self_mean_);
  for (const GabpMessage& m : inbox_) totals.add(m);
  const int slot = neighbor_index(to);
  // A symmetric, so the reverse coefficient equals the row-local one.
  const double a_ij = row_.coefficients[slot];
  return detail::edge_message(totals, inbox_[slot], a_ij, a_ij);
}

detail::Marginal NodeActor::marginal() const {
  detail::NodeAccumulator totals(row_.diagonal, self_mean_);
  for (const GabpMessage& m : inbox_) totals.add(m);
  return detail::node_marginal(totals, row_.id);
}

DistributedRun::DistributedRun(std::vector<NodeActor> actors,
                               SchedulerConfig config)
    : actors_(std::move(actors)), config_(config), rng_(config.seed) {
  edge_offset_.reserve(actors_.size() + 1);
  edge_offset_.push_back(0);
  for (const NodeActor& node : actors_) {
    for (int to : node.neighbors()) {
      edges_.push_back({node.id(), to});
    }
    edge_offset_.push_back(static_cast<int>(edges_.size()));
  }
  last_sent_.assign(edges_.size(), GabpMessage{});
  node_diverged_.assign(actors_.size(), false);
  node_delta_.assign(actors_.size(), 0.0);
}

GabpMessage DistributedRun::sent(int from, int to) const {
  for (int e = edge_offset_[from]; e < edge_offset_[from + 1]; ++e) {
    if (edges_[e].to == to) return last_sent_[e];
  }
  throw DimensionMismatch("no directed edge " + std::to_string(from) + " -> " +
                          std::to_string(to));
}

double DistributedRun::step(std::vector<DeliveryRecord>* delivery_log) {
  std::fill(node_delta_.begin(), node_delta_.end(), 0.0);
  double max_delta = 0.0;
  const int round = rounds_ + 1;

  auto record = [&](int edge, const GabpMessage& fresh) {
    const GabpMessage& old = last_sent_[edge];
    const double delta = std::max(std::abs(fresh.precision - old.precision),
                                  std::abs(fresh.mean - old.mean));
    const int from = edges_[edge].from;
    node_delta_[from] = std::max(node_delta_[from], delta);
    max_delta = std::max(max_delta, delta);
    if (!std::isfinite(fresh.precision) || !std::isfinite(fresh.mean)) {
      node_diverged_[from] = true;
      diverged_ = true;
    }
    last_sent_[edge] = fresh;
    if (delivery_log != nullptr) {
      delivery_log->push_back(
          {round, from, edges_[edge].to, fresh.precision, fresh.mean});
    }
  };

  if (config_.mode == SchedulerMode::SynchronousRounds) {
    // Barrier semantics: all nodes read their inboxes before any delivery.
    std::vector<GabpMessage> fresh(edges_.size());
    for (size_t e = 0; e < edges_.size(); ++e) {
      fresh[e] = actors_[edges_[e].from].compute_message(edges_[e].to);
    }
    for (size_t e = 0; e < edges_.size(); ++e) {
      record(static_cast<int>(e), fresh[e]);
      actors_[edges_[e].to].receive(edges_[e].from, fresh[e]);
    }
  } else {
    // One epoch: every directed edge fires once in a fresh shuffled order,
    // delivering immediately so later firings see the newest values.
    std::vector<int> order(edges_.size());
    for (size_t e = 0; e < order.size(); ++e) order[e] = static_cast<int>(e);
    std::shuffle(order.begin(), order.end(), rng_);
    for (int e : order) {
      const GabpMessage fresh =
          actors_[edges_[e].from].compute_message(edges_[e].to);
      record(e, fresh);
      actors_[edges_[e].to].receive(edges_[e].from, fresh);
    }
  }
  rounds_ = round;
  return max_delta;
}

std::vector<NodeResult> DistributedRun::finals() const {
  std::vector<NodeResult> finals;
  finals.reserve(actors_.size());
  for (const NodeActor& node : actors_) {
    const detail::Marginal m = node.marginal();
    finals.push_back({m.precision, m.mean});
  }
  return finals;
}

std::vector<NodeActor> spawn_network(const Matrix& a, const Vector& b) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch("system matrix must be square");
  }
  const int n = static_cast<int>(a.rows());
  if (b.size() != n) {
    throw DimensionMismatch("right-hand side has length " +
                            std::to_string(b.size()) + ", expected " +
                            std::to_string(n));
  }
  if (!is_symmetric(a)) {
    throw Error("system matrix must be symmetric");
  }
  std::vector<NodeActor> actors;
  actors.reserve(n);
  for (int i = 0; i < n; ++i) {
    NodeRow row;
    row.id = i;
    row.diagonal = a(i, i);
    row.b = b(i);
    for (int j = 0; j < n; ++j) {
      if (j != i && a(i, j) != 0.0) {
        row.neighbors.push_back(j);
        row.coefficients.push_back(a(i, j));
      }
    }
    actors.emplace_back(std::move(row));
  }
  return actors;
}

std::vector<NodeActor> spawn_network(const SparseMatrixData& a,
                                     const Vector& b) {
  // Route through the graph builder for triplet collapsing and the symmetry
  // check, then hand each node its row.
  const GabpGraph graph(a, b);
  std::vector<NodeActor> actors;
  actors.reserve(graph.size());
  for (int i = 0; i < graph.size(); ++i) {
    NodeRow row;
    row.id = i;
    row.diagonal = graph.diagonal()(i);
    row.b = graph.rhs()(i);
    for (int s = graph.edge_begin(i); s < graph.edge_end(i); ++s) {
      row.neighbors.push_back(graph.neighbor(s));
      row.coefficients.push_back(graph.coefficient(s));
    }
    actors.emplace_back(std::move(row));
  }
  return actors;
}

RunTranscript run_distributed(std::vector<NodeActor> actors,
                              const SchedulerConfig& scheduler, double tol,
                              int max_rounds,
                              std::vector<DeliveryRecord>* delivery_log) {
  const int n = static_cast<int>(actors.size());
  if (max_rounds <= 0) max_rounds = default_max_rounds(n);
  DistributedRun run(std::move(actors), scheduler);

  RunTranscript transcript;
  transcript.node_converged.assign(n, true);
  transcript.node_diverged.assign(n, false);
  if (run.edge_count() > 0) {
    for (int round = 0; round < max_rounds; ++round) {
      const double delta = run.step(delivery_log);
      transcript.messages_per_round.push_back(run.edge_count());
      transcript.total_deliveries += run.edge_count();
      if (run.diverged()) {
        transcript.diverged = true;
        break;
      }
      if (delta <= tol) {
        transcript.converged = true;
        break;
      }
    }
    for (int i = 0; i < n; ++i) {
      transcript.node_converged[i] = run.node_delta()[i] <= tol;
      transcript.node_diverged[i] = run.node_diverged()[i];
    }
  } else {
    transcript.converged = true;  // no messages to exchange
  }
  transcript.total_rounds = run.rounds();
  if (!transcript.diverged) {
    transcript.finals = run.finals();
  }
  return transcript;
}

Matrix distributed_kalman_round(const NetworkFactory& factory,
                                const KalmanModel& model, const Matrix& p_prev,
                                double tol) {
  model.validate();
  const Matrix p_minus = model.q + model.a.transpose() * p_prev * model.a;
  const Matrix s = model.r + model.h * p_minus * model.h.transpose();
  const SpectralRadiusResult check = spectral_radius_check(s);
  if (!check.satisfied) {
    throw NotConverged(
        "innovation system fails the walk-summability condition (radius " +
            std::to_string(check.radius) + ")",
        {}, {}, "measurement");
  }
  const int m = static_cast<int>(s.rows());
  Matrix s_inverse = Matrix::Zero(m, m);
  std::vector<int> failed;
  std::string diagnostics;
  for (int col = 0; col < m; ++col) {
    std::vector<NodeActor> actors = factory(s, Vector::Unit(m, col));
    const RunTranscript transcript = run_distributed(
        std::move(actors), SchedulerConfig{}, tol, default_max_rounds(m));
    if (!transcript.converged) {
      failed.push_back(col);
      for (size_t i = 0; i < transcript.node_diverged.size(); ++i) {
        if (transcript.node_diverged[i]) {
          diagnostics += " node " + std::to_string(i) + " diverged;";
        }
      }
      continue;
    }
    for (int i = 0; i < m; ++i) {
      s_inverse(i, col) = transcript.finals[i].mean;
    }
  }
  if (!failed.empty()) {
    throw NotConverged("distributed innovation inversion failed on " +
                           std::to_string(failed.size()) + " of " +
                           std::to_string(m) + " columns" + diagnostics,
                       failed, s_inverse, "measurement");
  }
  return p_minus -
         p_minus * model.h.transpose() * s_inverse * model.h * p_minus;
}

Matrix distributed_kalman_round(const KalmanModel& model, const Matrix& p_prev,
                                double tol) {
  return distributed_kalman_round(
      [](const Matrix& a, const Vector& b) { return spawn_network(a, b); },
      model, p_prev, tol);
}

}  // namespace gabp
