#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "gabp/kalman.hpp"
#include "gabp/solver.hpp"
#include "gabp/types.hpp"

namespace gabp {

// Everything a node is allowed to know: its own row of (A, b). Neighbor ids
// ascend and coefficients align with them.
struct NodeRow {
  int id = 0;
  double diagonal = 0.0;
  double b = 0.0;
  std::vector<int> neighbors;
  std::vector<double> coefficients;
};

// An isolated node of the simulated network. It is constructed from a row
// only, holds the freshest incoming message per neighbor, and computes
// outgoing messages with the same shared update helper the centralized
// solver uses, so synchronous runs reproduce the centralized messages
// bit for bit.
class NodeActor {
 public:
  explicit NodeActor(NodeRow row);

  int id() const { return row_.id; }
  const std::vector<int>& neighbors() const { return row_.neighbors; }
  int degree() const { return static_cast<int>(row_.neighbors.size()); }

  void receive(int from, const GabpMessage& message);
  GabpMessage compute_message(int to) const;
  detail::Marginal marginal() const;

 private:
  int neighbor_index(int node) const;

  NodeRow row_;
  double self_mean_ = 0.0;  // b_i / A_ii
  std::vector<GabpMessage> inbox_;
};

enum class SchedulerMode { SynchronousRounds, RandomSequential };

struct SchedulerConfig {
  SchedulerMode mode = SchedulerMode::SynchronousRounds;
  std::uint64_t seed = 0;
};

struct DeliveryRecord {
  int round = 0;
  int from = 0;
  int to = 0;
  double precision = 0.0;
  double mean = 0.0;
};

struct NodeResult {
  double precision = 0.0;
  double mean = 0.0;
};

struct RunTranscript {
  std::vector<int> messages_per_round;
  std::vector<bool> node_converged;
  std::vector<bool> node_diverged;
  std::vector<NodeResult> finals;
  int total_rounds = 0;
  int total_deliveries = 0;
  bool converged = false;
  bool diverged = false;
};

// Drives a network one scheduling unit at a time. A unit is one synchronous
// round (all messages computed behind a barrier, then delivered) or one
// random-sequential epoch (every directed edge fired once in a freshly
// shuffled order, delivering immediately).
class DistributedRun {
 public:
  explicit DistributedRun(std::vector<NodeActor> actors,
                          SchedulerConfig config = {});

  // Executes one unit; returns the largest message change it caused.
  double step(std::vector<DeliveryRecord>* delivery_log = nullptr);

  int rounds() const { return rounds_; }
  int node_count() const { return static_cast<int>(actors_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  bool diverged() const { return diverged_; }
  const std::vector<bool>& node_diverged() const { return node_diverged_; }
  const std::vector<double>& node_delta() const { return node_delta_; }
  const NodeActor& node(int id) const { return actors_[id]; }
  // Last message delivered on the directed edge from -> to.
  GabpMessage sent(int from, int to) const;
  std::vector<NodeResult> finals() const;

 private:
  struct Edge {
    int from;
    int to;
  };

  std::vector<NodeActor> actors_;
  SchedulerConfig config_;
  std::vector<Edge> edges_;
  std::vector<int> edge_offset_;      // per node, first outgoing edge index
  std::vector<GabpMessage> last_sent_;  // per directed edge
  std::vector<bool> node_diverged_;
  std::vector<double> node_delta_;    // per node, last unit's outgoing delta
  std::mt19937_64 rng_;
  int rounds_ = 0;
  bool diverged_ = false;
};

std::vector<NodeActor> spawn_network(const Matrix& a, const Vector& b);
std::vector<NodeActor> spawn_network(const SparseMatrixData& a,
                                     const Vector& b);

RunTranscript run_distributed(std::vector<NodeActor> actors,
                              const SchedulerConfig& scheduler, double tol,
                              int max_rounds,
                              std::vector<DeliveryRecord>* delivery_log =
                                  nullptr);

using NetworkFactory =
    std::function<std::vector<NodeActor>(const Matrix&, const Vector&)>;

// One Kalman covariance round in which the innovation inverse is obtained by
// distributed GaBP runs, one per unit right-hand side, over networks built
// by the factory.
Matrix distributed_kalman_round(const NetworkFactory& factory,
                                const KalmanModel& model, const Matrix& p_prev,
                                double tol = kDefaultTolerance);
Matrix distributed_kalman_round(const KalmanModel& model, const Matrix& p_prev,
                                double tol = kDefaultTolerance);

}  // namespace gabp
