// Command-line front end for the GaBP toolkit: linear solves, matrix
// inversion, Kalman filtering, the Gaussian information bottleneck, and
// affine-scaling linear programming, each with a choice of engine. Every
// command writes one JSON document embedding the resolved configuration, so
// identical inputs and flags produce byte-identical output.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "gabp/affine.hpp"
#include "gabp/gib.hpp"
#include "gabp/json_io.hpp"
#include "gabp/kalman.hpp"
#include "gabp/linalg.hpp"
#include "gabp/matrix_io.hpp"
#include "gabp/network.hpp"
#include "gabp/solver.hpp"
#include "gabp/types.hpp"

namespace {

using gabp::Json;
using gabp::Matrix;
using gabp::Vector;

bool is_matrix_market(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".mtx") == 0;
}

gabp::Schedule parse_gabp_schedule(const std::string& name) {
  if (name == "synchronous") {
    return gabp::Schedule::Synchronous;
  }
  if (name == "sequential") {
    return gabp::Schedule::Sequential;
  }
  throw gabp::Error("schedule '" + name +
                    "' is not valid here; use synchronous or sequential");
}

gabp::SchedulerMode parse_network_schedule(const std::string& name) {
  if (name == "synchronous") {
    return gabp::SchedulerMode::SynchronousRounds;
  }
  if (name == "random" || name == "random-sequential") {
    return gabp::SchedulerMode::RandomSequential;
  }
  throw gabp::Error("schedule '" + name +
                    "' is not valid here; use synchronous or random");
}

gabp::KalmanEngine parse_kalman_engine(const std::string& name) {
  if (name == "classical" || name == "direct") {
    return gabp::KalmanEngine::Classical;
  }
  if (name == "schur") {
    return gabp::KalmanEngine::Schur;
  }
  if (name == "gabp") {
    return gabp::KalmanEngine::Gabp;
  }
  throw gabp::Error("unknown engine '" + name + "'");
}

struct SolveArgs {
  std::string matrix;
  std::string rhs;
  std::string engine = "gabp";
  std::string schedule = "synchronous";
  double tol = gabp::kDefaultTolerance;
  int max_rounds = 0;
  double damping = 0.0;
  std::uint64_t seed = 0;
  std::string output;
};

struct InvertArgs {
  std::string matrix;
  std::string engine = "gabp";
  double tol = gabp::kDefaultTolerance;
  int max_rounds = 0;
  std::string output;
};

struct KalmanArgs {
  std::string model;
  std::string observations;
  std::string engine = "classical";
  double tol = gabp::kDefaultTolerance;
  std::string output;
};

struct GibArgs {
  std::string problem;
  std::string engine = "direct";
  double beta = 1.0;
  bool beta_set = false;
  double tol = gabp::kDefaultTolerance;
  int max_rounds = 0;
  std::uint64_t seed = 0;
  std::string output;
};

struct LpArgs {
  std::string problem;
  std::string x0;
  std::string engine = "direct";
  double alpha = 0.5;
  double tol = gabp::kDefaultTolerance;
  int max_rounds = 0;
  std::string output;
};

struct SimulateArgs {
  std::string matrix;
  std::string rhs;
  std::string schedule = "synchronous";
  double tol = gabp::kDefaultTolerance;
  int max_rounds = 0;
  std::uint64_t seed = 0;
  std::string delivery_log;
  std::string output;
};

// The solver accepts dense CSV or MatrixMarket input; MatrixMarket files
// stay sparse so large systems never materialize a dense matrix.
int run_solve(const SolveArgs& args) {
  const Vector b = gabp::read_vector_csv(args.rhs);
  Json config{{"command", "solve"},
              {"engine", args.engine},
              {"schedule", args.schedule},
              {"tol", args.tol},
              {"damping", args.damping},
              {"seed", args.seed},
              {"inputs", Json{{"matrix", args.matrix}, {"rhs", args.rhs}}}};

  Json out;
  bool converged = false;
  if (args.engine == "direct") {
    const Matrix a = gabp::read_matrix_auto(args.matrix);
    const Matrix inverse = gabp::direct_inverse(a);
    const Vector solution = inverse * b;
    Vector precisions(a.rows());
    for (int i = 0; i < a.rows(); ++i) {
      precisions[i] = 1.0 / inverse(i, i);
    }
    config["max_rounds"] = 0;
    out["solution"] = gabp::vector_to_json(solution);
    out["marginal_precisions"] = gabp::vector_to_json(precisions);
    out["rounds"] = 0;
    out["converged"] = true;
    out["residual_history"] = Json::array();
    converged = true;
  } else if (args.engine == "gabp") {
    gabp::SolveOptions options;
    options.tol = args.tol;
    options.max_rounds = args.max_rounds;
    options.schedule = parse_gabp_schedule(args.schedule);
    options.damping = args.damping;
    std::shared_ptr<const gabp::GabpGraph> graph;
    if (is_matrix_market(args.matrix)) {
      graph = std::make_shared<gabp::GabpGraph>(
          gabp::read_matrix_market(args.matrix), b);
    } else {
      graph = std::make_shared<gabp::GabpGraph>(
          gabp::read_matrix_csv(args.matrix), b);
    }
    config["max_rounds"] = options.max_rounds > 0
                               ? options.max_rounds
                               : gabp::default_max_rounds(graph->size());
    const gabp::SolveReport report = gabp::solve(graph, options);
    out = gabp::report_to_json(report);
    converged = report.converged;
  } else if (args.engine == "distributed") {
    std::vector<gabp::NodeActor> actors;
    if (is_matrix_market(args.matrix)) {
      actors = gabp::spawn_network(gabp::read_matrix_market(args.matrix), b);
    } else {
      actors = gabp::spawn_network(gabp::read_matrix_csv(args.matrix), b);
    }
    gabp::SchedulerConfig scheduler;
    scheduler.mode = parse_network_schedule(args.schedule);
    scheduler.seed = args.seed;
    config["max_rounds"] =
        args.max_rounds > 0
            ? args.max_rounds
            : gabp::default_max_rounds(static_cast<int>(actors.size()));
    const gabp::RunTranscript transcript = gabp::run_distributed(
        std::move(actors), scheduler, args.tol, args.max_rounds);
    Vector solution(static_cast<int>(transcript.finals.size()));
    Vector precisions(static_cast<int>(transcript.finals.size()));
    for (int i = 0; i < solution.size(); ++i) {
      solution[i] = transcript.finals[i].mean;
      precisions[i] = transcript.finals[i].precision;
    }
    out["solution"] = gabp::vector_to_json(solution);
    out["marginal_precisions"] = gabp::vector_to_json(precisions);
    out["rounds"] = transcript.total_rounds;
    out["converged"] = transcript.converged;
    if (transcript.diverged) {
      out["diverged"] = true;
    }
    converged = transcript.converged;
  } else {
    throw gabp::Error("unknown engine '" + args.engine +
                      "'; use direct, gabp, or distributed");
  }
  out["config"] = std::move(config);
  gabp::write_json_output(args.output, out);
  return converged ? 0 : 2;
}

int run_invert(const InvertArgs& args) {
  const Matrix a = gabp::read_matrix_auto(args.matrix);
  Json config{{"command", "invert"},
              {"engine", args.engine},
              {"tol", args.tol},
              {"max_rounds", args.max_rounds > 0
                                 ? args.max_rounds
                                 : gabp::default_max_rounds(
                                       static_cast<int>(a.rows()))},
              {"inputs", Json{{"matrix", args.matrix}}}};
  Json out;
  out["config"] = std::move(config);
  if (args.engine == "direct") {
    out["inverse"] = gabp::matrix_to_json(gabp::direct_inverse(a));
    out["converged"] = true;
  } else if (args.engine == "gabp") {
    try {
      out["inverse"] = gabp::matrix_to_json(
          gabp::invert_via_gabp(a, args.tol, args.max_rounds));
      out["converged"] = true;
    } catch (const gabp::NotConverged& e) {
      out["converged"] = false;
      out["error"] = e.what();
      out["failed_columns"] = e.failed_columns;
      out["partial"] = gabp::matrix_to_json(e.partial);
      gabp::write_json_output(args.output, out);
      return 2;
    }
  } else {
    throw gabp::Error("unknown engine '" + args.engine +
                      "'; use direct or gabp");
  }
  gabp::write_json_output(args.output, out);
  return 0;
}

int run_kalman(const KalmanArgs& args) {
  const gabp::KalmanInput input = gabp::load_kalman_input(args.model);
  const std::vector<Vector> observations =
      gabp::read_vector_rows_csv(args.observations);
  for (size_t i = 0; i < observations.size(); ++i) {
    if (observations[i].size() != input.model.measurement_dim()) {
      throw gabp::DimensionMismatch(
          "observation row " + std::to_string(i + 1) + " has length " +
          std::to_string(observations[i].size()) + ", expected " +
          std::to_string(input.model.measurement_dim()));
    }
  }
  Json config{{"command", "kalman"},
              {"engine", args.engine},
              {"tol", args.tol},
              {"inputs", Json{{"model", args.model},
                              {"observations", args.observations}}}};

  Json rounds = Json::array();
  auto record = [&rounds](const gabp::KalmanState& state) {
    rounds.push_back(Json{{"k", state.k},
                          {"xhat", gabp::vector_to_json(state.xhat)},
                          {"P", gabp::matrix_to_json(state.p)}});
  };
  record(input.init);
  if (args.engine == "distributed") {
    gabp::KalmanState current = input.init;
    for (size_t round = 0; round < observations.size(); ++round) {
      try {
        const Matrix p_minus = input.model.q +
                               input.model.a.transpose() * current.p *
                                   input.model.a;
        const Matrix p_k =
            gabp::distributed_kalman_round(input.model, current.p, args.tol);
        const Matrix s =
            input.model.h * p_minus * input.model.h.transpose() + input.model.r;
        const Matrix gain = p_minus * input.model.h.transpose() *
                            gabp::direct_inverse(s);
        const Vector xm = input.model.a * current.xhat;
        gabp::KalmanState next;
        next.xhat = xm + gain * (observations[round] - input.model.h * xm);
        next.p = p_k;
        next.k = current.k + 1;
        current = next;
      } catch (const gabp::Error& e) {
        throw gabp::Error("round " + std::to_string(round + 1) + ": " +
                          e.what());
      }
      record(current);
    }
  } else {
    const std::vector<gabp::KalmanState> path =
        gabp::filter_sequence(input.model, input.init, observations,
                              parse_kalman_engine(args.engine), args.tol);
    for (const gabp::KalmanState& state : path) {
      record(state);
    }
  }
  Json out;
  out["config"] = std::move(config);
  out["rounds"] = std::move(rounds);
  gabp::write_json_output(args.output, out);
  return 0;
}

int run_gib(const GibArgs& args) {
  gabp::GibProblem problem = gabp::load_gib_problem(args.problem);
  if (args.beta_set) {
    problem.beta = args.beta;
    problem.validate();
  }
  const int max_rounds = args.max_rounds > 0
                             ? args.max_rounds
                             : gabp::default_max_rounds(problem.dim());
  Json config{{"command", "gib"},
              {"engine", args.engine},
              {"beta", problem.beta},
              {"tol", args.tol},
              {"max_rounds", max_rounds},
              {"seed", args.seed},
              {"inputs", Json{{"problem", args.problem}}}};

  gabp::GibState state = gabp::initial_state(problem, args.seed);
  Json rounds = Json::array();
  auto record = [&](int k, const gabp::GibState& s) {
    const gabp::GibInfo info = gabp::mutual_information(problem, s);
    rounds.push_back(Json{{"k", k},
                          {"A_k", gabp::matrix_to_json(s.a_k)},
                          {"Sigma_xi", gabp::matrix_to_json(s.sigma_xi)},
                          {"info_compression", info.compression},
                          {"info_relevance", info.relevance}});
  };
  record(0, state);
  bool converged = false;
  int completed = 0;
  for (int round = 0; round < max_rounds; ++round) {
    gabp::GibState next;
    if (args.engine == "direct") {
      next = gabp::gib_iterate(problem, state);
    } else if (args.engine == "gabp") {
      next = gabp::gib_via_modified_kalman(problem, state,
                                           gabp::KalmanEngine::Gabp, args.tol);
    } else {
      throw gabp::Error("unknown engine '" + args.engine +
                        "'; use direct or gabp");
    }
    const double delta =
        std::max((next.a_k - state.a_k).cwiseAbs().maxCoeff(),
                 (next.sigma_xi - state.sigma_xi).cwiseAbs().maxCoeff());
    state = next;
    completed = round + 1;
    record(completed, state);
    if (delta <= args.tol) {
      converged = true;
      break;
    }
  }
  Json out;
  out["config"] = std::move(config);
  out["rounds"] = std::move(rounds);
  out["converged"] = converged;
  out["total_rounds"] = completed;
  gabp::write_json_output(args.output, out);
  return converged ? 0 : 2;
}

int run_lp(const LpArgs& args) {
  gabp::LpInput input = gabp::load_lp_input(args.problem);
  if (!args.x0.empty()) {
    input.x0 = gabp::read_vector_csv(args.x0);
    input.has_x0 = true;
  }
  if (!input.has_x0) {
    throw gabp::Error(
        "no starting point: supply x0 in the problem file or via --x0");
  }
  const int max_iterations = args.max_rounds > 0 ? args.max_rounds : 500;
  const bool gabp_normal = args.engine == "gabp";
  if (!gabp_normal && args.engine != "direct") {
    throw gabp::Error("unknown engine '" + args.engine +
                      "'; use direct or gabp");
  }
  Json config{{"command", "lp"},
              {"engine", args.engine},
              {"alpha", args.alpha},
              {"tol", args.tol},
              {"max_rounds", max_iterations},
              {"inputs", Json{{"problem", args.problem}}}};
  if (!args.x0.empty()) {
    config["inputs"]["x0"] = args.x0;
  }

  std::vector<gabp::AffineState> history;
  const gabp::LpResult result =
      gabp::solve_lp(input.problem, input.x0, args.alpha, args.tol,
                     max_iterations, gabp_normal, &history);
  Json iterations = Json::array();
  for (const gabp::AffineState& state : history) {
    iterations.push_back(Json{{"iter", state.iteration},
                              {"x", gabp::vector_to_json(state.x)},
                              {"objective", input.problem.c.dot(state.x)},
                              {"gamma", state.last_step.gamma}});
  }
  Json out;
  out["config"] = std::move(config);
  out["iterations"] = std::move(iterations);
  out["converged"] = result.converged;
  out["solution"] = gabp::vector_to_json(result.state.x);
  out["objective"] = input.problem.c.dot(result.state.x);
  gabp::write_json_output(args.output, out);
  return result.converged ? 0 : 2;
}

int run_simulate(const SimulateArgs& args) {
  const Vector b = gabp::read_vector_csv(args.rhs);
  std::vector<gabp::NodeActor> actors;
  if (is_matrix_market(args.matrix)) {
    actors = gabp::spawn_network(gabp::read_matrix_market(args.matrix), b);
  } else {
    actors = gabp::spawn_network(gabp::read_matrix_csv(args.matrix), b);
  }
  gabp::SchedulerConfig scheduler;
  scheduler.mode = parse_network_schedule(args.schedule);
  scheduler.seed = args.seed;
  Json config{{"command", "simulate"},
              {"schedule", args.schedule},
              {"tol", args.tol},
              {"max_rounds",
               args.max_rounds > 0
                   ? args.max_rounds
                   : gabp::default_max_rounds(static_cast<int>(actors.size()))},
              {"seed", args.seed},
              {"inputs", Json{{"matrix", args.matrix}, {"rhs", args.rhs}}}};
  if (!args.delivery_log.empty()) {
    config["delivery_log"] = args.delivery_log;
  }

  std::vector<gabp::DeliveryRecord> deliveries;
  std::vector<gabp::DeliveryRecord>* log =
      args.delivery_log.empty() ? nullptr : &deliveries;
  const gabp::RunTranscript transcript = gabp::run_distributed(
      std::move(actors), scheduler, args.tol, args.max_rounds, log);
  if (log != nullptr) {
    std::ofstream out_log(args.delivery_log);
    if (!out_log) {
      throw gabp::ParseError(args.delivery_log, 0,
                             "cannot open file for writing");
    }
    for (const gabp::DeliveryRecord& record : deliveries) {
      out_log << gabp::delivery_to_json(record).dump() << "\n";
    }
  }
  Json out = gabp::transcript_to_json(transcript);
  out["config"] = std::move(config);
  gabp::write_json_output(args.output, out);
  return transcript.converged && !transcript.diverged ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian belief propagation toolkit"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  CLI::App* solve_cmd =
      app.add_subcommand("solve", "Solve a symmetric linear system A x = b");
  solve_cmd->add_option("--matrix", solve_args.matrix, "System matrix (.csv or .mtx)")
      ->required();
  solve_cmd->add_option("--rhs", solve_args.rhs, "Right-hand side (.csv)")
      ->required();
  solve_cmd->add_option("--engine", solve_args.engine,
                        "direct | gabp | distributed");
  solve_cmd->add_option("--schedule", solve_args.schedule,
                        "gabp: synchronous | sequential; distributed: "
                        "synchronous | random");
  solve_cmd->add_option("--tol", solve_args.tol, "Convergence tolerance");
  solve_cmd->add_option("--max-rounds", solve_args.max_rounds,
                        "Round budget (0 = 10n + 200)");
  solve_cmd->add_option("--damping", solve_args.damping,
                        "Message damping in [0, 1)");
  solve_cmd->add_option("--seed", solve_args.seed,
                        "Seed for the random schedule");
  solve_cmd->add_option("--output", solve_args.output,
                        "Output path (default stdout)");

  InvertArgs invert_args;
  CLI::App* invert_cmd =
      app.add_subcommand("invert", "Invert a symmetric matrix");
  invert_cmd->add_option("--matrix", invert_args.matrix, "Matrix (.csv or .mtx)")
      ->required();
  invert_cmd->add_option("--engine", invert_args.engine, "direct | gabp");
  invert_cmd->add_option("--tol", invert_args.tol, "Convergence tolerance");
  invert_cmd->add_option("--max-rounds", invert_args.max_rounds,
                         "Round budget (0 = 10n + 200)");
  invert_cmd->add_option("--output", invert_args.output,
                         "Output path (default stdout)");

  KalmanArgs kalman_args;
  CLI::App* kalman_cmd =
      app.add_subcommand("kalman", "Run a Kalman filter over observations");
  kalman_cmd->add_option("--model", kalman_args.model,
                         "Model JSON {A, H, Q, R, x0, P0, B?}")
      ->required();
  kalman_cmd->add_option("--observations", kalman_args.observations,
                         "CSV with one observation row per step")
      ->required();
  kalman_cmd->add_option("--engine", kalman_args.engine,
                         "classical | schur | gabp | distributed");
  kalman_cmd->add_option("--tol", kalman_args.tol, "Convergence tolerance");
  kalman_cmd->add_option("--output", kalman_args.output,
                         "Output path (default stdout)");

  GibArgs gib_args;
  CLI::App* gib_cmd = app.add_subcommand(
      "gib", "Iterate the Gaussian information bottleneck");
  gib_cmd->add_option("--problem", gib_args.problem,
                      "Problem JSON {sigma_x, sigma_y, sigma_xy, beta?}")
      ->required();
  gib_cmd->add_option("--engine", gib_args.engine, "direct | gabp");
  CLI::Option* beta_opt =
      gib_cmd->add_option("--beta", gib_args.beta,
                          "Trade-off weight (overrides the problem file)");
  gib_cmd->add_option("--tol", gib_args.tol, "Fixed-point tolerance");
  gib_cmd->add_option("--max-rounds", gib_args.max_rounds,
                      "Round budget (0 = 10n + 200)");
  gib_cmd->add_option("--seed", gib_args.seed, "Seed for the initial state");
  gib_cmd->add_option("--output", gib_args.output,
                      "Output path (default stdout)");

  LpArgs lp_args;
  CLI::App* lp_cmd = app.add_subcommand(
      "lp", "Affine-scaling interior point for min c.x, A x = b, x >= 0");
  lp_cmd->add_option("--problem", lp_args.problem,
                     "Problem JSON {A, b, c, x0?}")
      ->required();
  lp_cmd->add_option("--x0", lp_args.x0,
                     "Interior starting point CSV (overrides the file)");
  lp_cmd->add_option("--engine", lp_args.engine, "direct | gabp");
  lp_cmd->add_option("--alpha", lp_args.alpha, "Step fraction in (0, 1)");
  lp_cmd->add_option("--tol", lp_args.tol, "Relative objective tolerance");
  lp_cmd->add_option("--max-rounds", lp_args.max_rounds,
                     "Iteration budget (0 = 500)");
  lp_cmd->add_option("--output", lp_args.output,
                     "Output path (default stdout)");

  SimulateArgs simulate_args;
  CLI::App* simulate_cmd = app.add_subcommand(
      "simulate", "Run the message-passing network and report a transcript");
  simulate_cmd->add_option("--matrix", simulate_args.matrix,
                           "System matrix (.csv or .mtx)")
      ->required();
  simulate_cmd->add_option("--rhs", simulate_args.rhs, "Right-hand side (.csv)")
      ->required();
  simulate_cmd->add_option("--schedule", simulate_args.schedule,
                           "synchronous | random");
  simulate_cmd->add_option("--tol", simulate_args.tol,
                           "Convergence tolerance");
  simulate_cmd->add_option("--max-rounds", simulate_args.max_rounds,
                           "Round budget (0 = 10n + 200)");
  simulate_cmd->add_option("--seed", simulate_args.seed,
                           "Seed for the random schedule");
  simulate_cmd->add_option("--delivery-log", simulate_args.delivery_log,
                           "Write every delivered message as a JSON line");
  simulate_cmd->add_option("--output", simulate_args.output,
                           "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  gib_args.beta_set = beta_opt->count() > 0;

  try {
    if (*solve_cmd) {
      return run_solve(solve_args);
    }
    if (*invert_cmd) {
      return run_invert(invert_args);
    }
    if (*kalman_cmd) {
      return run_kalman(kalman_args);
    }
    if (*gib_cmd) {
      return run_gib(gib_args);
    }
    if (*lp_cmd) {
      return run_lp(lp_args);
    }
    if (*simulate_cmd) {
      return run_simulate(simulate_args);
    }
  } catch (const gabp::NotConverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
