#include "gabp/json_io.hpp"

#include <fstream>
#include <iostream>
#include <regex>

namespace gabp {
namespace {

int line_from_parse_message(const std::string& what) {
  static const std::regex pattern("at line (\\d+)");
  std::smatch match;
  if (std::regex_search(what, match, pattern)) {
    return std::stoi(match[1].str());
  }
  return 0;
}

const Json& require_field(const Json& j, const std::string& field) {
  if (!j.is_object() || !j.contains(field)) {
    throw Error("missing field '" + field + "'");
  }
  return j.at(field);
}

double number_from_json(const Json& value, const std::string& field) {
  if (!value.is_number()) {
    throw Error("field '" + field + "' must be a number");
  }
  return value.get<double>();
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_to_json(const Vector& v) {
  Json values = Json::array();
  for (int i = 0; i < v.size(); ++i) {
    values.push_back(v[i]);
  }
  return values;
}

Matrix matrix_from_json(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) {
    throw Error("field '" + field + "' must be a non-empty array of rows");
  }
  const auto& first = j.at(0);
  if (!first.is_array() || first.empty()) {
    throw Error("field '" + field + "' must contain non-empty row arrays");
  }
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(first.size());
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const auto& row = j.at(i);
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      throw Error("field '" + field + "' row " + std::to_string(i + 1) +
                  " has " + std::to_string(row.is_array() ? row.size() : 0) +
                  " entries, expected " + std::to_string(cols));
    }
    for (int c = 0; c < cols; ++c) {
      m(i, c) = number_from_json(row.at(c), field);
    }
  }
  return m;
}

Vector vector_from_json(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) {
    throw Error("field '" + field + "' must be a non-empty array of numbers");
  }
  Vector v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) {
    v[i] = number_from_json(j.at(i), field);
  }
  return v;
}

Json load_json(const std::string& path) {
  std::ifstream input(path);
  if (!input) {
    throw ParseError(path, 0, "cannot open file");
  }
  try {
    return Json::parse(input);
  } catch (const Json::parse_error& e) {
    throw ParseError(path, line_from_parse_message(e.what()), e.what());
  }
}

Json report_to_json(const SolveReport& report) {
  Json j;
  j["solution"] = vector_to_json(report.solution);
  j["marginal_precisions"] = vector_to_json(report.marginal_precisions);
  j["rounds"] = report.rounds;
  j["converged"] = report.converged;
  j["residual_history"] = report.residual_history;
  if (report.diverged) {
    j["diverged"] = true;
  }
  if (!report.error.empty()) {
    j["error"] = report.error;
  }
  return j;
}

Json transcript_to_json(const RunTranscript& transcript) {
  Json j;
  j["messages_per_round"] = transcript.messages_per_round;
  j["total_rounds"] = transcript.total_rounds;
  j["total_deliveries"] = transcript.total_deliveries;
  j["converged"] = transcript.converged;
  j["diverged"] = transcript.diverged;
  Json converged_nodes = Json::array();
  for (const bool flag : transcript.node_converged) {
    converged_nodes.push_back(flag);
  }
  j["node_converged"] = std::move(converged_nodes);
  Json diverged_nodes = Json::array();
  for (const bool flag : transcript.node_diverged) {
    diverged_nodes.push_back(flag);
  }
  j["node_diverged"] = std::move(diverged_nodes);
  Json finals = Json::array();
  for (const NodeResult& node : transcript.finals) {
    finals.push_back(Json{{"precision", node.precision}, {"mean", node.mean}});
  }
  j["finals"] = std::move(finals);
  return j;
}

Json delivery_to_json(const DeliveryRecord& record) {
  return Json{{"round", record.round},
              {"from", record.from},
              {"to", record.to},
              {"precision", record.precision},
              {"mean", record.mean}};
}

KalmanInput kalman_input_from_json(const Json& j) {
  KalmanInput input;
  input.model.a = matrix_from_json(require_field(j, "A"), "A");
  input.model.h = matrix_from_json(require_field(j, "H"), "H");
  input.model.q = matrix_from_json(require_field(j, "Q"), "Q");
  input.model.r = matrix_from_json(require_field(j, "R"), "R");
  if (j.contains("B")) {
    input.model.b = matrix_from_json(j.at("B"), "B");
  }
  input.init.xhat = vector_from_json(require_field(j, "x0"), "x0");
  input.init.p = matrix_from_json(require_field(j, "P0"), "P0");
  input.init.k = 0;
  input.model.validate();
  if (input.init.xhat.size() != input.model.state_dim()) {
    throw DimensionMismatch("x0 length does not match the state dimension");
  }
  if (input.init.p.rows() != input.model.state_dim() ||
      input.init.p.cols() != input.model.state_dim()) {
    throw DimensionMismatch("P0 must be square with the state dimension");
  }
  return input;
}

KalmanInput load_kalman_input(const std::string& path) {
  const Json j = load_json(path);
  try {
    return kalman_input_from_json(j);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

GibProblem gib_problem_from_json(const Json& j) {
  GibProblem problem;
  problem.sigma_x = matrix_from_json(require_field(j, "sigma_x"), "sigma_x");
  problem.sigma_y = matrix_from_json(require_field(j, "sigma_y"), "sigma_y");
  problem.sigma_xy = matrix_from_json(require_field(j, "sigma_xy"), "sigma_xy");
  if (j.contains("beta")) {
    problem.beta = number_from_json(j.at("beta"), "beta");
  }
  problem.validate();
  return problem;
}

GibProblem load_gib_problem(const std::string& path) {
  const Json j = load_json(path);
  try {
    return gib_problem_from_json(j);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

LpInput lp_input_from_json(const Json& j) {
  LpInput input;
  input.problem.a = matrix_from_json(require_field(j, "A"), "A");
  input.problem.b = vector_from_json(require_field(j, "b"), "b");
  input.problem.c = vector_from_json(require_field(j, "c"), "c");
  if (j.contains("x0")) {
    input.x0 = vector_from_json(j.at("x0"), "x0");
    input.has_x0 = true;
  }
  input.problem.validate();
  return input;
}

LpInput load_lp_input(const std::string& path) {
  const Json j = load_json(path);
  try {
    return lp_input_from_json(j);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

void write_json_output(const std::string& path, const Json& j) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream output(path);
  if (!output) {
    throw ParseError(path, 0, "cannot open file for writing");
  }
  output << text;
}

}  // namespace gabp
