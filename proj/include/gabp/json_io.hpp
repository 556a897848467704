#pragma once

#include <json.hpp>

#include <string>

#include "gabp/affine.hpp"
#include "gabp/gib.hpp"
#include "gabp/kalman.hpp"
#include "gabp/network.hpp"
#include "gabp/solver.hpp"
#include "gabp/types.hpp"

namespace gabp {

using Json = nlohmann::json;

// Matrices serialize as arrays of row arrays, vectors as flat arrays.
Json matrix_to_json(const Matrix& m);
Json vector_to_json(const Vector& v);

// Field extraction with shape validation. The field name is only used in
// error messages.
Matrix matrix_from_json(const Json& j, const std::string& field);
Vector vector_from_json(const Json& j, const std::string& field);

// Parses a JSON document from disk. Syntax errors surface as ParseError
// carrying the path and the line reported by the parser; semantic errors
// raised by the *_from_json helpers are rethrown with the path prefixed.
Json load_json(const std::string& path);

Json report_to_json(const SolveReport& report);
Json transcript_to_json(const RunTranscript& transcript);
Json delivery_to_json(const DeliveryRecord& record);

// Filter input file: {"A": .., "H": .., "Q": .., "R": .., "x0": ..,
// "P0": .., "B": optional}.
struct KalmanInput {
  KalmanModel model;
  KalmanState init;
};

KalmanInput kalman_input_from_json(const Json& j);
KalmanInput load_kalman_input(const std::string& path);

// Information bottleneck input file: {"sigma_x": .., "sigma_y": ..,
// "sigma_xy": .., "beta": optional number}.
GibProblem gib_problem_from_json(const Json& j);
GibProblem load_gib_problem(const std::string& path);

// Linear program input file: {"A": .., "b": .., "c": .., "x0": optional}.
struct LpInput {
  LpProblem problem;
  Vector x0;
  bool has_x0 = false;
};

LpInput lp_input_from_json(const Json& j);
LpInput load_lp_input(const std::string& path);

// Writes with a trailing newline; path "-" or "" writes to stdout.
void write_json_output(const std::string& path, const Json& j);

}  // namespace gabp
