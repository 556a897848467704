#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace gabp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Base for all toolkit errors. Subclasses are named after the condition
// they report so callers can catch precisely.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct SingularMatrix : Error {
  using Error::Error;
};

// A singular block inside a block-matrix reduction (Schur complement,
// MMSE conditioning, inversion lemma).
struct SingularBlock : SingularMatrix {
  using SingularMatrix::SingularMatrix;
};

struct ZeroDiagonal : Error {
  using Error::Error;
};

struct NonPositiveDiagonal : Error {
  using Error::Error;
};

struct Divergence : Error {
  using Error::Error;
};

struct ZeroIntermediatePrecision : Error {
  using Error::Error;
};

struct ZeroMarginalPrecision : Error {
  using Error::Error;
};

// Iterative solve failed to reach tolerance. Carries whatever partial
// results were produced plus the indices / phase that failed.
struct NotConverged : Error {
  NotConverged(const std::string& msg, std::vector<int> failed = {},
               Matrix partial_result = {}, std::string phase = {})
      : Error(msg),
        failed_columns(std::move(failed)),
        partial(std::move(partial_result)),
        step(std::move(phase)) {}

  std::vector<int> failed_columns;
  Matrix partial;
  std::string step;
};

struct SingularInnovation : Error {
  using Error::Error;
};

struct SingularCovariance : Error {
  using Error::Error;
};

struct BetaOutOfRange : Error {
  using Error::Error;
};

struct DegenerateStep : Error {
  using Error::Error;
};

struct SingularNormalMatrix : Error {
  using Error::Error;
};

struct InfeasibleStart : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(const std::string& file, int line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what),
        path(file),
        line_number(line) {}

  std::string path;
  int line_number;
};

}  // namespace gabp
