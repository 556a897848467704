#pragma once

#include "gabp/types.hpp"

#include <string>
#include <tuple>
#include <vector>

namespace gabp {

// One nonzero of a sparse matrix, 0-based indices.
struct Triplet {
  int row;
  int col;
  double value;
};

struct SparseMatrixData {
  int rows = 0;
  int cols = 0;
  std::vector<Triplet> entries;
};

// MatrixMarket, coordinate and array formats, real general/symmetric.
// Symmetric coordinate files are expanded to both triangles on read.
SparseMatrixData read_matrix_market(const std::string& path);
Matrix read_matrix_market_dense(const std::string& path);
void write_matrix_market(const std::string& path, const Matrix& m);
void write_matrix_market_coordinate(const std::string& path, const Matrix& m);

// CSV: one row per line, comma-separated decimals, optional header row
// (detected by any non-numeric token on the first line). Values are
// written with enough digits to round-trip.
Matrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrix& m);

// A vector stored as either a single CSV line or one value per line.
Vector read_vector_csv(const std::string& path);
void write_vector_csv(const std::string& path, const Vector& v);

// Each line is one vector; all lines must agree on length.
std::vector<Vector> read_vector_rows_csv(const std::string& path);

// Dispatch on extension: ".mtx" -> MatrixMarket, anything else -> CSV.
Matrix read_matrix_auto(const std::string& path);

Matrix dense_from_sparse(const SparseMatrixData& data);

}  // namespace gabp
