#include "gabp/matrix_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gabp {

namespace {

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return in;
}

std::ofstream create_or_throw(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot create file");
  return out;
}

bool parse_double(const std::string& tok, double& out) {
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string tok;
  std::istringstream ss(line);
  while (std::getline(ss, tok, sep)) {
    // trim surrounding whitespace
    auto b = tok.find_first_not_of(" \t\r");
    auto e = tok.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string()
                                         : tok.substr(b, e - b + 1));
  }
  return out;
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct MmHeader {
  bool coordinate = false;
  bool symmetric = false;
};

MmHeader parse_mm_header(const std::string& path, const std::string& line) {
  std::istringstream ss(line);
  std::string banner, object, fmt, field, symmetry;
  ss >> banner >> object >> fmt >> field >> symmetry;
  if (banner != "%%MatrixMarket" || object != "matrix") {
    throw ParseError(path, 1, "not a MatrixMarket matrix file");
  }
  MmHeader h;
  if (fmt == "coordinate") {
    h.coordinate = true;
  } else if (fmt != "array") {
    throw ParseError(path, 1, "unsupported MatrixMarket format '" + fmt + "'");
  }
  if (field != "real" && field != "integer") {
    throw ParseError(path, 1, "unsupported MatrixMarket field '" + field + "'");
  }
  if (symmetry == "symmetric") {
    h.symmetric = true;
  } else if (symmetry != "general") {
    throw ParseError(path, 1,
                     "unsupported MatrixMarket symmetry '" + symmetry + "'");
  }
  return h;
}

}  // namespace

SparseMatrixData read_matrix_market(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  int lineno = 0;

  if (!std::getline(in, line)) throw ParseError(path, 1, "empty file");
  ++lineno;
  const MmHeader header = parse_mm_header(path, line);

  auto next_data_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line[0] == '%') continue;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      return true;
    }
    return false;
  };

  if (!next_data_line()) throw ParseError(path, lineno, "missing size line");

  SparseMatrixData data;
  std::istringstream size_line(line);
  long entries = 0;
  if (header.coordinate) {
    if (!(size_line >> data.rows >> data.cols >> entries)) {
      throw ParseError(path, lineno, "bad coordinate size line");
    }
    data.entries.reserve(static_cast<size_t>(entries));
    for (long k = 0; k < entries; ++k) {
      if (!next_data_line()) {
        throw ParseError(path, lineno, "unexpected end of file: expected " +
                                           std::to_string(entries) +
                                           " entries");
      }
      std::istringstream es(line);
      int i, j;
      double v;
      if (!(es >> i >> j >> v)) {
        throw ParseError(path, lineno, "bad coordinate entry");
      }
      if (i < 1 || i > data.rows || j < 1 || j > data.cols) {
        throw ParseError(path, lineno, "index out of range");
      }
      data.entries.push_back({i - 1, j - 1, v});
      if (header.symmetric && i != j) {
        data.entries.push_back({j - 1, i - 1, v});
      }
    }
  } else {
    if (!(size_line >> data.rows >> data.cols)) {
      throw ParseError(path, lineno, "bad array size line");
    }
    // array format is column-major
    for (int j = 0; j < data.cols; ++j) {
      const int from = header.symmetric ? j : 0;
      for (int i = from; i < data.rows; ++i) {
        if (!next_data_line()) {
          throw ParseError(path, lineno, "unexpected end of array data");
        }
        double v;
        if (!parse_double(line, v)) {
          std::istringstream vs(line);
          if (!(vs >> v)) throw ParseError(path, lineno, "bad array value");
        }
        data.entries.push_back({i, j, v});
        if (header.symmetric && i != j) data.entries.push_back({j, i, v});
      }
    }
  }
  return data;
}

Matrix dense_from_sparse(const SparseMatrixData& data) {
  Matrix m = Matrix::Zero(data.rows, data.cols);
  for (const auto& t : data.entries) m(t.row, t.col) = t.value;
  return m;
}

Matrix read_matrix_market_dense(const std::string& path) {
  return dense_from_sparse(read_matrix_market(path));
}

void write_matrix_market(const std::string& path, const Matrix& m) {
  std::ofstream out = create_or_throw(path);
  out << "%%MatrixMarket matrix array real general\n";
  out << m.rows() << " " << m.cols() << "\n";
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      out << format_value(m(i, j)) << "\n";
    }
  }
}

void write_matrix_market_coordinate(const std::string& path, const Matrix& m) {
  long nnz = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0) ++nnz;
  std::ofstream out = create_or_throw(path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << " " << m.cols() << " " << nnz << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) != 0.0) {
        out << (i + 1) << " " << (j + 1) << " " << format_value(m(i, j))
            << "\n";
      }
    }
  }
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  int lineno = 0;
  std::vector<std::vector<double>> rows;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto tokens = split(line, ',');
    std::vector<double> row;
    row.reserve(tokens.size());
    bool numeric = true;
    for (const auto& tok : tokens) {
      double v;
      if (!parse_double(tok, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (first_content_line) {
        first_content_line = false;  // header row
        continue;
      }
      throw ParseError(path, lineno, "non-numeric value in row");
    }
    first_content_line = false;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(path, lineno,
                       "row has " + std::to_string(row.size()) +
                           " values, expected " +
                           std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path, lineno, "no data rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.front().size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
    }
  }
  return m;
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out = create_or_throw(path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ",";
      out << format_value(m(i, j));
    }
    out << "\n";
  }
}

Vector read_vector_csv(const std::string& path) {
  const Matrix m = read_matrix_csv(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw ParseError(path, 0, "expected a single row or column of values");
}

void write_vector_csv(const std::string& path, const Vector& v) {
  std::ofstream out = create_or_throw(path);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out << format_value(v(i)) << "\n";
  }
}

std::vector<Vector> read_vector_rows_csv(const std::string& path) {
  const Matrix m = read_matrix_csv(path);
  std::vector<Vector> rows;
  rows.reserve(static_cast<size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    rows.push_back(m.row(i).transpose());
  }
  return rows;
}

Matrix read_matrix_auto(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".mtx") {
    return read_matrix_market_dense(path);
  }
  return read_matrix_csv(path);
}

}  // namespace gabp
