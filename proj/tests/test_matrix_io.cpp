#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "gabp/matrix_io.hpp"
#include "gabp/types.hpp"

using gabp::Matrix;
using gabp::Vector;

namespace {

struct TempFile {
  std::string path;

  explicit TempFile(const std::string& name, const std::string& contents = "")
      : path(std::string("/tmp/gabp_io_") + name) {
    if (!contents.empty()) {
      std::ofstream out(path);
      out << contents;
    }
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("csv matrix round-trip preserves every bit") {
  Matrix m(2, 3);
  m << 1.0, -2.5, 1.0 / 3.0,
       0.1, 1e-300, 12345.6789;
  TempFile file("roundtrip.csv");
  gabp::write_matrix_csv(file.path, m);
  const Matrix back = gabp::read_matrix_csv(file.path);
  REQUIRE(back.rows() == 2);
  REQUIRE(back.cols() == 3);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(back(i, j) == m(i, j));
    }
  }
}

TEST_CASE("csv matrix accepts a header row and skips blanks") {
  TempFile file("header.csv", "colA,colB\n1,2\n\n3,4\n");
  const Matrix m = gabp::read_matrix_csv(file.path);
  REQUIRE(m.rows() == 2);
  CHECK(m(0, 0) == 1.0);
  CHECK(m(1, 1) == 4.0);
}

TEST_CASE("csv matrix rejects ragged rows with a located error") {
  TempFile file("ragged.csv", "1,2\n3,4,5\n");
  try {
    gabp::read_matrix_csv(file.path);
    FAIL("expected a parse error");
  } catch (const gabp::ParseError& e) {
    CHECK(e.line_number == 2);
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
}

TEST_CASE("csv matrix rejects garbage tokens") {
  TempFile file("garbage.csv", "1,2\n3,abc\n");
  CHECK_THROWS_AS(gabp::read_matrix_csv(file.path), gabp::ParseError);
}

TEST_CASE("missing file raises a parse error naming the path") {
  try {
    gabp::read_matrix_csv("/tmp/gabp_io_definitely_missing.csv");
    FAIL("expected a parse error");
  } catch (const gabp::ParseError& e) {
    CHECK(e.path == "/tmp/gabp_io_definitely_missing.csv");
  }
}

TEST_CASE("vector csv accepts a column or a single row") {
  TempFile column("col.csv", "1\n2\n3\n");
  const Vector v1 = gabp::read_vector_csv(column.path);
  REQUIRE(v1.size() == 3);
  CHECK(v1[2] == 3.0);

  TempFile row("row.csv", "1,2,3\n");
  const Vector v2 = gabp::read_vector_csv(row.path);
  REQUIRE(v2.size() == 3);
  CHECK(v2[1] == 2.0);

  TempFile bad("badvec.csv", "1,2\n3,4\n");
  CHECK_THROWS_AS(gabp::read_vector_csv(bad.path), gabp::ParseError);
}

TEST_CASE("vector csv round-trip") {
  Vector v(4);
  v << 0.1, -2.0, 1e-12, 7.0;
  TempFile file("vec_rt.csv");
  gabp::write_vector_csv(file.path, v);
  const Vector back = gabp::read_vector_csv(file.path);
  REQUIRE(back.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(back[i] == v[i]);
  }
}

TEST_CASE("vector rows reader returns one vector per line") {
  TempFile file("rows.csv", "1,2\n3,4\n5,6\n");
  const auto rows = gabp::read_vector_rows_csv(file.path);
  REQUIRE(rows.size() == 3);
  CHECK(rows[2][1] == 6.0);

  TempFile bad("rows_bad.csv", "1,2\n3\n");
  CHECK_THROWS_AS(gabp::read_vector_rows_csv(bad.path), gabp::ParseError);
}

TEST_CASE("matrix-market array round-trip") {
  Matrix m(3, 2);
  m << 1, 2, 3, 4, 5, 1.0 / 7.0;
  TempFile file("array.mtx");
  gabp::write_matrix_market(file.path, m);
  const Matrix back = gabp::read_matrix_market_dense(file.path);
  REQUIRE(back.rows() == 3);
  REQUIRE(back.cols() == 2);
  CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("matrix-market coordinate round-trip drops explicit zeros") {
  Matrix m(3, 3);
  m << 2, 0, 1,
       0, 3, 0,
       1, 0, 4;
  TempFile file("coord.mtx");
  gabp::write_matrix_market_coordinate(file.path, m);
  const gabp::SparseMatrixData sparse = gabp::read_matrix_market(file.path);
  CHECK(sparse.rows == 3);
  CHECK(sparse.cols == 3);
  CHECK(sparse.entries.size() == 5);
  CHECK((gabp::dense_from_sparse(sparse) - m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("matrix-market symmetric coordinate expands the upper triangle") {
  TempFile file("sym.mtx",
                "%%MatrixMarket matrix coordinate real symmetric\n"
                "% lower triangle only\n"
                "2 2 2\n"
                "1 1 2.0\n"
                "2 1 -1.0\n");
  const Matrix m = gabp::dense_from_sparse(gabp::read_matrix_market(file.path));
  REQUIRE(m.rows() == 2);
  CHECK(m(0, 0) == 2.0);
  CHECK(m(1, 0) == -1.0);
  CHECK(m(0, 1) == -1.0);
  CHECK(m(1, 1) == 0.0);
}

TEST_CASE("matrix-market symmetric array mirrors the stored lower triangle") {
  TempFile file("symarr.mtx",
                "%%MatrixMarket matrix array real symmetric\n"
                "2 2\n"
                "2.0\n"
                "-1.0\n"
                "3.0\n");
  const Matrix m = gabp::read_matrix_market_dense(file.path);
  CHECK(m(0, 0) == 2.0);
  CHECK(m(1, 0) == -1.0);
  CHECK(m(0, 1) == -1.0);
  CHECK(m(1, 1) == 3.0);
}

TEST_CASE("matrix-market rejects malformed headers and indices") {
  TempFile bad_header("badhdr.mtx", "%%NotMatrixMarket\n1 1 0\n");
  CHECK_THROWS_AS(gabp::read_matrix_market(bad_header.path), gabp::ParseError);

  TempFile bad_field("badfield.mtx",
                     "%%MatrixMarket matrix coordinate complex general\n"
                     "1 1 0\n");
  CHECK_THROWS_AS(gabp::read_matrix_market(bad_field.path), gabp::ParseError);

  TempFile bad_index("badidx.mtx",
                     "%%MatrixMarket matrix coordinate real general\n"
                     "2 2 1\n"
                     "3 1 1.0\n");
  try {
    gabp::read_matrix_market(bad_index.path);
    FAIL("expected a parse error");
  } catch (const gabp::ParseError& e) {
    CHECK(e.line_number == 3);
  }
}

TEST_CASE("extension dispatch picks the right reader") {
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  TempFile csv("auto.csv");
  gabp::write_matrix_csv(csv.path, m);
  TempFile mtx("auto.mtx");
  gabp::write_matrix_market(mtx.path, m);
  CHECK((gabp::read_matrix_auto(csv.path) - m).cwiseAbs().maxCoeff() == 0.0);
  CHECK((gabp::read_matrix_auto(mtx.path) - m).cwiseAbs().maxCoeff() == 0.0);
}
