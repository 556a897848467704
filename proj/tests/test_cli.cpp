#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gabp/json_io.hpp"

namespace {

namespace fs = std::filesystem;

std::string tmp_dir() {
  static const std::string dir = [] {
    const std::string d = GABP_TEST_TMP;
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string tmp_path(const std::string& name) { return tmp_dir() + "/" + name; }

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path);
  out << contents;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Runs the binary with the given arguments; returns the process exit code
// and leaves stdout in `out_file`.
int run_cli(const std::string& args, const std::string& out_file,
            const std::string& err_file = "/dev/null") {
  const std::string cmd = std::string(GABP_CLI_PATH) + " " + args + " > " +
                          out_file + " 2> " + err_file;
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

struct Fixture {
  Fixture() {
    write_file(tmp_path("a.csv"), "2,1\n1,2\n");
    write_file(tmp_path("b.csv"), "3\n3\n");
    write_file(tmp_path("coupled.csv"), "1,0.9,0.9\n0.9,1,0.9\n0.9,0.9,1\n");
    write_file(tmp_path("ones3.csv"), "1\n1\n1\n");
  }
};

}  // namespace

TEST_CASE("solve writes a converged report and echoes its configuration") {
  Fixture fixture;
  const std::string out = tmp_path("solve.json");
  const int code = run_cli("solve --matrix " + tmp_path("a.csv") + " --rhs " +
                               tmp_path("b.csv"),
                           out);
  CHECK(code == 0);
  const gabp::Json j = gabp::load_json(out);
  CHECK(j.at("converged").get<bool>());
  CHECK(j.at("rounds").get<int>() == 2);
  CHECK(j.at("solution").at(0).get<double>() == 1.0);
  CHECK(j.at("solution").at(1).get<double>() == 1.0);
  CHECK(j.at("config").at("command").get<std::string>() == "solve");
  CHECK(j.at("config").at("engine").get<std::string>() == "gabp");
  CHECK(j.at("config").at("tol").get<double>() == 1e-10);
  CHECK(j.at("config").at("max_rounds").get<int>() == 220);
}

TEST_CASE("identical invocations produce byte-identical output") {
  Fixture fixture;
  const std::string out1 = tmp_path("det1.json");
  const std::string out2 = tmp_path("det2.json");
  REQUIRE(run_cli("solve --matrix " + tmp_path("a.csv") + " --rhs " +
                      tmp_path("b.csv") + " --engine distributed --schedule "
                      "random --seed 5",
                  out1) == 0);
  REQUIRE(run_cli("solve --matrix " + tmp_path("a.csv") + " --rhs " +
                      tmp_path("b.csv") + " --engine distributed --schedule "
                      "random --seed 5",
                  out2) == 0);
  const std::string text1 = read_file(out1);
  CHECK(!text1.empty());
  CHECK(text1 == read_file(out2));
}

TEST_CASE("all three solve engines agree on the solution") {
  Fixture fixture;
  const std::string base = "--matrix " + tmp_path("a.csv") + " --rhs " +
                           tmp_path("b.csv");
  const std::string out_direct = tmp_path("sd.json");
  const std::string out_gabp = tmp_path("sg.json");
  const std::string out_dist = tmp_path("sn.json");
  REQUIRE(run_cli("solve " + base + " --engine direct", out_direct) == 0);
  REQUIRE(run_cli("solve " + base + " --engine gabp", out_gabp) == 0);
  REQUIRE(run_cli("solve " + base + " --engine distributed", out_dist) == 0);
  const gabp::Json d = gabp::load_json(out_direct);
  const gabp::Json g = gabp::load_json(out_gabp);
  const gabp::Json n = gabp::load_json(out_dist);
  for (int i = 0; i < 2; ++i) {
    const double xd = d.at("solution").at(i).get<double>();
    CHECK(std::abs(xd - g.at("solution").at(i).get<double>()) < 1e-9);
    CHECK(std::abs(xd - n.at("solution").at(i).get<double>()) < 1e-9);
  }
}

TEST_CASE("a non-contractive system exits with the non-convergence code") {
  Fixture fixture;
  const std::string out = tmp_path("bad.json");
  const int code = run_cli("solve --matrix " + tmp_path("coupled.csv") +
                               " --rhs " + tmp_path("ones3.csv") +
                               " --max-rounds 40",
                           out);
  CHECK(code == 2);
  const gabp::Json j = gabp::load_json(out);
  CHECK_FALSE(j.at("converged").get<bool>());
}

TEST_CASE("input problems exit with the error code") {
  Fixture fixture;
  CHECK(run_cli("solve --matrix /nonexistent.csv --rhs " + tmp_path("b.csv"),
                tmp_path("e1.json"), tmp_path("e1.err")) == 1);
  CHECK(run_cli("solve --matrix " + tmp_path("a.csv"), tmp_path("e2.json"),
                tmp_path("e2.err")) == 1);  // missing required --rhs
  CHECK(run_cli("nonsense", tmp_path("e3.json"), tmp_path("e3.err")) == 1);
  CHECK(run_cli("--help", tmp_path("help.txt")) == 0);
}

TEST_CASE("invert matches the known closed form") {
  Fixture fixture;
  const std::string out = tmp_path("inv.json");
  REQUIRE(run_cli("invert --matrix " + tmp_path("a.csv") + " --engine gabp",
                  out) == 0);
  const gabp::Json j = gabp::load_json(out);
  REQUIRE(j.at("converged").get<bool>());
  CHECK(std::abs(j.at("inverse").at(0).at(0).get<double>() - 2.0 / 3.0) <
        1e-9);
  CHECK(std::abs(j.at("inverse").at(0).at(1).get<double>() + 1.0 / 3.0) <
        1e-9);
}

TEST_CASE("kalman command reports the scalar covariance chain") {
  Fixture fixture;
  const gabp::Json model{{"A", {{1.0}}}, {"H", {{1.0}}}, {"Q", {{1.0}}},
                         {"R", {{1.0}}}, {"x0", {0.0}},  {"P0", {{1.0}}}};
  write_file(tmp_path("model.json"), model.dump());
  write_file(tmp_path("obs.csv"), "3\n1\n");
  const std::string out = tmp_path("kalman.json");
  REQUIRE(run_cli("kalman --model " + tmp_path("model.json") +
                      " --observations " + tmp_path("obs.csv") +
                      " --engine schur",
                  out) == 0);
  const gabp::Json j = gabp::load_json(out);
  REQUIRE(j.at("rounds").size() == 3);  // initial state plus two updates
  CHECK(j.at("rounds").at(0).at("k").get<int>() == 0);
  CHECK(std::abs(j.at("rounds").at(1).at("P").at(0).at(0).get<double>() -
                 2.0 / 3.0) < 1e-9);
  CHECK(std::abs(j.at("rounds").at(1).at("xhat").at(0).get<double>() - 2.0) <
        1e-9);
}

TEST_CASE("gib command iterates to a fixed point") {
  Fixture fixture;
  const gabp::Json problem{{"sigma_x", {{1.0}}},
                           {"sigma_y", {{1.0}}},
                           {"sigma_xy", {{0.5}}}};
  write_file(tmp_path("gib.json"), problem.dump());
  const std::string out = tmp_path("gib_out.json");
  const int code = run_cli("gib --problem " + tmp_path("gib.json") +
                               " --beta 1.0 --tol 1e-9 --seed 3",
                           out);
  CHECK(code == 0);
  const gabp::Json j = gabp::load_json(out);
  CHECK(j.at("converged").get<bool>());
  CHECK(j.at("rounds").at(0).at("k").get<int>() == 0);
  CHECK(j.at("config").at("beta").get<double>() == 1.0);
  const auto& last = j.at("rounds").back();
  CHECK(last.at("Sigma_xi").at(0).at(0).get<double>() > 0.0);
  CHECK(last.at("info_compression").get<double>() >= 0.0);
}

TEST_CASE("lp command descends to the vertex") {
  Fixture fixture;
  const gabp::Json problem{{"A", {{1.0, 1.0}}},
                           {"b", {2.0}},
                           {"c", {1.0, 0.0}},
                           {"x0", {1.0, 1.0}}};
  write_file(tmp_path("lp.json"), problem.dump());
  const std::string out = tmp_path("lp_out.json");
  REQUIRE(run_cli("lp --problem " + tmp_path("lp.json"), out) == 0);
  const gabp::Json j = gabp::load_json(out);
  REQUIRE(j.at("converged").get<bool>());
  CHECK(j.at("objective").get<double>() < 1e-4);
  CHECK(j.at("iterations").at(0).at("iter").get<int>() == 0);
  CHECK(j.at("iterations").at(0).at("objective").get<double>() == 1.0);
  // Strictly decreasing objective along the recorded path.
  double prev = 1.0;
  for (size_t i = 1; i < j.at("iterations").size(); ++i) {
    const double obj = j.at("iterations").at(i).at("objective").get<double>();
    CHECK(obj <= prev + 1e-12);
    prev = obj;
  }

  // Without a starting point anywhere, the command is an input error.
  const gabp::Json no_start{{"A", {{1.0, 1.0}}}, {"b", {2.0}},
                            {"c", {1.0, 0.0}}};
  write_file(tmp_path("lp2.json"), no_start.dump());
  CHECK(run_cli("lp --problem " + tmp_path("lp2.json"), tmp_path("lp2o.json"),
                tmp_path("lp2o.err")) == 1);
}

TEST_CASE("simulate writes a transcript and a delivery log") {
  Fixture fixture;
  const std::string out = tmp_path("sim.json");
  const std::string log = tmp_path("sim.jsonl");
  REQUIRE(run_cli("simulate --matrix " + tmp_path("a.csv") + " --rhs " +
                      tmp_path("b.csv") + " --schedule random --seed 9 "
                      "--delivery-log " + log,
                  out) == 0);
  const gabp::Json j = gabp::load_json(out);
  CHECK(j.at("converged").get<bool>());
  CHECK(j.at("finals").at(0).at("mean").get<double>() == 1.0);

  std::ifstream lines(log);
  REQUIRE(lines.good());
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    const gabp::Json record = gabp::Json::parse(line);
    CHECK(record.contains("round"));
    CHECK(record.contains("from"));
    CHECK(record.contains("to"));
    ++count;
  }
  CHECK(count == j.at("total_deliveries").get<int>());
}
