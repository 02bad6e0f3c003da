#include "doctest.h"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(ACBM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("acbm_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("simulate writes matrix and truth") {
  const auto dir = scratch("sim");
  REQUIRE(run("simulate --design dgp1 --n 300 --seed 7 --out " + dir.string()) == 0);
  const auto csv = slurp(dir / "matrix.csv");
  CHECK(count_lines(csv) == 300);
  CHECK(csv.substr(0, csv.find('\n')).size() == 39);  // 20 digits and 19 commas
  CHECK(fs::exists(dir / "truth.json"));
  CHECK(run("simulate --design nope --n 10 --out " + dir.string()) == 2);
  CHECK(run("simulate --n 10") == 2);
}

TEST_CASE("fit, evaluate, rasch and report pipeline") {
  const auto dir = scratch("fit");
  REQUIRE(run("simulate --design dgp3 --n 60 --seed 2 --out " + dir.string()) == 0);
  const auto start = std::chrono::steady_clock::now();
  REQUIRE(run("fit --matrix " + (dir / "matrix.csv").string() + " --n-iter 20 --n-rep 5 --seed 3 --out " +
              (dir / "a").string()) == 0);
  REQUIRE(run("fit --matrix " + (dir / "matrix.csv").string() + " --n-iter 20 --n-rep 5 --seed 3 --out " +
              (dir / "b").string()) == 0);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(30));
  for (const char* f : {"trace.ndjson", "summary.json", "accuracy.csv"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  CHECK(count_lines(slurp(dir / "a" / "trace.ndjson")) == 10);

  REQUIRE(run("rasch --matrix " + (dir / "matrix.csv").string() + " --out " + dir.string()) == 0);
  const auto metrics = dir / "metrics.csv";
  REQUIRE(run("evaluate --summary " + (dir / "a" / "summary.json").string() + " --truth " +
              (dir / "truth.json").string() + " --rasch " + (dir / "rasch.json").string() + " --out " +
              metrics.string()) == 0);
  const auto text = slurp(metrics);
  CHECK(count_lines(text) == 2);
  CHECK(text.find("NA") == std::string::npos);

  REQUIRE(run("report --summary " + (dir / "a" / "summary.json").string() + " --pair 0,0 --out " +
              (dir / "report.csv").string()) == 0);
  CHECK(slurp(dir / "report.csv").rfind("cluster,size,K", 0) == 0);
  CHECK(run("report --summary " + (dir / "a" / "summary.json").string() + " --pair 0,99") == 2);
  CHECK(run("fit --matrix " + (dir / "missing.csv").string()) == 1);
  CHECK(run("evaluate --summary " + (dir / "missing.json").string() + " --truth " + (dir / "truth.json").string()) == 1);
}

TEST_CASE("tiny matrix fits quickly") {
  const auto dir = scratch("tiny");
  std::ofstream(dir / "m.csv") << "1,0,1\n0,0,1\n1,1,1\n0,1,0\n";
  const auto start = std::chrono::steady_clock::now();
  REQUIRE(run("fit --matrix " + (dir / "m.csv").string() + " --n-iter 50 --out " + dir.string()) == 0);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(1));
}

TEST_CASE("malformed matrix is a runtime error") {
  const auto dir = scratch("bad");
  std::ofstream(dir / "m.csv") << "1,0\n2,1\n";
  CHECK(run("fit --matrix " + (dir / "m.csv").string() + " --out " + dir.string()) == 1);
}

TEST_CASE("bench output is byte stable and config files fill flags") {
  const auto dir = scratch("bench");
  std::ofstream(dir / "cfg.json") << R"({"bench": {"n_iter": 4, "n_rep": 2, "reps": 2}, "seed": 3})";
  const std::string base = "bench --design dgp1 --n 30,40 --config " + (dir / "cfg.json").string() + " --out ";
  REQUIRE(run(base + (dir / "a").string()) == 0);
  REQUIRE(run(base + (dir / "b").string()) == 0);
  CHECK(slurp(dir / "a" / "aggregate.csv") == slurp(dir / "b" / "aggregate.csv"));
  CHECK(slurp(dir / "a" / "replications.csv") == slurp(dir / "b" / "replications.csv"));
  CHECK(count_lines(slurp(dir / "a" / "aggregate.csv")) == 3);
  CHECK(count_lines(slurp(dir / "a" / "replications.csv")) == 5);
  CHECK(slurp(dir / "a" / "bench.json").find("\"seed\": 4") != std::string::npos);
  CHECK(run("bench --design dgp7 --n 30 --out " + (dir / "c").string()) == 2);
}
