#include "doctest.h"

#include <sstream>

#include "acbm/dgp.hpp"
#include "acbm/io.hpp"
#include "acbm/rng.hpp"

using namespace acbm;

TEST_CASE("matrix CSV round trip with and without header") {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 1 + rng.below(20), d = 1 + rng.below(8);
    std::vector<std::uint8_t> e(n * d);
    for (auto& v : e) v = rng.bernoulli(0.5);
    const ResponseMatrix X(n, d, e);
    std::stringstream ss;
    io::write_matrix_csv(ss, X);
    CHECK(io::parse_matrix_csv(ss).entries() == e);
  }
  std::istringstream with_header("q1,q2\n1,0\n0,1\n");
  const auto X = io::parse_matrix_csv(with_header);
  CHECK(X.n_examinees() == 2);
  CHECK(X.question_labels() == std::vector<std::string>{"q1", "q2"});
  std::istringstream bad("1,0\n0,2\n");
  CHECK_THROWS_AS(io::parse_matrix_csv(bad), NonBinaryEntry);
  std::istringstream ragged("1,0\n0\n");
  CHECK_THROWS_AS(io::parse_matrix_csv(ragged), RaggedRows);
}

TEST_CASE("truth JSON round trip") {
  const auto data = simulate_builtin("dgp1", 25, 2);
  const auto back = io::truth_from_json(io::truth_to_json(data.truth));
  CHECK(back.col_partition == data.truth.col_partition);
  CHECK(back.row_labels == data.truth.row_labels);
  CHECK(back.accuracy == data.truth.accuracy);
  REQUIRE(back.clusters.size() == data.truth.clusters.size());
  CHECK(back.clusters[0].weights == data.truth.clusters[0].weights);
}

TEST_CASE("trace records round trip") {
  TraceRecord r;
  r.iter = 12;
  r.col_assign = {0, 1, 0};
  r.row_assign = {{0, 0, 1}, {0, 0, 0}};
  r.log_joint = -12.5;
  const auto j = io::trace_record_to_json(r);
  CHECK(j["row_assign"].is_object());
  CHECK(j["row_assign"]["1"] == std::vector<int>{0, 0, 0});
  const auto back = io::trace_record_from_json(j);
  CHECK(back.iter == 12);
  CHECK(back.col_assign == r.col_assign);
  CHECK(back.row_assign == r.row_assign);
  CHECK(back.log_joint == r.log_joint);

  ChainTrace t;
  t.states = {r, r};
  std::stringstream ss;
  io::write_trace_ndjson(ss, t);
  CHECK(io::read_trace_ndjson(ss).states.size() == 2);
}

TEST_CASE("summary and Rasch fits round trip") {
  const auto X = validate_matrix({{1, 0, 0}, {0, 1, 0}, {1, 1, 1}, {1, 1, 0}});
  const auto fit = posterior_accuracy(X, Partition{{0, 0, 0}}, {Partition{{0, 0, 1, 1}}}, Hyperparams{});
  const auto back = io::summary_from_json(io::summary_to_json(fit, "accuracy.csv"));
  CHECK(back.col_partition == fit.col_partition);
  CHECK(back.row_partitions[0] == fit.row_partitions[0]);
  CHECK(back.clusters[0].theta == fit.clusters[0].theta);
  for (std::size_t k = 0; k < fit.accuracy.size(); ++k) CHECK(back.accuracy[k] == doctest::Approx(fit.accuracy[k]));

  RaschFit rf;
  rf.psi = {0.5, -0.25};
  rf.xi = {1.0, 0.0, -1.0};
  rf.sigma = 0.9;
  rf.loglik = -10.0;
  rf.converged = true;
  const auto j = io::rasch_to_json(rf);
  for (const char* key : {"psi", "xi", "sigma", "loglik", "converged"}) CHECK(j.contains(key));
  const auto rb = io::rasch_from_json(j);
  CHECK(rb.psi == rf.psi);
  CHECK(rb.xi == rf.xi);
}

TEST_CASE("design JSON") {
  const auto j = io::json::parse(R"({"type": "acbm", "clusters": [{"size": 3, "weights": [0.5, 0.5],
                                      "accuracies": [0.2, 0.8]}]})");
  const auto spec = io::design_from_json(j, 10, 3);
  REQUIRE(spec.acbm);
  CHECK(spec.acbm->n_questions() == 3);
  const auto bad = io::json::parse(R"({"type": "acbm", "clusters": [{"size": 1, "weights": [0.5, 0.5],
                                        "accuracies": [0.2, 0.8]}]})");
  CHECK_THROWS_AS(io::design_from_json(bad, 10, 3), DesignInvariantViolation);
  CHECK_THROWS(io::design_from_json(io::json::parse(R"({"type": "other"})"), 10, 3));
}

TEST_CASE("metric rows print NA for absent values") {
  MetricRow m;
  m.cwri = 1.0;
  m.adk = 0.25;
  CHECK(io::metric_csv_row("dgp1", 100, 2, m) == "dgp1,100,2,1.000000,0.250000,NA,NA,NA,NA,NA");
}
