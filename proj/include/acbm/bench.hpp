#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "acbm/core.hpp"
#include "acbm/metrics.hpp"
#include "acbm/rasch.hpp"
#include "acbm/sampler.hpp"

namespace acbm {

// Monte Carlo replications of simulate -> fit -> summarize -> evaluate for a
// built-in design. Replication r uses seed + r for both data and chain.
struct BenchConfig {
  std::string design = "dgp1";
  std::vector<std::size_t> ns = {100};
  int reps = 1;
  std::uint64_t seed = 1;
  SamplerConfig sampler;  // seed is overridden per replication
  Hyperparams hyperparams;
  RaschConfig rasch;
  int threads = 0;  // 0: ACBM_THREADS or hardware concurrency
};

struct ReplicationResult {
  std::string design;
  std::size_t n = 0;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  MetricRow metrics;
  std::size_t kept_states = 0;
  int bound_violations = 0;  // summed over kept states
  bool rasch_monotone = true;
  bool ok = true;
  std::string error;
};

struct MetricAggregate {
  std::optional<double> median;
  std::optional<double> sd;
};

struct AggregateRow {
  std::string design;
  std::size_t n = 0;
  std::size_t reps = 0;  // successful replications
  MetricAggregate cwri, adk, adw, adp, arwri, d1_acbm, d1_rasch;
};

struct BenchResult {
  std::vector<ReplicationResult> replications;  // ordered by (n, replication)
  std::vector<AggregateRow> aggregates;         // one per n
  std::vector<std::uint64_t> failed_seeds;
};

ReplicationResult run_replication(const BenchConfig& config, std::size_t n, std::size_t replication);

BenchResult run_bench(const BenchConfig& config);

// Median (mean of the middle pair for even counts) and sample standard
// deviation; empty input gives empty results.
MetricAggregate aggregate_values(std::vector<double> values);

// Worker count from ACBM_THREADS, else hardware concurrency, at least 1.
int default_thread_count();

std::string aggregate_csv(const BenchResult& result);
std::string replications_csv(const BenchResult& result);

}  // namespace acbm
