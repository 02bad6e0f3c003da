#include "acbm/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "acbm/dgp.hpp"
#include "acbm/io.hpp"
#include "acbm/summarize.hpp"

namespace acbm {

namespace {

void write_aggregate(std::ostringstream& out, const MetricAggregate& a) {
  out << ',' << (a.median ? io::format_real(*a.median) : "NA") << ',' << (a.sd ? io::format_real(*a.sd) : "NA");
}

template <class Get>
MetricAggregate collect(const std::vector<const ReplicationResult*>& rows, Get get) {
  std::vector<double> values;
  for (const auto* r : rows)
    if (auto v = get(r->metrics)) values.push_back(*v);
  return aggregate_values(std::move(values));
}

}  // namespace

int default_thread_count() {
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ACBM_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) threads = threads > 0 ? std::min(threads, cap) : cap;
  }
  return std::max(threads, 1);
}

MetricAggregate aggregate_values(std::vector<double> values) {
  MetricAggregate out;
  if (values.empty()) return out;
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  out.median = m % 2 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  out.sd = m > 1 ? std::sqrt(ss / static_cast<double>(m - 1)) : 0.0;
  return out;
}

ReplicationResult run_replication(const BenchConfig& config, std::size_t n, std::size_t replication) {
  ReplicationResult res;
  res.design = config.design;
  res.n = n;
  res.replication = replication;
  res.seed = config.seed + replication;
  try {
    const SimulatedData data = simulate_builtin(config.design, n, res.seed);
    SamplerConfig sc = config.sampler;
    sc.seed = res.seed;

    ChainTrace trace;
    trace.seed = sc.seed;
    run_chain_visit(data.X, config.hyperparams, sc, [&](int iter, const ModelState& state, double lj) {
      res.bound_violations += count_bound_violations(state);
      trace.states.push_back(make_record(iter, state, lj));
    });
    res.kept_states = trace.states.size();
    const FitSummary fit = summarize(data.X, trace, config.hyperparams);

    std::vector<double> rasch_acc;
    if (is_rasch_design(config.design)) {
      const RaschFit rf = fit_rasch(data.X, config.rasch);
      for (std::size_t k = 1; k < rf.loglik_trace.size(); ++k)
        if (rf.loglik_trace[k] < rf.loglik_trace[k - 1] - 1e-10) res.rasch_monotone = false;
      rasch_acc = rasch_accuracy_matrix(rf);
    }
    res.metrics = evaluate_fit(fit, data.truth, rasch_acc.empty() ? nullptr : &rasch_acc);
  } catch (const std::exception& e) {
    res.ok = false;
    res.error = e.what();
  }
  return res;
}

BenchResult run_bench(const BenchConfig& config) {
  if (!is_builtin_design(config.design)) throw AcbmError("unknown design '" + config.design + "'");
  if (config.reps < 1) throw AcbmError("reps must be at least 1");
  config.sampler.validate();
  config.hyperparams.validate();

  struct Task {
    std::size_t n;
    std::size_t rep;
  };
  std::vector<Task> tasks;
  for (std::size_t n : config.ns)
    for (int r = 0; r < config.reps; ++r) tasks.push_back({n, static_cast<std::size_t>(r)});

  BenchResult result;
  result.replications.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++)
      result.replications[k] = run_replication(config, tasks[k].n, tasks[k].rep);
  };
  const int threads = std::min<int>(config.threads > 0 ? config.threads : default_thread_count(),
                                    static_cast<int>(tasks.size()));
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }

  for (std::size_t n : config.ns) {
    std::vector<const ReplicationResult*> rows;
    for (const auto& r : result.replications)
      if (r.n == n && r.ok) rows.push_back(&r);
    AggregateRow agg;
    agg.design = config.design;
    agg.n = n;
    agg.reps = rows.size();
    agg.cwri = collect(rows, [](const MetricRow& m) { return m.cwri; });
    agg.adk = collect(rows, [](const MetricRow& m) { return m.adk; });
    agg.adw = collect(rows, [](const MetricRow& m) { return m.adw; });
    agg.adp = collect(rows, [](const MetricRow& m) { return m.adp; });
    agg.arwri = collect(rows, [](const MetricRow& m) { return m.arwri; });
    agg.d1_acbm = collect(rows, [](const MetricRow& m) { return m.d1_acbm; });
    agg.d1_rasch = collect(rows, [](const MetricRow& m) { return m.d1_rasch; });
    result.aggregates.push_back(agg);
  }
  for (const auto& r : result.replications)
    if (!r.ok) result.failed_seeds.push_back(r.seed);
  return result;
}

std::string aggregate_csv(const BenchResult& result) {
  std::ostringstream out;
  out << "dgp,n,reps";
  for (const char* m : {"cwri", "adk", "adw", "adp", "arwri", "d1_acbm", "d1_rasch"})
    out << ',' << m << "_median," << m << "_sd";
  out << '\n';
  for (const auto& a : result.aggregates) {
    out << a.design << ',' << a.n << ',' << a.reps;
    for (const auto* m : {&a.cwri, &a.adk, &a.adw, &a.adp, &a.arwri, &a.d1_acbm, &a.d1_rasch}) write_aggregate(out, *m);
    out << '\n';
  }
  return out.str();
}

std::string replications_csv(const BenchResult& result) {
  std::ostringstream out;
  out << io::metric_csv_header() << '\n';
  for (const auto& r : result.replications)
    if (r.ok) out << io::metric_csv_row(r.design, r.n, r.replication, r.metrics) << '\n';
  return out.str();
}

}  // namespace acbm
