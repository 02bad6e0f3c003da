// acbm: simulate, fit, evaluate and benchmark the binomial-mixture model.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "acbm/bench.hpp"
#include "acbm/dgp.hpp"
#include "acbm/io.hpp"
#include "acbm/rasch.hpp"
#include "acbm/sampler.hpp"
#include "acbm/summarize.hpp"

namespace fs = std::filesystem;
using acbm::io::json;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void ensure_dir(const fs::path& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw acbm::AcbmError("cannot write " + path.string());
  out << text;
}

// Options shared by fit and bench.
struct ChainFlags {
  int n_iter = 200;
  int n_rep = 400;
  int burn_in = -1;
  int thinning = 1;
  std::string init = "all-singletons";
  double a0 = 0.01, b0 = 0.01, gamma = 1.0, alpha = 1.0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--n-iter", n_iter, "outer iterations")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--n-rep", n_rep, "row sweeps per outer iteration")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--burn-in", burn_in, "discarded outer iterations (default n-iter/2)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--thinning", thinning, "keep every k-th post burn-in state")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--init", init, "one-cluster | all-singletons | random")->capture_default_str();
    cmd->add_option("--a0", a0, "Beta prior a0")->capture_default_str();
    cmd->add_option("--b0", b0, "Beta prior b0")->capture_default_str();
    cmd->add_option("--gamma", gamma, "Poisson rate for row and column component counts")->capture_default_str();
    cmd->add_option("--alpha", alpha, "Dirichlet concentration for rows and columns")->capture_default_str();
  }

  acbm::SamplerConfig sampler(std::uint64_t seed) const {
    acbm::SamplerConfig c;
    c.n_iter = n_iter;
    c.n_rep = n_rep;
    if (burn_in >= 0) c.burn_in = burn_in;
    c.thinning = thinning;
    c.seed = seed;
    c.init_mode = acbm::parse_init_mode(init);
    c.validate();
    return c;
  }

  acbm::Hyperparams hyperparams() const {
    acbm::Hyperparams h;
    h.a0 = a0;
    h.b0 = b0;
    h.gamma_row = h.gamma_col = gamma;
    h.alpha_row = h.alpha_col = alpha;
    h.validate();
    return h;
  }

  json to_json() const {
    return {{"n_iter", n_iter}, {"n_rep", n_rep}, {"thinning", thinning}, {"init", init},
            {"a0", a0},         {"b0", b0},       {"gamma", gamma},       {"alpha", alpha}};
  }
};

acbm::SimulatedData simulate(const std::string& design, std::size_t n, std::uint64_t seed) {
  if (acbm::is_builtin_design(design)) return acbm::simulate_builtin(design, n, seed);
  if (!fs::exists(design)) throw UsageError("unknown design '" + design + "'");
  acbm::io::DesignSpec spec;
  try {
    spec = acbm::io::design_from_json(acbm::io::read_json(design), n, seed);
  } catch (const acbm::DesignInvariantViolation& e) {
    throw UsageError(std::string("invalid design: ") + e.what());
  }
  return spec.acbm ? acbm::generate_acbm(*spec.acbm) : acbm::generate_rasch(*spec.rasch);
}

std::string cluster_table(const acbm::FitSummary& fit) {
  std::ostringstream out;
  out << "cluster,size,K,columns,accuracies,weights\n";
  for (std::size_t c = 0; c < fit.clusters.size(); ++c) {
    const auto& cl = fit.clusters[c];
    std::vector<std::size_t> order(cl.theta.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return cl.theta[a] < cl.theta[b]; });
    out << c << ',' << cl.size() << ',' << cl.K << ',';
    for (std::size_t k = 0; k < cl.columns.size(); ++k) out << (k ? " " : "") << cl.columns[k];
    out << ',';
    for (std::size_t k = 0; k < order.size(); ++k) out << (k ? " " : "") << acbm::io::format_real(cl.theta[order[k]]);
    out << ',';
    for (std::size_t k = 0; k < order.size(); ++k) out << (k ? " " : "") << acbm::io::format_real(cl.weight[order[k]]);
    out << '\n';
  }
  return out.str();
}

// Examinee counts by block of cluster a (rows) and block of cluster b
// (columns), blocks ordered by increasing accuracy.
std::string contingency_table(const acbm::FitSummary& fit, int a, int b) {
  const int n_clusters = static_cast<int>(fit.clusters.size());
  if (a < 0 || b < 0 || a >= n_clusters || b >= n_clusters)
    throw UsageError("--pair ids must lie in [0, " + std::to_string(n_clusters) + ")");
  auto rank = [&](int c) {
    const auto& theta = fit.clusters[c].theta;
    std::vector<int> order(theta.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return theta[x] < theta[y]; });
    std::vector<int> pos(theta.size());
    for (std::size_t k = 0; k < order.size(); ++k) pos[order[k]] = static_cast<int>(k);
    return std::pair{order, pos};
  };
  const auto [order_a, pos_a] = rank(a);
  const auto [order_b, pos_b] = rank(b);
  std::vector<long> counts(order_a.size() * order_b.size(), 0);
  for (std::size_t i = 0; i < fit.n; ++i)
    ++counts[pos_a[fit.row_partitions[a].labels[i]] * order_b.size() + pos_b[fit.row_partitions[b].labels[i]]];

  std::ostringstream out;
  out << "cluster" << a << "\\cluster" << b;
  for (int k : order_b) out << ',' << acbm::io::format_real(fit.clusters[b].theta[k]);
  out << '\n';
  for (std::size_t r = 0; r < order_a.size(); ++r) {
    out << acbm::io::format_real(fit.clusters[a].theta[order_a[r]]);
    for (std::size_t s = 0; s < order_b.size(); ++s) out << ',' << counts[r * order_b.size() + s];
    out << '\n';
  }
  return out.str();
}

std::string json_scalar_to_arg(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) s += (s.empty() ? "" : ",") + json_scalar_to_arg(e);
    return s;
  }
  return v.dump();
}

// Values from --config fill in any long flag the command line did not set.
// Keys may sit at the top level or under the subcommand name.
std::vector<std::string> merge_config(std::vector<std::string> args, CLI::App& app) {
  fs::path config_path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) config_path = args[k + 1];
    else if (args[k].rfind("--config=", 0) == 0) config_path = args[k].substr(9);
  }
  if (config_path.empty()) return args;
  CLI::App* cmd = nullptr;
  std::string sub;
  for (const auto& a : args) {
    if (auto* s = app.get_subcommand_no_throw(a)) {
      cmd = s;
      sub = a;
      break;
    }
  }
  if (!cmd) return args;
  const json cfg = acbm::io::read_json(config_path);
  json flat = json::object();
  for (const auto& [k, v] : cfg.items())
    if (!v.is_object()) flat[k] = v;
  if (cfg.contains(sub) && cfg[sub].is_object())
    for (const auto& [k, v] : cfg[sub].items()) flat[k] = v;
  for (const auto& [k, v] : flat.items()) {
    std::string flag = "--" + k;
    std::replace(flag.begin(), flag.end(), '_', '-');
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (!given && cmd->get_option_no_throw(flag)) {
      args.push_back(flag);
      args.push_back(json_scalar_to_arg(v));
    }
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binomial-mixture item clustering: simulate, fit, evaluate, benchmark"};
  app.require_subcommand(1);
  std::string config_file;
  app.add_option("--config", config_file, "JSON file supplying flag values")->check(CLI::ExistingFile);
  app.set_help_all_flag("--help-all");

  // simulate
  std::string sim_design, sim_out = ".";
  std::size_t sim_n = 0;
  std::uint64_t sim_seed = 1;
  auto* sim = app.add_subcommand("simulate", "simulate a response matrix and its ground truth");
  sim->add_option("--design", sim_design, "dgp1 | dgp2 | dgp3 | dgp4 | design JSON file")->required();
  sim->add_option("--n", sim_n, "examinees")->required()->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "random seed")->capture_default_str();
  sim->add_option("--out", sim_out, "output directory")->capture_default_str();

  // fit
  std::string fit_matrix, fit_out = ".";
  std::uint64_t fit_seed = 1;
  ChainFlags fit_flags;
  auto* fit = app.add_subcommand("fit", "run the collapsed Gibbs sampler and summarize");
  fit->add_option("--matrix", fit_matrix, "0/1 response CSV")->required();
  fit->add_option("--out", fit_out, "output directory")->capture_default_str();
  fit->add_option("--seed", fit_seed, "random seed")->capture_default_str();
  fit_flags.add_to(fit);

  // rasch
  std::string rasch_matrix, rasch_out = ".";
  acbm::RaschConfig rasch_cfg;
  auto* rasch = app.add_subcommand("rasch", "fit the Rasch baseline by marginal maximum likelihood");
  rasch->add_option("--matrix", rasch_matrix, "0/1 response CSV")->required();
  rasch->add_option("--out", rasch_out, "output directory")->capture_default_str();
  rasch->add_option("--nodes", rasch_cfg.quadrature_nodes, "Gauss-Hermite nodes")->capture_default_str();
  rasch->add_option("--max-iter", rasch_cfg.max_iterations, "EM iteration cap")->capture_default_str();
  rasch->add_option("--tol", rasch_cfg.tolerance, "parameter change tolerance")->capture_default_str();

  // evaluate
  std::string ev_summary, ev_truth, ev_rasch, ev_out, ev_label = "custom";
  std::size_t ev_replication = 0;
  auto* ev = app.add_subcommand("evaluate", "score a fit against the simulation truth");
  ev->add_option("--summary", ev_summary, "summary.json from fit")->required();
  ev->add_option("--truth", ev_truth, "truth.json from simulate")->required();
  ev->add_option("--rasch", ev_rasch, "rasch.json from rasch");
  ev->add_option("--out", ev_out, "metrics CSV (default stdout)");
  ev->add_option("--label", ev_label, "value of the dgp column")->capture_default_str();
  ev->add_option("--replication", ev_replication, "value of the replication column")->capture_default_str();

  // bench
  acbm::BenchConfig bench_cfg;
  std::string bench_out = ".";
  ChainFlags bench_flags;
  auto* bench = app.add_subcommand("bench", "Monte Carlo replications over a built-in design");
  bench->add_option("--design", bench_cfg.design, "dgp1 | dgp2 | dgp3 | dgp4")->required();
  bench->add_option("--n", bench_cfg.ns, "comma-separated sample sizes")->delimiter(',')->required();
  bench->add_option("--reps", bench_cfg.reps, "replications per sample size")->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_cfg.seed, "base seed; replication r uses seed + r")->capture_default_str();
  bench->add_option("--threads", bench_cfg.threads, "worker count (0: ACBM_THREADS or all cores)")->capture_default_str();
  bench->add_option("--out", bench_out, "output directory")->capture_default_str();
  bench_flags.add_to(bench);

  // report
  std::string rep_summary, rep_pair, rep_out;
  auto* report = app.add_subcommand("report", "cluster table and pairwise contingency tables");
  report->add_option("--summary", rep_summary, "summary.json from fit")->required();
  report->add_option("--pair", rep_pair, "two cluster ids, e.g. 0,2");
  report->add_option("--out", rep_out, "output file (default stdout)");

  for (auto* cmd : {sim, fit, rasch, ev, bench, report}) cmd->fallthrough();

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = merge_config(std::move(args), app);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*sim) {
      const auto data = simulate(sim_design, sim_n, sim_seed);
      ensure_dir(sim_out);
      acbm::io::write_matrix_csv(fs::path(sim_out) / "matrix.csv", data.X);
      json truth = acbm::io::truth_to_json(data.truth);
      truth["design"] = sim_design;
      truth["seed"] = sim_seed;
      acbm::io::write_json(fs::path(sim_out) / "truth.json", truth);
    } else if (*fit) {
      const auto X = acbm::io::read_matrix_csv(fit_matrix);
      const auto h = fit_flags.hyperparams();
      const auto trace = acbm::run_chain(X, h, fit_flags.sampler(fit_seed));
      const auto summary = acbm::summarize(X, trace, h);
      ensure_dir(fit_out);
      {
        std::ofstream t(fs::path(fit_out) / "trace.ndjson", std::ios::binary);
        if (!t) throw acbm::AcbmError("cannot write trace.ndjson");
        acbm::io::write_trace_ndjson(t, trace);
      }
      acbm::io::write_real_matrix_csv(fs::path(fit_out) / "accuracy.csv", summary.n, summary.D, summary.accuracy);
      json j = acbm::io::summary_to_json(summary, "accuracy.csv");
      j["chain"] = acbm::io::chain_metadata(trace);
      j["settings"] = fit_flags.to_json();
      acbm::io::write_json(fs::path(fit_out) / "summary.json", j);
    } else if (*rasch) {
      const auto X = acbm::io::read_matrix_csv(rasch_matrix);
      const auto rf = acbm::fit_rasch(X, rasch_cfg);
      ensure_dir(rasch_out);
      acbm::io::write_json(fs::path(rasch_out) / "rasch.json", acbm::io::rasch_to_json(rf));
    } else if (*ev) {
      const auto summary = acbm::io::summary_from_json(acbm::io::read_json(ev_summary));
      const auto truth = acbm::io::truth_from_json(acbm::io::read_json(ev_truth));
      std::vector<double> rasch_acc;
      if (!ev_rasch.empty()) rasch_acc = acbm::rasch_accuracy_matrix(acbm::io::rasch_from_json(acbm::io::read_json(ev_rasch)));
      const auto row = acbm::evaluate_fit(summary, truth, rasch_acc.empty() ? nullptr : &rasch_acc);
      const std::string text =
          acbm::io::metric_csv_header() + "\n" + acbm::io::metric_csv_row(ev_label, truth.n, ev_replication, row) + "\n";
      if (ev_out.empty()) std::cout << text;
      else write_text(ev_out, text);
    } else if (*bench) {
      if (!acbm::is_builtin_design(bench_cfg.design)) throw UsageError("unknown design '" + bench_cfg.design + "'");
      bench_cfg.sampler = bench_flags.sampler(bench_cfg.seed);
      bench_cfg.hyperparams = bench_flags.hyperparams();
      const auto result = acbm::run_bench(bench_cfg);
      ensure_dir(bench_out);
      write_text(fs::path(bench_out) / "aggregate.csv", acbm::aggregate_csv(result));
      write_text(fs::path(bench_out) / "replications.csv", acbm::replications_csv(result));
      json meta = {{"design", bench_cfg.design}, {"n", bench_cfg.ns},       {"reps", bench_cfg.reps},
                   {"seed", bench_cfg.seed},     {"settings", bench_flags.to_json()}};
      json reps = json::array();
      for (const auto& r : result.replications) {
        json e = {{"n", r.n}, {"replication", r.replication}, {"seed", r.seed}, {"ok", r.ok},
                  {"kept_states", r.kept_states}, {"bound_violations", r.bound_violations}};
        if (!r.ok) e["error"] = r.error;
        reps.push_back(e);
      }
      meta["replications"] = reps;
      meta["failed_seeds"] = result.failed_seeds;
      acbm::io::write_json(fs::path(bench_out) / "bench.json", meta);
      if (!result.failed_seeds.empty()) {
        std::cerr << "failed replications (seeds):";
        for (auto s : result.failed_seeds) std::cerr << ' ' << s;
        std::cerr << '\n';
        return kExitRuntime;
      }
    } else if (*report) {
      const auto summary = acbm::io::summary_from_json(acbm::io::read_json(rep_summary));
      std::string text = cluster_table(summary);
      if (!rep_pair.empty()) {
        int a = -1, b = -1;
        char comma = 0;
        std::istringstream ps(rep_pair);
        if (!(ps >> a >> comma >> b) || comma != ',') throw UsageError("--pair expects two ids like 0,2");
        text += "\n" + contingency_table(summary, a, b);
      }
      if (rep_out.empty()) std::cout << text;
      else write_text(rep_out, text);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
