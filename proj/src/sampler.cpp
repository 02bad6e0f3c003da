#include "acbm/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace acbm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

InitMode parse_init_mode(const std::string& name) {
  if (name == "one-cluster") return InitMode::OneCluster;
  if (name == "all-singletons") return InitMode::AllSingletons;
  if (name == "random") return InitMode::Random;
  throw AcbmError("unknown init mode '" + name + "'");
}

std::string to_string(InitMode mode) {
  switch (mode) {
    case InitMode::OneCluster:
      return "one-cluster";
    case InitMode::AllSingletons:
      return "all-singletons";
    case InitMode::Random:
      return "random";
  }
  return "unknown";
}

void SamplerConfig::validate() const {
  if (n_iter < 1) throw AcbmError("n_iter must be at least 1");
  if (n_rep < 1) throw AcbmError("n_rep must be at least 1");
  if (thinning < 1) throw AcbmError("thinning must be at least 1");
  const int b = resolved_burn_in();
  if (b < 0 || b >= n_iter) throw AcbmError("burn_in must satisfy 0 <= burn_in < n_iter");
  if (verify_every < 0) throw AcbmError("verify_every must be non-negative");
}

TraceRecord make_record(int iter, const ModelState& state, double log_joint) {
  TraceRecord rec;
  rec.iter = iter;
  rec.col_assign = canonical_labels(state.column_cluster);
  for (int slot : state.ordered_clusters()) rec.row_assign.push_back(canonical_labels(state.clusters[slot].row_block));
  rec.log_joint = log_joint;
  return rec;
}

std::vector<double> precompute_column_base_logliks(const ResponseMatrix& X, const Hyperparams& h) {
  const long n = static_cast<long>(X.n_examinees());
  std::vector<double> out(X.n_questions());
  for (std::size_t j = 0; j < out.size(); ++j) {
    const long s = X.column_sum(j);
    out[j] = log_beta_binomial_marginal(s, n - s, h.a0, h.b0);
  }
  return out;
}

CollapsedGibbs::CollapsedGibbs(const ResponseMatrix& X, const Hyperparams& h,
                               std::shared_ptr<MfmCache> cache)
    : X_(X),
      h_(h),
      cache_(cache ? std::move(cache) : std::make_shared<MfmCache>()),
      base_loglik_((h.validate(), precompute_column_base_logliks(X, h))),
      table_(h.a0, h.b0, static_cast<long>(X.n_examinees() * X.n_questions())) {
  const std::size_t n = X_.n_examinees();
  const std::size_t d = X_.n_questions();
  by_column_.resize(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) by_column_[j * n + i] = static_cast<std::uint8_t>(X_(i, j));

  col_coeffs_ = cache_->get(static_cast<long>(d), h_.gamma_col, h_.alpha_col, std::nullopt);
  const int top = kmax_bound(static_cast<int>(d));
  row_coeffs_.resize(top + 1);
  for (int k = 1; k <= top; ++k) row_coeffs_[k] = cache_->get(static_cast<long>(n), h_.gamma_row, h_.alpha_row, k);
}

const MfmCoefficients& CollapsedGibbs::row_coefficients(int cluster_size) const {
  return *row_coeffs_.at(kmax_bound(cluster_size));
}

bool CollapsedGibbs::column_is_pinned(const ModelState& state, int j) const {
  const auto& cl = state.clusters[state.column_cluster[j]];
  return cl.size() >= 2 && cl.n_blocks > kmax_bound(cl.size() - 1);
}

int CollapsedGibbs::remove_column(ModelState& state, int j) const {
  const int slot = state.column_cluster[j];
  auto& cl = state.clusters[slot];
  cl.columns.erase(std::find(cl.columns.begin(), cl.columns.end(), j));
  state.column_cluster[j] = -1;
  if (cl.columns.empty()) {
    cl = ClusterState{};
    --state.n_clusters;
    return slot;
  }
  const std::size_t n = X_.n_examinees();
  const std::uint8_t* x = by_column_.data() + static_cast<std::size_t>(j) * n;
  for (std::size_t i = 0; i < n; ++i) {
    cl.row_ones[i] -= x[i];
    auto& b = cl.blocks[cl.row_block[i]];
    b.successes -= x[i];
    b.failures -= 1 - x[i];
  }
  return slot;
}

void CollapsedGibbs::add_column(ModelState& state, int j, int target) const {
  const std::size_t n = X_.n_examinees();
  const std::uint8_t* x = by_column_.data() + static_cast<std::size_t>(j) * n;
  if (target == GibbsCandidate::kNewSlot) {
    target = state.free_cluster_slot();
    auto& cl = state.clusters[target];
    cl.columns = {j};
    cl.row_block.assign(n, 0);
    cl.row_ones.assign(x, x + n);
    const long s = X_.column_sum(j);
    cl.blocks = {BlockSuffStats{s, static_cast<long>(n) - s, static_cast<long>(n)}};
    cl.n_blocks = 1;
    ++state.n_clusters;
  } else {
    auto& cl = state.clusters[target];
    cl.columns.push_back(j);
    for (std::size_t i = 0; i < n; ++i) {
      cl.row_ones[i] += x[i];
      auto& b = cl.blocks[cl.row_block[i]];
      b.successes += x[i];
      b.failures += 1 - x[i];
    }
  }
  state.column_cluster[j] = target;
}

void CollapsedGibbs::column_weights(const ModelState& state, int j,
                                    std::vector<GibbsCandidate>& out) const {
  out.clear();
  const std::size_t n = X_.n_examinees();
  const std::uint8_t* x = by_column_.data() + static_cast<std::size_t>(j) * n;
  const long t = state.n_clusters;
  thread_local std::vector<long> ones_in_block;

  for (std::size_t slot = 0; slot < state.clusters.size(); ++slot) {
    const auto& cl = state.clusters[slot];
    if (cl.empty()) continue;
    ones_in_block.assign(cl.blocks.size(), 0);
    for (std::size_t i = 0; i < n; ++i) ones_in_block[cl.row_block[i]] += x[i];
    double w = std::log(cl.size() + h_.alpha_col);
    for (std::size_t k = 0; k < cl.blocks.size(); ++k) {
      const auto& b = cl.blocks[k];
      if (b.members == 0) continue;
      const long s = ones_in_block[k];
      w += table_.log_predictive(s, b.members - s, b.successes, b.failures);
    }
    // The row partition's prior depends on the cluster size through the
    // truncation of the component count.
    w += row_coeffs_[kmax_bound(cl.size() + 1)]->log_V(cl.n_blocks) -
         row_coeffs_[kmax_bound(cl.size())]->log_V(cl.n_blocks);
    out.push_back({static_cast<int>(slot), w});
  }

  double w_new = 0.0;
  if (t > 0)
    w_new = std::log(h_.alpha_col) + col_coeffs_->log_V(t + 1) - col_coeffs_->log_V(t) + base_loglik_[j];
  out.push_back({GibbsCandidate::kNewSlot, w_new});
}

std::vector<GibbsCandidate> CollapsedGibbs::column_conditional(const ModelState& state, int j) const {
  if (column_is_pinned(state, j)) return {{state.column_cluster[j], 0.0}};
  ModelState work = state;
  remove_column(work, j);
  std::vector<GibbsCandidate> out;
  column_weights(work, j, out);
  return out;
}

ModelState CollapsedGibbs::apply_column_move(ModelState state, int j, int target) const {
  if (column_is_pinned(state, j)) {
    if (target != state.column_cluster[j]) throw AcbmError("column is pinned to its cluster");
    return state;
  }
  remove_column(state, j);
  add_column(state, j, target);
  return state;
}

void CollapsedGibbs::update_columns(ModelState& state, Rng& rng) const {
  std::vector<GibbsCandidate> cands;
  std::vector<double> weights;
  const int d = static_cast<int>(X_.n_questions());
  for (int j = 0; j < d; ++j) {
    if (column_is_pinned(state, j)) continue;
    remove_column(state, j);
    column_weights(state, j, cands);
    weights.resize(cands.size());
    for (std::size_t k = 0; k < cands.size(); ++k) weights[k] = cands[k].log_weight;
    add_column(state, j, cands[rng.log_categorical(weights)].target);
  }
}

void CollapsedGibbs::remove_row(ClusterState& cl, int i) const {
  auto& b = cl.blocks[cl.row_block[i]];
  b.successes -= cl.row_ones[i];
  b.failures -= cl.size() - cl.row_ones[i];
  b.members -= 1;
  if (b.members == 0) --cl.n_blocks;
  cl.row_block[i] = -1;
}

void CollapsedGibbs::add_row(ClusterState& cl, int i, int target) const {
  if (target == GibbsCandidate::kNewSlot) {
    target = cl.free_block_slot();
    ++cl.n_blocks;
  }
  auto& b = cl.blocks[target];
  b.successes += cl.row_ones[i];
  b.failures += cl.size() - cl.row_ones[i];
  b.members += 1;
  cl.row_block[i] = target;
}

void CollapsedGibbs::row_weights(const ClusterState& cl, int i, const MfmCoefficients& coeffs,
                                 std::vector<GibbsCandidate>& out) const {
  out.clear();
  const long t = cl.n_blocks;
  if (t == 0) {
    out.push_back({GibbsCandidate::kNewSlot, 0.0});
    return;
  }
  const long s = cl.row_ones[i];
  const long f = cl.size() - s;
  for (std::size_t k = 0; k < cl.blocks.size(); ++k) {
    const auto& b = cl.blocks[k];
    if (b.members == 0) continue;
    out.push_back({static_cast<int>(k), std::log(b.members + h_.alpha_row) +
                                            table_.log_predictive(s, f, b.successes, b.failures)});
  }
  if (t < kmax_bound(cl.size())) {
    out.push_back({GibbsCandidate::kNewSlot, std::log(h_.alpha_row) + coeffs.log_V(t + 1) -
                                                 coeffs.log_V(t) + table_.log_marginal(s, f)});
  }
}

std::vector<GibbsCandidate> CollapsedGibbs::row_conditional(const ModelState& state, int slot, int i) const {
  ClusterState cl = state.clusters.at(slot);
  remove_row(cl, i);
  std::vector<GibbsCandidate> out;
  row_weights(cl, i, row_coefficients(cl.size()), out);
  return out;
}

ModelState CollapsedGibbs::apply_row_move(ModelState state, int slot, int i, int target) const {
  auto& cl = state.clusters.at(slot);
  remove_row(cl, i);
  add_row(cl, i, target);
  return state;
}

void CollapsedGibbs::update_rows(ModelState& state, int slot, Rng& rng) const {
  auto& cl = state.clusters[slot];
  // A single admissible block leaves nothing to sample.
  if (kmax_bound(cl.size()) == 1) return;
  const auto& coeffs = row_coefficients(cl.size());
  std::vector<GibbsCandidate> cands;
  std::vector<double> weights;
  const int n = static_cast<int>(X_.n_examinees());
  for (int i = 0; i < n; ++i) {
    remove_row(cl, i);
    row_weights(cl, i, coeffs, cands);
    weights.resize(cands.size());
    for (std::size_t k = 0; k < cands.size(); ++k) weights[k] = cands[k].log_weight;
    add_row(cl, i, cands[rng.log_categorical(weights)].target);
  }
}

void CollapsedGibbs::sweep_rows(ModelState& state, Rng& rng) const {
  for (int slot : state.ordered_clusters()) update_rows(state, slot, rng);
}

double CollapsedGibbs::log_joint(const ModelState& state) const {
  double v = log_partition_prior(state.column_partition(), *col_coeffs_);
  for (const auto& cl : state.clusters) {
    if (cl.empty()) continue;
    if (cl.n_blocks > kmax_bound(cl.size())) return kNegInf;
    v += log_partition_prior(Partition{cl.row_block}, row_coefficients(cl.size()));
    for (const auto& b : cl.blocks)
      if (b.members > 0) v += log_beta_binomial_marginal(b.successes, b.failures, h_.a0, h_.b0);
  }
  return v;
}

ModelState initial_state(const ResponseMatrix& X, InitMode mode, Rng& rng) {
  const std::size_t d = X.n_questions();
  ColumnPartition cols;
  cols.labels.resize(d);
  switch (mode) {
    case InitMode::AllSingletons:
      return singleton_state(X);
    case InitMode::OneCluster:
      std::fill(cols.labels.begin(), cols.labels.end(), 0);
      break;
    case InitMode::Random:
      for (auto& l : cols.labels) l = static_cast<int>(rng.below(d));
      break;
  }
  cols = canonicalize(cols);
  std::vector<RowPartition> rows(cols.n_blocks(), RowPartition{std::vector<int>(X.n_examinees(), 0)});
  return make_state(X, cols, rows);
}

void run_chain_visit(const ResponseMatrix& X, const Hyperparams& h, const SamplerConfig& config,
                     const StateVisitor& visit, std::shared_ptr<MfmCache> cache) {
  config.validate();
  const CollapsedGibbs kernel(X, h, std::move(cache));
  Rng rng(config.seed);
  ModelState state = initial_state(X, config.init_mode, rng);
  const int burn_in = config.resolved_burn_in();

  for (int iter = 0; iter < config.n_iter; ++iter) {
    kernel.update_columns(state, rng);
    for (int rep = 0; rep < config.n_rep; ++rep) kernel.sweep_rows(state, rng);

    if (count_bound_violations(state) != 0)
      throw AcbmError("identifiability bound violated at iteration " + std::to_string(iter));
    if (config.verify_every > 0 && (iter + 1) % config.verify_every == 0 && !verify_suffstats(X, state))
      throw AcbmError("cached sufficient statistics drifted at iteration " + std::to_string(iter));

    if (iter >= burn_in && (iter - burn_in) % config.thinning == 0) visit(iter, state, kernel.log_joint(state));
  }
}

ChainTrace run_chain(const ResponseMatrix& X, const Hyperparams& h, const SamplerConfig& config,
                     std::shared_ptr<MfmCache> cache) {
  ChainTrace trace;
  trace.seed = config.seed;
  trace.n_iter = config.n_iter;
  trace.n_rep = config.n_rep;
  trace.burn_in = config.resolved_burn_in();
  trace.thinning = config.thinning;
  run_chain_visit(
      X, h, config,
      [&](int iter, const ModelState& state, double lj) { trace.states.push_back(make_record(iter, state, lj)); },
      std::move(cache));
  return trace;
}

}  // namespace acbm
