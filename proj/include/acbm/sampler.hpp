#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "acbm/core.hpp"
#include "acbm/priors.hpp"
#include "acbm/rng.hpp"

namespace acbm {

enum class InitMode { OneCluster, AllSingletons, Random };

InitMode parse_init_mode(const std::string& name);
std::string to_string(InitMode mode);

struct SamplerConfig {
  int n_iter = 200;
  int n_rep = 400;
  std::optional<int> burn_in;  // defaults to n_iter / 2
  std::uint64_t seed = 1;
  int thinning = 1;
  InitMode init_mode = InitMode::AllSingletons;
#ifdef NDEBUG
  int verify_every = 0;
#else
  int verify_every = 50;
#endif

  int resolved_burn_in() const { return burn_in.value_or(n_iter / 2); }
  void validate() const;
};

// One kept state in canonical form: column clusters numbered by first
// appearance, and row_assign[c] the canonical row partition of cluster c.
struct TraceRecord {
  int iter = 0;
  std::vector<int> col_assign;
  std::vector<std::vector<int>> row_assign;
  double log_joint = 0.0;
};

struct ChainTrace {
  std::vector<TraceRecord> states;
  std::uint64_t seed = 0;
  std::string rng = Rng::kName;
  int n_iter = 0;
  int n_rep = 0;
  int burn_in = 0;
  int thinning = 1;
};

TraceRecord make_record(int iter, const ModelState& state, double log_joint);

// log_beta_binomial_marginal of every column treated as a single-block
// cluster of its own.
std::vector<double> precompute_column_base_logliks(const ResponseMatrix& X, const Hyperparams& h);

// A candidate of a Gibbs full conditional. `target` is an occupied slot, or
// kNewSlot for a fresh cluster/block.
struct GibbsCandidate {
  static constexpr int kNewSlot = -1;
  int target = kNewSlot;
  double log_weight = 0.0;
};

// Collapsed Gibbs kernel for the two-level partition model. Holds only
// immutable data, so one instance can serve several chains.
class CollapsedGibbs {
 public:
  CollapsedGibbs(const ResponseMatrix& X, const Hyperparams& h,
                 std::shared_ptr<MfmCache> cache = nullptr);

  const ResponseMatrix& data() const { return X_; }
  const Hyperparams& hyperparams() const { return h_; }
  const std::vector<double>& column_base_logliks() const { return base_loglik_; }
  const MfmCoefficients& column_coefficients() const { return *col_coeffs_; }
  const MfmCoefficients& row_coefficients(int cluster_size) const;

  // One systematic scan over columns 0..D-1.
  void update_columns(ModelState& state, Rng& rng) const;
  // One scan over examinees 0..n-1 within the cluster in `slot`.
  void update_rows(ModelState& state, int slot, Rng& rng) const;
  // update_rows over every occupied cluster in canonical order.
  void sweep_rows(ModelState& state, Rng& rng) const;

  // Full conditional of column j given everything else. When removing j
  // would leave its cluster above the block bound, the only candidate is its
  // current cluster.
  std::vector<GibbsCandidate> column_conditional(const ModelState& state, int j) const;
  std::vector<GibbsCandidate> row_conditional(const ModelState& state, int slot, int i) const;
  ModelState apply_column_move(ModelState state, int j, int target) const;
  ModelState apply_row_move(ModelState state, int slot, int i, int target) const;

  // log m(C) + sum over clusters of [log row prior + sum of block marginals].
  double log_joint(const ModelState& state) const;

 private:
  bool column_is_pinned(const ModelState& state, int j) const;
  int remove_column(ModelState& state, int j) const;
  void add_column(ModelState& state, int j, int target) const;
  void column_weights(const ModelState& state, int j, std::vector<GibbsCandidate>& out) const;
  void remove_row(ClusterState& cl, int i) const;
  void add_row(ClusterState& cl, int i, int target) const;
  void row_weights(const ClusterState& cl, int i, const MfmCoefficients& coeffs,
                   std::vector<GibbsCandidate>& out) const;

  ResponseMatrix X_;
  Hyperparams h_;
  std::shared_ptr<MfmCache> cache_;
  std::vector<std::uint8_t> by_column_;  // D x n, column-major copy of X
  std::vector<double> base_loglik_;
  BetaBinomialTable table_;
  std::shared_ptr<const MfmCoefficients> col_coeffs_;
  std::vector<std::shared_ptr<const MfmCoefficients>> row_coeffs_;  // indexed by k_max
};

ModelState initial_state(const ResponseMatrix& X, InitMode mode, Rng& rng);

using StateVisitor = std::function<void(int iter, const ModelState& state, double log_joint)>;

// Runs one chain and calls `visit` on every kept state.
void run_chain_visit(const ResponseMatrix& X, const Hyperparams& h, const SamplerConfig& config,
                     const StateVisitor& visit, std::shared_ptr<MfmCache> cache = nullptr);

ChainTrace run_chain(const ResponseMatrix& X, const Hyperparams& h, const SamplerConfig& config,
                     std::shared_ptr<MfmCache> cache = nullptr);

}  // namespace acbm
