#pragma once

#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <tuple>
#include <vector>

#include "acbm/core.hpp"

namespace acbm {

class NonFiniteResult : public AcbmError {
 public:
  using AcbmError::AcbmError;
};

class BlockCountExceedsSupport : public AcbmError {
 public:
  using AcbmError::AcbmError;
};

// log of the probability of one particular binary sequence holding s ones and
// f zeros under a Beta(a0, b0) prior on the success rate:
//   log B(a0 + s, b0 + f) - log B(a0, b0).
double log_beta_binomial_marginal(long s, long f, double a0, double b0);

// log of the probability of s_add more ones and f_add more zeros given a block
// that already holds S ones and F zeros.
double log_predictive(long s_add, long f_add, long S, long F, double a0, double b0);

// log of the rising factorial x (x+1) ... (x+n-1).
double log_rising_factorial(double x, long n);

// Lookup tables for lgamma(a0 + m), lgamma(b0 + m), lgamma(a0 + b0 + m) used by
// the sampler's inner loops. Counts must not exceed max_count.
class BetaBinomialTable {
 public:
  BetaBinomialTable(double a0, double b0, long max_count);

  double log_predictive(long s_add, long f_add, long S, long F) const {
    return lg_a_[S + s_add] - lg_a_[S] + lg_b_[F + f_add] - lg_b_[F] -
           lg_ab_[S + F + s_add + f_add] + lg_ab_[S + F];
  }
  double log_marginal(long s, long f) const { return log_predictive(s, f, 0, 0); }
  long max_count() const { return static_cast<long>(lg_a_.size()) - 1; }

 private:
  std::vector<double> lg_a_;
  std::vector<double> lg_b_;
  std::vector<double> lg_ab_;
};

// Coefficients V_n(t) of the mixture-of-finite-mixtures partition prior with a
// Poisson(gamma) component count restricted to {1, ..., k_max} (or {1, 2, ...}
// when k_max is empty) and symmetric Dirichlet(alpha) weights.
struct MfmCoefficients {
  long n_items = 0;
  std::optional<int> k_max;
  double gamma = 1.0;
  double alpha = 1.0;
  std::vector<double> log_v;  // log_v[t] for t = 0..n_items; log_v[0] = -inf

  // -inf outside the support.
  double log_V(long t) const {
    if (t < 1 || t >= static_cast<long>(log_v.size())) return -std::numeric_limits<double>::infinity();
    return log_v[t];
  }
  int support_max() const;
};

MfmCoefficients build_mfm_coefficients(long n_items, double gamma, double alpha,
                                       std::optional<int> k_max);

// log V_n(t) + sum over blocks of log alpha^(|b|).
double log_partition_prior(const Partition& partition, const MfmCoefficients& coeffs);

// Coefficient tables keyed by (n, k_max, gamma, alpha). Readers share the
// lock; insertion is exclusive. Returned tables are immutable.
class MfmCache {
 public:
  std::shared_ptr<const MfmCoefficients> get(long n_items, double gamma, double alpha,
                                             std::optional<int> k_max);
  std::size_t size() const;

 private:
  using Key = std::tuple<long, int, double, double>;
  mutable std::shared_mutex mutex_;
  std::map<Key, std::shared_ptr<const MfmCoefficients>> tables_;
};

}  // namespace acbm
