#include "acbm/priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

namespace acbm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double log_poisson(long k, double gamma) {
  return static_cast<double>(k) * std::log(gamma) - gamma - std::lgamma(static_cast<double>(k) + 1.0);
}

// log of the k-th summand of V_n(t) without the normalizing constant of p_K.
double log_term(long k, long t, long n, double gamma, double alpha) {
  const double kd = static_cast<double>(k);
  const double falling = std::lgamma(kd + 1.0) - std::lgamma(static_cast<double>(k - t) + 1.0);
  return log_poisson(k, gamma) + falling - log_rising_factorial(kd * alpha, n);
}

}  // namespace

double log_rising_factorial(double x, long n) {
  return std::lgamma(x + static_cast<double>(n)) - std::lgamma(x);
}

double log_beta_binomial_marginal(long s, long f, double a0, double b0) {
  return log_predictive(s, f, 0, 0, a0, b0);
}

double log_predictive(long s_add, long f_add, long S, long F, double a0, double b0) {
  const double a = a0 + static_cast<double>(S);
  const double b = b0 + static_cast<double>(F);
  const double v = std::lgamma(a + static_cast<double>(s_add)) - std::lgamma(a) +
                   std::lgamma(b + static_cast<double>(f_add)) - std::lgamma(b) -
                   std::lgamma(a + b + static_cast<double>(s_add + f_add)) + std::lgamma(a + b);
  if (!std::isfinite(v)) throw NonFiniteResult("Beta-Binomial log probability is not finite");
  return v;
}

BetaBinomialTable::BetaBinomialTable(double a0, double b0, long max_count)
    : lg_a_(max_count + 1), lg_b_(max_count + 1), lg_ab_(max_count + 1) {
  for (long m = 0; m <= max_count; ++m) {
    const double md = static_cast<double>(m);
    lg_a_[m] = std::lgamma(a0 + md);
    lg_b_[m] = std::lgamma(b0 + md);
    lg_ab_[m] = std::lgamma(a0 + b0 + md);
  }
}

int MfmCoefficients::support_max() const {
  const long top = static_cast<long>(log_v.size()) - 1;
  return static_cast<int>(k_max ? std::min<long>(*k_max, top) : top);
}

MfmCoefficients build_mfm_coefficients(long n_items, double gamma, double alpha,
                                       std::optional<int> k_max) {
  if (n_items < 1) throw AcbmError("MFM coefficients need at least one item");
  if (!(gamma > 0.0) || !(alpha > 0.0)) throw InvalidHyperparams("gamma and alpha must be positive");
  if (k_max && *k_max < 1) throw AcbmError("k_max must be at least 1");

  MfmCoefficients out;
  out.n_items = n_items;
  out.k_max = k_max;
  out.gamma = gamma;
  out.alpha = alpha;
  out.log_v.assign(n_items + 1, kNegInf);

  if (k_max) {
    double log_z = kNegInf;
    for (long k = 1; k <= *k_max; ++k) log_z = log_add(log_z, log_poisson(k, gamma));
    const long t_top = std::min<long>(*k_max, n_items);
    for (long t = 1; t <= t_top; ++t) {
      double acc = kNegInf;
      for (long k = t; k <= *k_max; ++k) acc = log_add(acc, log_term(k, t, n_items, gamma, alpha));
      out.log_v[t] = acc - log_z;
    }
    return out;
  }

  // Zero-truncated Poisson: normalizer 1 - exp(-gamma).
  const double log_z = std::log(-std::expm1(-gamma));
  const double floor_k = gamma + 10.0 * std::sqrt(gamma);
  const double rel_tol = std::log(1e-12);
  constexpr long kMaxTerms = 100000;
  for (long t = 1; t <= n_items; ++t) {
    double acc = kNegInf;
    for (long k = t; k < t + kMaxTerms; ++k) {
      const double term = log_term(k, t, n_items, gamma, alpha);
      acc = log_add(acc, term);
      if (static_cast<double>(k) > floor_k + static_cast<double>(t) && term - acc < rel_tol) break;
    }
    out.log_v[t] = acc - log_z;
  }
  return out;
}

double log_partition_prior(const Partition& partition, const MfmCoefficients& coeffs) {
  if (static_cast<long>(partition.size()) != coeffs.n_items)
    throw PartitionShapeMismatch("partition size does not match the coefficient table");
  const auto sizes = partition.block_sizes();
  const long t = static_cast<long>(sizes.size());
  if (coeffs.k_max && t > *coeffs.k_max)
    throw BlockCountExceedsSupport("partition has " + std::to_string(t) +
                                   " blocks, support ends at " + std::to_string(*coeffs.k_max));
  double v = coeffs.log_V(t);
  for (int s : sizes) v += log_rising_factorial(coeffs.alpha, s);
  return v;
}

std::shared_ptr<const MfmCoefficients> MfmCache::get(long n_items, double gamma, double alpha,
                                                     std::optional<int> k_max) {
  const Key key{n_items, k_max.value_or(-1), gamma, alpha};
  {
    std::shared_lock lock(mutex_);
    if (auto it = tables_.find(key); it != tables_.end()) return it->second;
  }
  auto table = std::make_shared<const MfmCoefficients>(build_mfm_coefficients(n_items, gamma, alpha, k_max));
  std::unique_lock lock(mutex_);
  auto [it, inserted] = tables_.try_emplace(key, std::move(table));
  return it->second;
}

std::size_t MfmCache::size() const {
  std::shared_lock lock(mutex_);
  return tables_.size();
}

}  // namespace acbm
