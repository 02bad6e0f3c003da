#include "doctest.h"

#include <cmath>
#include <limits>

#include "acbm/priors.hpp"
#include "oracle/enumerator.hpp"

using namespace acbm;

TEST_CASE("beta-binomial marginal small cases") {
  CHECK(log_beta_binomial_marginal(1, 0, 1, 1) == doctest::Approx(std::log(0.5)).epsilon(1e-14));
  CHECK(log_beta_binomial_marginal(1, 1, 1, 1) == doctest::Approx(std::log(1.0 / 6.0)).epsilon(1e-14));
  CHECK(log_beta_binomial_marginal(0, 0, 0.3, 2.0) == 0.0);
}

TEST_CASE("beta-binomial marginal matches the telescoping product") {
  for (double a0 : {0.01, 0.5, 1.0, 2.0})
    for (double b0 : {0.01, 0.5, 1.0, 2.0})
      for (long s = 0; s <= 50; s += 7)
        for (long f = 0; f <= 50; f += 5) {
          const double want = oracle::log_beta_binomial_product(s, f, a0, b0);
          const double got = log_beta_binomial_marginal(s, f, a0, b0);
          CHECK(std::abs(got - want) <= 1e-10 * std::max(1.0, std::abs(want)));
        }
}

TEST_CASE("predictive is a ratio of marginals and the table agrees") {
  const double a0 = 0.7, b0 = 1.3;
  const BetaBinomialTable table(a0, b0, 60);
  for (long S = 0; S < 20; S += 3)
    for (long F = 0; F < 20; F += 4)
      for (long s = 0; s < 5; ++s)
        for (long f = 0; f < 5; ++f) {
          const double ratio =
              log_beta_binomial_marginal(S + s, F + f, a0, b0) - log_beta_binomial_marginal(S, F, a0, b0);
          CHECK(log_predictive(s, f, S, F, a0, b0) == doctest::Approx(ratio).epsilon(1e-12));
          CHECK(table.log_predictive(s, f, S, F) == doctest::Approx(ratio).epsilon(1e-12));
        }
  CHECK(table.log_marginal(4, 6) == doctest::Approx(log_beta_binomial_marginal(4, 6, a0, b0)).epsilon(1e-12));
}

TEST_CASE("marginal is symmetric under swapping ones and zeros with the prior") {
  CHECK(log_beta_binomial_marginal(7, 3, 0.5, 2.0) ==
        doctest::Approx(log_beta_binomial_marginal(3, 7, 2.0, 0.5)).epsilon(1e-13));
}

TEST_CASE("rising factorial") {
  CHECK(log_rising_factorial(1.0, 4) == doctest::Approx(std::log(24.0)));
  CHECK(log_rising_factorial(0.5, 0) == 0.0);
  CHECK(log_rising_factorial(2.5, 2) == doctest::Approx(std::log(2.5 * 3.5)));
}

TEST_CASE("MFM coefficient closed forms") {
  const auto v1 = build_mfm_coefficients(1, 1.0, 1.0, std::nullopt);
  CHECK(v1.log_V(1) == doctest::Approx(0.0).epsilon(1e-12));
  const auto v2 = build_mfm_coefficients(2, 1.0, 1.0, std::nullopt);
  const double e = std::exp(1.0);
  CHECK(std::exp(v2.log_V(1)) == doctest::Approx((e - 2.0) / (e - 1.0)).epsilon(1e-12));
  const auto v5 = build_mfm_coefficients(5, 1.0, 1.0, 1);
  CHECK(std::exp(v5.log_V(1)) == doctest::Approx(1.0 / 120.0).epsilon(1e-12));
  CHECK(v5.log_V(2) == -std::numeric_limits<double>::infinity());
  CHECK(v5.log_V(0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("partition prior matches the term-by-term oracle and sums to one") {
  for (int n = 1; n <= 7; ++n)
    for (std::optional<int> k_max : {std::optional<int>(1), std::optional<int>(2), std::optional<int>(3),
                                     std::optional<int>()})
      for (double gamma : {0.5, 1.0, 3.0})
        for (double alpha : {0.3, 1.0}) {
          const auto coeffs = build_mfm_coefficients(n, gamma, alpha, k_max);
          double total = 0.0;
          for (const auto& labels : oracle::set_partitions(n)) {
            const double want = oracle::partition_prior(labels, gamma, alpha, k_max);
            if (want == 0.0) {
              CHECK_THROWS_AS(log_partition_prior(Partition{labels}, coeffs), BlockCountExceedsSupport);
              continue;
            }
            const double lp = log_partition_prior(Partition{labels}, coeffs);
            CHECK(std::exp(lp) == doctest::Approx(want).epsilon(1e-10));
            total += std::exp(lp);
          }
          CHECK(std::abs(total - 1.0) < 1e-8);
        }
}

TEST_CASE("cache returns shared immutable tables") {
  MfmCache cache;
  const auto a = cache.get(10, 1.0, 1.0, 3);
  const auto b = cache.get(10, 1.0, 1.0, 3);
  const auto c = cache.get(10, 1.0, 1.0, std::nullopt);
  CHECK(a.get() == b.get());
  CHECK(a.get() != c.get());
  CHECK(cache.size() == 2);
}

TEST_CASE("predictive and marginal spot values") {
  CHECK(log_predictive(1, 0, 0, 0, 1, 1) == doctest::Approx(std::log(0.5)));
  CHECK(log_predictive(1, 0, 9, 0, 1, 1) == doctest::Approx(std::log(10.0 / 11.0)));
  const double a = 0.01, b = 0.01;
  const double lg = std::lgamma(a + 3) + std::lgamma(b + 1) - std::lgamma(a + b + 4) - std::lgamma(a) - std::lgamma(b) +
                    std::lgamma(a + b);
  CHECK(log_beta_binomial_marginal(3, 1, a, b) == doctest::Approx(lg).epsilon(1e-12));
  CHECK(log_predictive(2, 1, 3, 4, a, b) ==
        doctest::Approx(log_beta_binomial_marginal(5, 5, a, b) - log_beta_binomial_marginal(3, 4, a, b)).epsilon(1e-12));
}

TEST_CASE("partition prior edge cases") {
  const auto one = build_mfm_coefficients(1, 1.0, 1.0, std::nullopt);
  CHECK(log_partition_prior(Partition{{0}}, one) == doctest::Approx(one.log_V(1)));
  const auto capped = build_mfm_coefficients(3, 1.0, 1.0, 1);
  CHECK_THROWS_AS(log_partition_prior(Partition{{0, 1, 0}}, capped), BlockCountExceedsSupport);
}
