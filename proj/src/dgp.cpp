#include "acbm/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "acbm/rng.hpp"

namespace acbm {

namespace {

constexpr std::uint64_t kDataStream = 1;

MixtureCluster mixture(int size, std::vector<double> w, std::vector<double> theta) {
  return MixtureCluster{size, std::move(w), std::move(theta)};
}

AcbmDesign scaled_mixture_design(const std::vector<int>& sizes, std::size_t n, std::uint64_t seed) {
  AcbmDesign d;
  d.n_examinees = n;
  d.seed = seed;
  d.clusters = {
      mixture(sizes[0], {1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.2, 0.5, 0.8}),
      mixture(sizes[1], {0.5, 0.5}, {0.3, 0.9}),
      mixture(sizes[2], {0.4, 0.3, 0.3}, {0.15, 0.55, 0.95}),
      mixture(sizes[3], {1.0}, {0.4}),
      mixture(sizes[4], {1.0}, {0.7}),
  };
  return d;
}

RaschDesign halves_rasch_design(std::size_t d, std::size_t n, std::uint64_t seed) {
  RaschDesign r;
  r.psi.assign(d, 0.5);
  std::fill(r.psi.begin(), r.psi.begin() + static_cast<long>(d / 2), -0.5);
  r.xi_support = {-2.0, 0.0, 2.0};
  r.n_examinees = n;
  r.seed = seed;
  return r;
}

}  // namespace

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::size_t AcbmDesign::n_questions() const {
  std::size_t d = 0;
  for (const auto& c : clusters) d += static_cast<std::size_t>(std::max(c.size, 0));
  return d;
}

void AcbmDesign::validate() const {
  if (n_examinees == 0) throw DesignInvariantViolation("design needs at least one examinee");
  if (clusters.empty()) throw DesignInvariantViolation("design needs at least one cluster");
  for (const auto& c : clusters) {
    if (c.size < 1) throw DesignInvariantViolation("cluster sizes must be positive");
    if (c.weights.empty() || c.weights.size() != c.accuracies.size())
      throw DesignInvariantViolation("each cluster needs matching weight and accuracy lists");
    if (static_cast<int>(c.weights.size()) > kmax_bound(c.size))
      throw DesignInvariantViolation("component count exceeds floor((|c|+1)/2)");
    for (double w : c.weights)
      if (!(w >= 0.0)) throw DesignInvariantViolation("weights must be non-negative");
    if (std::abs(std::accumulate(c.weights.begin(), c.weights.end(), 0.0) - 1.0) > 1e-9)
      throw DesignInvariantViolation("weights must sum to 1");
    for (double a : c.accuracies)
      if (!(a >= 0.0 && a <= 1.0)) throw DesignInvariantViolation("accuracies must lie in [0, 1]");
  }
}

bool AcbmDesign::satisfies_identifiability() const {
  validate();
  for (const auto& c : clusters) {
    std::set<double> distinct(c.accuracies.begin(), c.accuracies.end());
    if (distinct.size() != c.accuracies.size()) return false;
    for (double a : c.accuracies)
      if (!(a > 0.0 && a < 1.0)) return false;
    for (double w : c.weights)
      if (!(w > 0.0)) return false;
  }
  return true;
}

void RaschDesign::validate() const {
  if (n_examinees == 0) throw DesignInvariantViolation("design needs at least one examinee");
  if (psi.empty()) throw DesignInvariantViolation("design needs at least one question");
  if (xi_support.empty()) throw DesignInvariantViolation("ability support is empty");
  for (double v : psi)
    if (!std::isfinite(v)) throw DesignInvariantViolation("difficulties must be finite");
  for (double v : xi_support)
    if (!std::isfinite(v)) throw DesignInvariantViolation("abilities must be finite");
}

SimulatedData generate_acbm(const AcbmDesign& design) {
  design.validate();
  const std::size_t n = design.n_examinees;
  const std::size_t d = design.n_questions();
  Rng rng(design.seed, kDataStream);

  std::vector<std::uint8_t> entries(n * d);
  GroundTruth truth;
  truth.n = n;
  truth.D = d;
  truth.accuracy.assign(n * d, 0.0);
  truth.col_partition.labels.reserve(d);

  std::size_t first = 0;
  for (std::size_t c = 0; c < design.clusters.size(); ++c) {
    const auto& spec = design.clusters[c];
    std::vector<int> component(n);
    for (std::size_t i = 0; i < n; ++i) component[i] = static_cast<int>(rng.categorical(spec.weights));
    for (std::size_t i = 0; i < n; ++i) {
      const double theta = spec.accuracies[component[i]];
      for (int k = 0; k < spec.size; ++k) {
        const std::size_t j = first + static_cast<std::size_t>(k);
        entries[i * d + j] = rng.bernoulli(theta) ? 1 : 0;
        truth.accuracy[i * d + j] = theta;
      }
    }
    for (int k = 0; k < spec.size; ++k) truth.col_partition.labels.push_back(static_cast<int>(c));
    truth.clusters.push_back(TrueCluster{spec.weights, spec.accuracies});
    truth.row_labels.push_back(std::move(component));
    first += static_cast<std::size_t>(spec.size);
  }
  truth.validate(false);
  return {ResponseMatrix(n, d, std::move(entries)), std::move(truth)};
}

SimulatedData generate_rasch(const RaschDesign& design) {
  design.validate();
  const std::size_t n = design.n_examinees;
  const std::size_t d = design.psi.size();
  Rng rng(design.seed, kDataStream);

  std::vector<int> level(n);
  for (auto& l : level) l = static_cast<int>(rng.below(design.xi_support.size()));

  std::vector<std::uint8_t> entries(n * d);
  GroundTruth truth;
  truth.n = n;
  truth.D = d;
  truth.accuracy.resize(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = design.xi_support[level[i]];
    for (std::size_t j = 0; j < d; ++j) {
      const double theta = logistic(xi - design.psi[j]);
      truth.accuracy[i * d + j] = theta;
      entries[i * d + j] = rng.bernoulli(theta) ? 1 : 0;
    }
  }

  // Questions sharing a difficulty form one cluster whose mixture has one
  // component per ability level.
  std::map<double, int> by_psi;
  std::vector<double> cluster_psi;
  truth.col_partition.labels.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    auto [it, inserted] = by_psi.try_emplace(design.psi[j], static_cast<int>(cluster_psi.size()));
    if (inserted) cluster_psi.push_back(design.psi[j]);
    truth.col_partition.labels[j] = it->second;
  }
  const double w = 1.0 / static_cast<double>(design.xi_support.size());
  for (double psi : cluster_psi) {
    TrueCluster tc;
    for (double xi : design.xi_support) {
      tc.weights.push_back(w);
      tc.accuracies.push_back(logistic(xi - psi));
    }
    truth.clusters.push_back(std::move(tc));
    truth.row_labels.push_back(level);
  }
  truth.validate(false);
  return {ResponseMatrix(n, d, std::move(entries)), std::move(truth)};
}

AcbmDesign dgp1_design(std::size_t n, std::uint64_t seed) {
  return scaled_mixture_design({6, 6, 6, 1, 1}, n, seed);
}

AcbmDesign dgp2_design(std::size_t n, std::uint64_t seed) {
  return scaled_mixture_design({20, 20, 18, 1, 1}, n, seed);
}

RaschDesign dgp3_design(std::size_t n, std::uint64_t seed) { return halves_rasch_design(20, n, seed); }
RaschDesign dgp4_design(std::size_t n, std::uint64_t seed) { return halves_rasch_design(60, n, seed); }

bool is_builtin_design(const std::string& name) {
  return name == "dgp1" || name == "dgp2" || name == "dgp3" || name == "dgp4";
}

bool is_rasch_design(const std::string& name) { return name == "dgp3" || name == "dgp4"; }

SimulatedData simulate_builtin(const std::string& name, std::size_t n, std::uint64_t seed) {
  if (name == "dgp1") return generate_acbm(dgp1_design(n, seed));
  if (name == "dgp2") return generate_acbm(dgp2_design(n, seed));
  if (name == "dgp3") return generate_rasch(dgp3_design(n, seed));
  if (name == "dgp4") return generate_rasch(dgp4_design(n, seed));
  throw AcbmError("unknown design '" + name + "'");
}

}  // namespace acbm
