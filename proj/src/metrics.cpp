#include "acbm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace acbm {

namespace {

double pairs(long k) { return 0.5 * static_cast<double>(k) * static_cast<double>(k - 1); }

double exhaustive_assignment(const std::vector<std::vector<double>>& cost, std::size_t cols) {
  std::vector<int> perm(cols);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < cost.size(); ++i) total += cost[i][perm[i]];
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Shortest augmenting path Hungarian algorithm for rows <= cols.
double hungarian(const std::vector<std::vector<double>>& cost, std::size_t cols) {
  const std::size_t rows = cost.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<std::size_t> match(cols + 1, 0), way(cols + 1, 0);
  for (std::size_t i = 1; i <= rows; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(cols + 1, inf);
    std::vector<char> used(cols + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= cols; ++j)
    if (match[j] != 0) total += cost[match[j] - 1][j - 1];
  return total;
}

// Estimated cluster whose column set equals true cluster c, if any.
std::optional<int> matching_fit_cluster(const FitSummary& fit, const GroundTruth& truth, int c) {
  std::vector<int> truth_cols;
  for (std::size_t j = 0; j < truth.D; ++j)
    if (truth.col_partition.labels[j] == c) truth_cols.push_back(static_cast<int>(j));
  const int candidate = fit.col_partition.labels[truth_cols.front()];
  auto fit_cols = fit.clusters[candidate].columns;
  std::sort(fit_cols.begin(), fit_cols.end());
  if (fit_cols != truth_cols) return std::nullopt;
  return candidate;
}

std::vector<std::vector<double>> padded_cost(std::span<const double> truth, std::span<const double> est,
                                             bool squared) {
  const std::size_t cols = std::max(truth.size(), est.size());
  std::vector<std::vector<double>> cost(truth.size(), std::vector<double>(cols));
  for (std::size_t i = 0; i < truth.size(); ++i)
    for (std::size_t k = 0; k < cols; ++k) {
      const double e = k < est.size() ? est[k] : 0.0;
      const double diff = e - truth[i];
      cost[i][k] = squared ? diff * diff : std::abs(diff);
    }
  return cost;
}

}  // namespace

void GroundTruth::validate(bool require_bound) const {
  if (col_partition.size() != D) throw AcbmError("truth column partition has the wrong length");
  const auto sizes = col_partition.block_sizes();
  if (clusters.size() != sizes.size()) throw AcbmError("truth needs one mixture spec per column cluster");
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const auto& tc = clusters[c];
    if (tc.weights.empty() || tc.weights.size() != tc.accuracies.size())
      throw AcbmError("truth cluster weights and accuracies must be nonempty and of equal length");
    const double total = std::accumulate(tc.weights.begin(), tc.weights.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9) throw AcbmError("truth weights must sum to 1");
    for (double w : tc.weights)
      if (!(w >= 0.0) || (require_bound && !(w > 0.0))) throw AcbmError("truth weights must be positive");
    for (double a : tc.accuracies)
      if (!(a >= 0.0 && a <= 1.0)) throw AcbmError("truth accuracies must lie in [0, 1]");
    if (require_bound) {
      if (tc.K() > kmax_bound(sizes[c])) throw AcbmError("truth cluster exceeds the component bound");
      std::set<double> distinct(tc.accuracies.begin(), tc.accuracies.end());
      if (distinct.size() != tc.accuracies.size()) throw AcbmError("truth accuracies must be distinct");
      for (double a : tc.accuracies)
        if (!(a > 0.0 && a < 1.0)) throw AcbmError("truth accuracies must lie strictly inside (0, 1)");
    }
  }
  if (has_row_labels()) {
    if (row_labels.size() != clusters.size()) throw AcbmError("truth needs row labels per column cluster");
    for (const auto& r : row_labels)
      if (r.size() != n) throw AcbmError("truth row labels have the wrong length");
  }
  if (has_accuracy() && accuracy.size() != n * D) throw AcbmError("truth accuracy matrix has the wrong shape");
}

double rand_index(const Partition& p, const Partition& q) {
  if (p.size() != q.size()) throw LengthMismatch();
  const std::size_t n = p.size();
  if (n < 2) throw SingleItem();
  std::map<std::pair<int, int>, long> joint;
  std::map<int, long> left, right;
  for (std::size_t i = 0; i < n; ++i) {
    ++joint[{p.labels[i], q.labels[i]}];
    ++left[p.labels[i]];
    ++right[q.labels[i]];
  }
  double both = 0.0, in_p = 0.0, in_q = 0.0;
  for (const auto& [k, v] : joint) both += pairs(v);
  for (const auto& [k, v] : left) in_p += pairs(v);
  for (const auto& [k, v] : right) in_q += pairs(v);
  const double total = pairs(static_cast<long>(n));
  return (total - in_p - in_q + 2.0 * both) / total;
}

double min_assignment_cost(const std::vector<std::vector<double>>& cost) {
  if (cost.empty()) return 0.0;
  const std::size_t cols = cost.front().size();
  if (cols < cost.size()) throw AcbmError("assignment needs at least as many columns as rows");
  if (cols <= 8) return exhaustive_assignment(cost, cols);
  return hungarian(cost, cols);
}

double cwri(const FitSummary& fit, const GroundTruth& truth) {
  return rand_index(fit.col_partition, truth.col_partition);
}

double adk(const FitSummary& fit, const GroundTruth& truth) {
  if (fit.D != truth.D) throw LengthMismatch();
  double total = 0.0;
  for (std::size_t d = 0; d < truth.D; ++d) {
    const int k_hat = fit.clusters[fit.col_partition.labels[d]].K;
    const int k_true = truth.clusters[truth.col_partition.labels[d]].K();
    total += std::abs(k_hat - k_true);
  }
  return total / static_cast<double>(truth.D);
}

double adw(const FitSummary& fit, const GroundTruth& truth) {
  if (rand_index(fit.col_partition, truth.col_partition) != 1.0) return 2.0;
  double total = 0.0;
  for (std::size_t c = 0; c < truth.clusters.size(); ++c) {
    const auto& tc = truth.clusters[c];
    const auto& fc = fit.clusters[*matching_fit_cluster(fit, truth, static_cast<int>(c))];
    total += min_assignment_cost(padded_cost(tc.weights, fc.weight, false)) / tc.K();
  }
  return total / static_cast<double>(truth.clusters.size());
}

double adp(const FitSummary& fit, const GroundTruth& truth) {
  double total = 0.0;
  for (std::size_t c = 0; c < truth.clusters.size(); ++c) {
    const auto& tc = truth.clusters[c];
    const auto match = matching_fit_cluster(fit, truth, static_cast<int>(c));
    if (!match || fit.clusters[*match].K < tc.K()) {
      total += 1.0;
      continue;
    }
    const auto& fc = fit.clusters[*match];
    total += std::sqrt(min_assignment_cost(padded_cost(tc.accuracies, fc.theta, true)) / tc.K());
  }
  return total / static_cast<double>(truth.clusters.size());
}

double arwri(const FitSummary& fit, const GroundTruth& truth) {
  if (!truth.has_row_labels()) throw AcbmError("ARWRI needs true row labels");
  if (fit.D != truth.D) throw LengthMismatch();
  double total = 0.0;
  for (std::size_t d = 0; d < truth.D; ++d) {
    const Partition true_rows{truth.row_labels[truth.col_partition.labels[d]]};
    total += rand_index(fit.row_partition_of_column(d), true_rows);
  }
  return total / static_cast<double>(truth.D);
}

double d1(std::span<const double> estimate, std::span<const double> truth) {
  if (estimate.size() != truth.size()) throw LengthMismatch();
  if (estimate.empty()) throw AcbmError("D1 needs a nonempty matrix");
  double total = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) total += std::abs(estimate[k] - truth[k]);
  return total / static_cast<double>(truth.size());
}

MetricRow evaluate_fit(const FitSummary& fit, const GroundTruth& truth,
                       const std::vector<double>* rasch_accuracy) {
  MetricRow row;
  row.cwri = cwri(fit, truth);
  if (!truth.clusters.empty()) {
    row.adk = adk(fit, truth);
    row.adw = adw(fit, truth);
    row.adp = adp(fit, truth);
  }
  if (truth.has_row_labels()) row.arwri = arwri(fit, truth);
  if (truth.has_accuracy()) {
    row.d1_acbm = d1(fit.accuracy, truth.accuracy);
    if (rasch_accuracy) row.d1_rasch = d1(*rasch_accuracy, truth.accuracy);
  }
  return row;
}

}  // namespace acbm
