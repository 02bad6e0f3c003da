#pragma once

#include <optional>
#include <span>
#include <vector>

#include "acbm/core.hpp"
#include "acbm/summarize.hpp"

namespace acbm {

class LengthMismatch : public AcbmError {
 public:
  LengthMismatch() : AcbmError("partitions cover different numbers of items") {}
};

class SingleItem : public AcbmError {
 public:
  SingleItem() : AcbmError("Rand index needs at least two items") {}
};

struct TrueCluster {
  std::vector<double> weights;
  std::vector<double> accuracies;
  int K() const { return static_cast<int>(weights.size()); }
};

// Known generating configuration. clusters, row_labels and accuracy are
// indexed by the canonical id of col_partition; row_labels and accuracy may
// be empty when unknown.
struct GroundTruth {
  std::size_t n = 0;
  std::size_t D = 0;
  ColumnPartition col_partition;
  std::vector<TrueCluster> clusters;
  std::vector<std::vector<int>> row_labels;
  std::vector<double> accuracy;  // n x D row-major

  bool has_row_labels() const { return !row_labels.empty(); }
  bool has_accuracy() const { return !accuracy.empty(); }
  // Checks shapes, weight normalization and accuracy range; with
  // `require_bound` also K <= kmax_bound(|c|) and distinct accuracies.
  void validate(bool require_bound) const;
};

double rand_index(const Partition& p, const Partition& q);

// Minimum over injective maps sigma of sum_i cost[i][sigma(i)], for a
// rows x cols matrix with rows <= cols. Exhaustive up to 8 columns,
// Hungarian algorithm above.
double min_assignment_cost(const std::vector<std::vector<double>>& cost);

double cwri(const FitSummary& fit, const GroundTruth& truth);
double adk(const FitSummary& fit, const GroundTruth& truth);
double adw(const FitSummary& fit, const GroundTruth& truth);
double adp(const FitSummary& fit, const GroundTruth& truth);
double arwri(const FitSummary& fit, const GroundTruth& truth);
// Mean absolute entry-wise difference of two n x D accuracy matrices.
double d1(std::span<const double> estimate, std::span<const double> truth);

struct MetricRow {
  std::optional<double> cwri, adk, adw, adp, arwri, d1_acbm, d1_rasch;
};

// Every metric the available inputs support.
MetricRow evaluate_fit(const FitSummary& fit, const GroundTruth& truth,
                       const std::vector<double>* rasch_accuracy = nullptr);

}  // namespace acbm
