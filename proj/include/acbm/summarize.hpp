#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "acbm/core.hpp"
#include "acbm/sampler.hpp"

namespace acbm {

class EmptyTrace : public AcbmError {
 public:
  EmptyTrace() : AcbmError("trace holds no kept states") {}
};

class NoMatchingState : public AcbmError {
 public:
  NoMatchingState() : AcbmError("no kept state has the requested column partition") {}
};

// Pairwise co-assignment frequencies over a set of label vectors.
class CoclusteringMatrix {
 public:
  explicit CoclusteringMatrix(std::size_t dim) : dim_(dim), values_(dim * dim, 0.0) {}

  void add(std::span<const int> labels);
  // Divides accumulated counts by the number of added partitions.
  void finalize();

  std::size_t dim() const { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * dim_ + j]; }

  // sum over all ordered pairs (i, j) of (1{labels_i == labels_j} - pi_ij)^2.
  double squared_loss(std::span<const int> labels) const;

 private:
  std::size_t dim_;
  std::size_t count_ = 0;
  std::vector<double> values_;
};

struct ColumnEstimate {
  ColumnPartition partition;
  std::size_t index = 0;  // position in trace.states
};

struct RowEstimate {
  std::vector<RowPartition> partitions;  // one per cluster of the column estimate
  std::size_t index = 0;
};

ColumnEstimate dahl_column_estimate(const ChainTrace& trace);
RowEstimate dahl_row_estimate(const ChainTrace& trace, const ColumnPartition& columns);

struct ClusterSummary {
  std::vector<int> columns;
  int K = 0;
  std::vector<double> theta;   // posterior-mean accuracy per block
  std::vector<double> weight;  // Dirichlet posterior-mean weight per block
  std::vector<long> members;

  int size() const { return static_cast<int>(columns.size()); }
};

struct FitSummary {
  std::size_t n = 0;
  std::size_t D = 0;
  ColumnPartition col_partition;
  std::vector<RowPartition> row_partitions;  // per column cluster
  std::vector<ClusterSummary> clusters;
  std::vector<double> accuracy;  // n x D row-major
  std::size_t column_state_index = 0;
  std::size_t row_state_index = 0;

  double accuracy_at(std::size_t i, std::size_t j) const { return accuracy[i * D + j]; }
  const RowPartition& row_partition_of_column(std::size_t j) const {
    return row_partitions[col_partition.labels[j]];
  }
};

FitSummary posterior_accuracy(const ResponseMatrix& X, const ColumnPartition& columns,
                              const std::vector<RowPartition>& rows, const Hyperparams& h);

// Dahl column estimate, then row estimate, then posterior means.
FitSummary summarize(const ResponseMatrix& X, const ChainTrace& trace, const Hyperparams& h);

}  // namespace acbm
