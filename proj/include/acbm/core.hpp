#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace acbm {

// Errors raised by the data model. All derive from std::runtime_error so
// callers that only care about "something was malformed" can catch once.
class AcbmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonBinaryEntry : public AcbmError {
 public:
  NonBinaryEntry(std::size_t row, std::size_t col);
  std::size_t row;
  std::size_t col;
};

class EmptyMatrix : public AcbmError {
 public:
  EmptyMatrix() : AcbmError("response matrix is empty") {}
};

class RaggedRows : public AcbmError {
 public:
  explicit RaggedRows(std::size_t row);
};

class PartitionShapeMismatch : public AcbmError {
 public:
  using AcbmError::AcbmError;
};

class InvalidHyperparams : public AcbmError {
 public:
  using AcbmError::AcbmError;
};

// n x D binary matrix, row-major. Rows are examinees, columns are questions.
class ResponseMatrix {
 public:
  ResponseMatrix() = default;
  ResponseMatrix(std::size_t n_examinees, std::size_t n_questions,
                 std::vector<std::uint8_t> entries,
                 std::vector<std::string> question_labels = {},
                 std::vector<std::string> examinee_labels = {});

  std::size_t n_examinees() const { return n_; }
  std::size_t n_questions() const { return d_; }
  int operator()(std::size_t i, std::size_t j) const { return entries_[i * d_ + j]; }
  std::span<const std::uint8_t> row(std::size_t i) const {
    return {entries_.data() + i * d_, d_};
  }
  const std::vector<std::uint8_t>& entries() const { return entries_; }
  const std::vector<std::string>& question_labels() const { return question_labels_; }
  const std::vector<std::string>& examinee_labels() const { return examinee_labels_; }

  // Number of ones in column j.
  int column_sum(std::size_t j) const;

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<std::uint8_t> entries_;
  std::vector<std::string> question_labels_;
  std::vector<std::string> examinee_labels_;
};

// Builds a ResponseMatrix from a generic table, rejecting anything that is
// not exactly 0 or 1.
ResponseMatrix validate_matrix(const std::vector<std::vector<int>>& raw);

struct Hyperparams {
  double a0 = 0.01;
  double b0 = 0.01;
  double gamma_row = 1.0;
  double alpha_row = 1.0;
  double gamma_col = 1.0;
  double alpha_col = 1.0;

  void validate() const;
};

// Largest admissible number of examinee mixtures for a question cluster of
// the given size: floor((size + 1) / 2).
constexpr int kmax_bound(int cluster_size) { return (cluster_size + 1) / 2; }

// Set partition stored as one label per item. Canonical form numbers blocks
// 0, 1, 2, ... in order of first appearance.
struct Partition {
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  int n_blocks() const;
  std::vector<int> block_sizes() const;
  bool is_canonical() const;
  bool operator==(const Partition&) const = default;
};

Partition canonicalize(const Partition& p);
std::vector<int> canonical_labels(std::span<const int> labels);
bool same_partition(const Partition& a, const Partition& b);

using ColumnPartition = Partition;
using RowPartition = Partition;

// Throws PartitionShapeMismatch unless `rows` has n items and at most
// kmax_bound(cluster_size) blocks.
void check_row_partition(const RowPartition& rows, std::size_t n, int cluster_size);

struct BlockSuffStats {
  long successes = 0;
  long failures = 0;
  long members = 0;
  bool operator==(const BlockSuffStats&) const = default;
};

// One question cluster inside a ModelState. Block slots with members == 0 are
// free and may be reused; n_blocks counts the occupied ones.
struct ClusterState {
  std::vector<int> columns;
  std::vector<int> row_block;  // length n, slot index per examinee
  std::vector<int> row_ones;   // length n, successes of examinee i within the cluster
  std::vector<BlockSuffStats> blocks;
  int n_blocks = 0;

  int size() const { return static_cast<int>(columns.size()); }
  bool empty() const { return columns.empty(); }
  int free_block_slot();
};

// Column partition, per-cluster row partitions and their cached sufficient
// statistics. Cluster slots whose column list is empty are free.
struct ModelState {
  std::vector<int> column_cluster;  // length D, cluster slot per column
  std::vector<ClusterState> clusters;
  int n_clusters = 0;

  int free_cluster_slot();
  // Occupied cluster slots in canonical order (first appearance over columns).
  std::vector<int> ordered_clusters() const;
  ColumnPartition column_partition() const;
  // Canonical row partition of the given cluster slot.
  RowPartition row_partition(int slot) const;
};

// Builds a state from a column partition and one row partition per column
// cluster (indexed by canonical column cluster id). Sufficient statistics are
// computed from X.
ModelState make_state(const ResponseMatrix& X, const ColumnPartition& columns,
                      const std::vector<RowPartition>& rows);

// Every column its own cluster, every cluster a single row block.
ModelState singleton_state(const ResponseMatrix& X);

// Recomputes every cached statistic from X and the partitions held in
// `state`. Throws PartitionShapeMismatch when a row partition violates the
// identifiability bound or dimensions disagree.
ModelState recompute_suffstats(const ResponseMatrix& X, const ModelState& state);

// True when the cached statistics equal a from-scratch recomputation.
bool verify_suffstats(const ResponseMatrix& X, const ModelState& state);

// Number of clusters whose block count exceeds kmax_bound(size).
int count_bound_violations(const ModelState& state);

}  // namespace acbm
