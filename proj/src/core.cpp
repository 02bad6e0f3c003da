#include "acbm/core.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace acbm {

NonBinaryEntry::NonBinaryEntry(std::size_t r, std::size_t c)
    : AcbmError("non-binary entry at row " + std::to_string(r) + ", column " +
                std::to_string(c)),
      row(r),
      col(c) {}

RaggedRows::RaggedRows(std::size_t row)
    : AcbmError("row " + std::to_string(row) + " has a different length than row 0") {}

ResponseMatrix::ResponseMatrix(std::size_t n_examinees, std::size_t n_questions,
                               std::vector<std::uint8_t> entries,
                               std::vector<std::string> question_labels,
                               std::vector<std::string> examinee_labels)
    : n_(n_examinees),
      d_(n_questions),
      entries_(std::move(entries)),
      question_labels_(std::move(question_labels)),
      examinee_labels_(std::move(examinee_labels)) {
  if (n_ == 0 || d_ == 0) throw EmptyMatrix();
  if (entries_.size() != n_ * d_)
    throw AcbmError("entry count does not match n x D");
  for (std::size_t k = 0; k < entries_.size(); ++k)
    if (entries_[k] > 1) throw NonBinaryEntry(k / d_, k % d_);
  if (!question_labels_.empty() && question_labels_.size() != d_)
    throw AcbmError("question label count does not match D");
  if (!examinee_labels_.empty() && examinee_labels_.size() != n_)
    throw AcbmError("examinee label count does not match n");
}

int ResponseMatrix::column_sum(std::size_t j) const {
  int s = 0;
  for (std::size_t i = 0; i < n_; ++i) s += entries_[i * d_ + j];
  return s;
}

ResponseMatrix validate_matrix(const std::vector<std::vector<int>>& raw) {
  if (raw.empty() || raw.front().empty()) throw EmptyMatrix();
  const std::size_t d = raw.front().size();
  std::vector<std::uint8_t> entries;
  entries.reserve(raw.size() * d);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].size() != d) throw RaggedRows(i);
    for (std::size_t j = 0; j < d; ++j) {
      const int v = raw[i][j];
      if (v != 0 && v != 1) throw NonBinaryEntry(i, j);
      entries.push_back(static_cast<std::uint8_t>(v));
    }
  }
  return ResponseMatrix(raw.size(), d, std::move(entries));
}

void Hyperparams::validate() const {
  const double values[] = {a0, b0, gamma_row, alpha_row, gamma_col, alpha_col};
  for (double v : values)
    if (!(v > 0.0) || !std::isfinite(v))
      throw InvalidHyperparams("hyperparameters must be positive and finite");
}

int Partition::n_blocks() const {
  if (labels.empty()) return 0;
  std::vector<int> seen(labels);
  std::sort(seen.begin(), seen.end());
  return static_cast<int>(std::unique(seen.begin(), seen.end()) - seen.begin());
}

std::vector<int> Partition::block_sizes() const {
  const auto canon = canonical_labels(labels);
  std::vector<int> sizes;
  for (int l : canon) {
    if (l >= static_cast<int>(sizes.size())) sizes.resize(l + 1, 0);
    ++sizes[l];
  }
  return sizes;
}

bool Partition::is_canonical() const {
  int next = 0;
  for (int l : labels) {
    if (l > next || l < 0) return false;
    if (l == next) ++next;
  }
  return true;
}

std::vector<int> canonical_labels(std::span<const int> labels) {
  std::unordered_map<int, int> remap;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    auto [it, inserted] = remap.try_emplace(l, static_cast<int>(remap.size()));
    out.push_back(it->second);
  }
  return out;
}

Partition canonicalize(const Partition& p) { return Partition{canonical_labels(p.labels)}; }

bool same_partition(const Partition& a, const Partition& b) {
  return a.size() == b.size() && canonical_labels(a.labels) == canonical_labels(b.labels);
}

void check_row_partition(const RowPartition& rows, std::size_t n, int cluster_size) {
  if (rows.size() != n)
    throw PartitionShapeMismatch("row partition has " + std::to_string(rows.size()) +
                                 " items, expected " + std::to_string(n));
  const int k = rows.n_blocks();
  if (k > kmax_bound(cluster_size))
    throw PartitionShapeMismatch("row partition has " + std::to_string(k) +
                                 " blocks but a cluster of size " +
                                 std::to_string(cluster_size) + " admits at most " +
                                 std::to_string(kmax_bound(cluster_size)));
}

int ClusterState::free_block_slot() {
  for (std::size_t k = 0; k < blocks.size(); ++k)
    if (blocks[k].members == 0) return static_cast<int>(k);
  blocks.emplace_back();
  return static_cast<int>(blocks.size()) - 1;
}

int ModelState::free_cluster_slot() {
  for (std::size_t c = 0; c < clusters.size(); ++c)
    if (clusters[c].empty()) return static_cast<int>(c);
  clusters.emplace_back();
  return static_cast<int>(clusters.size()) - 1;
}

std::vector<int> ModelState::ordered_clusters() const {
  std::vector<int> order;
  std::vector<char> seen(clusters.size(), 0);
  for (int c : column_cluster) {
    if (!seen[c]) {
      seen[c] = 1;
      order.push_back(c);
    }
  }
  return order;
}

ColumnPartition ModelState::column_partition() const {
  return Partition{canonical_labels(column_cluster)};
}

RowPartition ModelState::row_partition(int slot) const {
  return Partition{canonical_labels(clusters.at(slot).row_block)};
}

namespace {

void fill_cluster(const ResponseMatrix& X, ClusterState& cl) {
  const std::size_t n = X.n_examinees();
  cl.row_ones.assign(n, 0);
  for (auto& b : cl.blocks) b = BlockSuffStats{};
  for (std::size_t i = 0; i < n; ++i) {
    int ones = 0;
    for (int j : cl.columns) ones += X(i, j);
    cl.row_ones[i] = ones;
    const int k = cl.row_block[i];
    if (k < 0) throw PartitionShapeMismatch("negative block label");
    if (k >= static_cast<int>(cl.blocks.size())) cl.blocks.resize(k + 1);
    auto& b = cl.blocks[k];
    b.successes += ones;
    b.failures += cl.size() - ones;
    b.members += 1;
  }
  cl.n_blocks = static_cast<int>(
      std::count_if(cl.blocks.begin(), cl.blocks.end(), [](const auto& b) { return b.members > 0; }));
}

}  // namespace

ModelState make_state(const ResponseMatrix& X, const ColumnPartition& columns,
                      const std::vector<RowPartition>& rows) {
  const std::size_t d = X.n_questions();
  const std::size_t n = X.n_examinees();
  if (columns.size() != d)
    throw PartitionShapeMismatch("column partition has " + std::to_string(columns.size()) +
                                 " items, expected " + std::to_string(d));
  const auto canon = canonical_labels(columns.labels);
  const int k = canon.empty() ? 0 : *std::max_element(canon.begin(), canon.end()) + 1;
  if (static_cast<int>(rows.size()) != k)
    throw PartitionShapeMismatch("expected one row partition per column cluster");

  ModelState state;
  state.column_cluster = canon;
  state.clusters.resize(k);
  state.n_clusters = k;
  for (std::size_t j = 0; j < d; ++j) state.clusters[canon[j]].columns.push_back(static_cast<int>(j));
  for (int c = 0; c < k; ++c) {
    auto& cl = state.clusters[c];
    check_row_partition(rows[c], n, cl.size());
    cl.row_block = canonical_labels(rows[c].labels);
    fill_cluster(X, cl);
  }
  return state;
}

ModelState singleton_state(const ResponseMatrix& X) {
  const std::size_t d = X.n_questions();
  ColumnPartition cols;
  cols.labels.resize(d);
  for (std::size_t j = 0; j < d; ++j) cols.labels[j] = static_cast<int>(j);
  std::vector<RowPartition> rows(d, RowPartition{std::vector<int>(X.n_examinees(), 0)});
  return make_state(X, cols, rows);
}

ModelState recompute_suffstats(const ResponseMatrix& X, const ModelState& state) {
  if (state.column_cluster.size() != X.n_questions())
    throw PartitionShapeMismatch("column assignment length does not match D");
  ModelState out = state;
  for (auto& cl : out.clusters) cl.columns.clear();
  for (std::size_t j = 0; j < out.column_cluster.size(); ++j) {
    const int c = out.column_cluster[j];
    if (c < 0 || c >= static_cast<int>(out.clusters.size()))
      throw PartitionShapeMismatch("column assigned to a missing cluster");
    out.clusters[c].columns.push_back(static_cast<int>(j));
  }
  int occupied = 0;
  for (auto& cl : out.clusters) {
    if (cl.empty()) {
      cl = ClusterState{};
      continue;
    }
    ++occupied;
    if (cl.row_block.size() != X.n_examinees())
      throw PartitionShapeMismatch("row assignment length does not match n");
    check_row_partition(Partition{cl.row_block}, X.n_examinees(), cl.size());
    fill_cluster(X, cl);
  }
  out.n_clusters = occupied;
  return out;
}

bool verify_suffstats(const ResponseMatrix& X, const ModelState& state) {
  const ModelState fresh = recompute_suffstats(X, state);
  if (fresh.n_clusters != state.n_clusters) return false;
  for (std::size_t c = 0; c < state.clusters.size(); ++c) {
    const auto& a = state.clusters[c];
    const auto& b = fresh.clusters[c];
    if (a.empty() != b.empty()) return false;
    if (a.empty()) continue;
    auto sorted_cols = a.columns;
    std::sort(sorted_cols.begin(), sorted_cols.end());
    if (sorted_cols != b.columns || a.row_ones != b.row_ones || a.n_blocks != b.n_blocks)
      return false;
    const std::size_t slots = std::max(a.blocks.size(), b.blocks.size());
    for (std::size_t k = 0; k < slots; ++k) {
      const BlockSuffStats sa = k < a.blocks.size() ? a.blocks[k] : BlockSuffStats{};
      const BlockSuffStats sb = k < b.blocks.size() ? b.blocks[k] : BlockSuffStats{};
      if (!(sa == sb)) return false;
    }
  }
  return true;
}

int count_bound_violations(const ModelState& state) {
  int violations = 0;
  for (const auto& cl : state.clusters)
    if (!cl.empty() && cl.n_blocks > kmax_bound(cl.size())) ++violations;
  return violations;
}

}  // namespace acbm
