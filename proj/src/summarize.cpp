#include "acbm/summarize.hpp"

namespace acbm {

void CoclusteringMatrix::add(std::span<const int> labels) {
  if (labels.size() != dim_) throw PartitionShapeMismatch("label vector has the wrong length");
  for (std::size_t i = 0; i < dim_; ++i) {
    values_[i * dim_ + i] += 1.0;
    for (std::size_t j = i + 1; j < dim_; ++j) {
      if (labels[i] == labels[j]) {
        values_[i * dim_ + j] += 1.0;
        values_[j * dim_ + i] += 1.0;
      }
    }
  }
  ++count_;
}

void CoclusteringMatrix::finalize() {
  if (count_ == 0) return;
  const double inv = 1.0 / static_cast<double>(count_);
  for (auto& v : values_) v *= inv;
  count_ = 1;
}

double CoclusteringMatrix::squared_loss(std::span<const int> labels) const {
  double loss = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double d_ii = 1.0 - values_[i * dim_ + i];
    loss += d_ii * d_ii;
    for (std::size_t j = i + 1; j < dim_; ++j) {
      const double diff = (labels[i] == labels[j] ? 1.0 : 0.0) - values_[i * dim_ + j];
      loss += 2.0 * diff * diff;
    }
  }
  return loss;
}

ColumnEstimate dahl_column_estimate(const ChainTrace& trace) {
  if (trace.states.empty()) throw EmptyTrace();
  const std::size_t d = trace.states.front().col_assign.size();
  CoclusteringMatrix pi(d);
  for (const auto& s : trace.states) pi.add(s.col_assign);
  pi.finalize();

  ColumnEstimate best;
  double best_loss = 0.0;
  for (std::size_t l = 0; l < trace.states.size(); ++l) {
    const double loss = pi.squared_loss(trace.states[l].col_assign);
    if (l == 0 || loss < best_loss) {
      best_loss = loss;
      best.index = l;
    }
  }
  best.partition = Partition{canonical_labels(trace.states[best.index].col_assign)};
  return best;
}

RowEstimate dahl_row_estimate(const ChainTrace& trace, const ColumnPartition& columns) {
  if (trace.states.empty()) throw EmptyTrace();
  const auto target = canonical_labels(columns.labels);
  std::vector<std::size_t> matching;
  for (std::size_t l = 0; l < trace.states.size(); ++l)
    if (canonical_labels(trace.states[l].col_assign) == target) matching.push_back(l);
  if (matching.empty()) throw NoMatchingState();

  const auto sizes = Partition{target}.block_sizes();
  const std::size_t n = trace.states[matching.front()].row_assign.front().size();

  // Every column of a cluster carries the cluster's row partition, so the
  // loss summed over columns is the per-cluster loss weighted by size.
  std::vector<double> total(matching.size(), 0.0);
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    CoclusteringMatrix pi(n);
    for (std::size_t l : matching) pi.add(trace.states[l].row_assign[c]);
    pi.finalize();
    for (std::size_t m = 0; m < matching.size(); ++m)
      total[m] += static_cast<double>(sizes[c]) * pi.squared_loss(trace.states[matching[m]].row_assign[c]);
  }

  std::size_t best = 0;
  for (std::size_t m = 1; m < matching.size(); ++m)
    if (total[m] < total[best]) best = m;

  RowEstimate out;
  out.index = matching[best];
  for (const auto& labels : trace.states[out.index].row_assign)
    out.partitions.push_back(Partition{canonical_labels(labels)});
  return out;
}

FitSummary posterior_accuracy(const ResponseMatrix& X, const ColumnPartition& columns,
                              const std::vector<RowPartition>& rows, const Hyperparams& h) {
  const ModelState state = make_state(X, columns, rows);
  FitSummary out;
  out.n = X.n_examinees();
  out.D = X.n_questions();
  out.col_partition = Partition{state.column_cluster};
  const double n = static_cast<double>(out.n);

  for (int slot = 0; slot < state.n_clusters; ++slot) {
    const auto& cl = state.clusters[slot];
    ClusterSummary cs;
    cs.columns = cl.columns;
    cs.K = cl.n_blocks;
    for (const auto& b : cl.blocks) {
      const double s = static_cast<double>(b.successes);
      const double f = static_cast<double>(b.failures);
      cs.theta.push_back((h.a0 + s) / (h.a0 + h.b0 + s + f));
      cs.weight.push_back((static_cast<double>(b.members) + h.alpha_row) / (n + cs.K * h.alpha_row));
      cs.members.push_back(b.members);
    }
    out.row_partitions.push_back(Partition{cl.row_block});
    out.clusters.push_back(std::move(cs));
  }

  out.accuracy.assign(out.n * out.D, 0.0);
  for (std::size_t j = 0; j < out.D; ++j) {
    const int c = out.col_partition.labels[j];
    const auto& blocks = out.row_partitions[c].labels;
    for (std::size_t i = 0; i < out.n; ++i) out.accuracy[i * out.D + j] = out.clusters[c].theta[blocks[i]];
  }
  return out;
}

FitSummary summarize(const ResponseMatrix& X, const ChainTrace& trace, const Hyperparams& h) {
  const auto col = dahl_column_estimate(trace);
  const auto row = dahl_row_estimate(trace, col.partition);
  FitSummary out = posterior_accuracy(X, col.partition, row.partitions, h);
  out.column_state_index = col.index;
  out.row_state_index = row.index;
  return out;
}

}  // namespace acbm
