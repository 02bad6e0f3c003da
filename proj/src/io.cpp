#include "acbm/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace acbm::io {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(trim(tok));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw AcbmError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw AcbmError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::string optional_cell(const std::optional<double>& v) { return v ? format_real(*v) : "NA"; }

}  // namespace

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

ResponseMatrix parse_matrix_csv(std::istream& in) {
  std::vector<std::string> header;
  std::vector<std::uint8_t> entries;
  std::size_t width = 0;
  std::size_t rows = 0;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto tokens = split_csv(line);
    if (first) {
      first = false;
      const bool is_header = std::any_of(tokens.begin(), tokens.end(),
                                         [](const std::string& t) { return t != "0" && t != "1"; });
      width = tokens.size();
      if (is_header) {
        header = std::move(tokens);
        continue;
      }
    }
    if (tokens.size() != width) throw RaggedRows(rows);
    for (std::size_t j = 0; j < tokens.size(); ++j) {
      if (tokens[j] == "0")
        entries.push_back(0);
      else if (tokens[j] == "1")
        entries.push_back(1);
      else
        throw NonBinaryEntry(rows, j);
    }
    ++rows;
  }
  if (rows == 0 || width == 0) throw EmptyMatrix();
  return ResponseMatrix(rows, width, std::move(entries), std::move(header));
}

ResponseMatrix read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_matrix_csv(in);
}

void write_matrix_csv(std::ostream& out, const ResponseMatrix& X) {
  const auto& labels = X.question_labels();
  for (std::size_t j = 0; j < labels.size(); ++j) out << (j ? "," : "") << labels[j];
  if (!labels.empty()) out << '\n';
  for (std::size_t i = 0; i < X.n_examinees(); ++i) {
    for (std::size_t j = 0; j < X.n_questions(); ++j) out << (j ? "," : "") << X(i, j);
    out << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const ResponseMatrix& X) {
  auto out = open_out(path);
  write_matrix_csv(out, X);
}

void write_real_matrix_csv(const std::filesystem::path& path, std::size_t n, std::size_t d,
                           const std::vector<double>& values) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) out << (j ? "," : "") << format_real(values[i * d + j]);
    out << '\n';
  }
}

json partition_to_json(const Partition& p) { return p.labels; }

Partition partition_from_json(const json& j) {
  if (!j.is_array()) throw AcbmError("partition must be a JSON array of integers");
  Partition p{j.get<std::vector<int>>()};
  for (int l : p.labels)
    if (l < 0) throw AcbmError("partition labels must be non-negative");
  return p;
}

json truth_to_json(const GroundTruth& truth) {
  json j;
  j["n"] = truth.n;
  j["D"] = truth.D;
  j["col_partition"] = truth.col_partition.labels;
  j["clusters"] = json::array();
  for (const auto& c : truth.clusters) j["clusters"].push_back({{"weights", c.weights}, {"accuracies", c.accuracies}});
  j["row_labels"] = truth.row_labels;
  if (truth.has_accuracy()) {
    json rows = json::array();
    for (std::size_t i = 0; i < truth.n; ++i)
      rows.push_back(std::vector<double>(truth.accuracy.begin() + static_cast<long>(i * truth.D),
                                         truth.accuracy.begin() + static_cast<long>((i + 1) * truth.D)));
    j["accuracy"] = std::move(rows);
  }
  return j;
}

GroundTruth truth_from_json(const json& j) {
  GroundTruth t;
  t.n = j.at("n").get<std::size_t>();
  t.D = j.at("D").get<std::size_t>();
  t.col_partition = canonicalize(partition_from_json(j.at("col_partition")));
  for (const auto& c : j.at("clusters"))
    t.clusters.push_back(TrueCluster{c.at("weights").get<std::vector<double>>(),
                                     c.at("accuracies").get<std::vector<double>>()});
  if (j.contains("row_labels")) t.row_labels = j["row_labels"].get<std::vector<std::vector<int>>>();
  if (j.contains("accuracy")) {
    for (const auto& row : j["accuracy"]) {
      const auto r = row.get<std::vector<double>>();
      if (r.size() != t.D) throw AcbmError("truth accuracy row has the wrong length");
      t.accuracy.insert(t.accuracy.end(), r.begin(), r.end());
    }
  }
  t.validate(false);
  return t;
}

json summary_to_json(const FitSummary& fit, const std::string& accuracy_matrix_path) {
  json j;
  j["n"] = fit.n;
  j["D"] = fit.D;
  j["col_partition"] = fit.col_partition.labels;
  j["row_partitions"] = json::array();
  for (const auto& r : fit.row_partitions) j["row_partitions"].push_back(r.labels);
  j["clusters"] = json::array();
  for (const auto& c : fit.clusters)
    j["clusters"].push_back({{"columns", c.columns},
                             {"size", c.size()},
                             {"K", c.K},
                             {"theta", c.theta},
                             {"w", c.weight},
                             {"members", c.members}});
  j["accuracy_matrix_path"] = accuracy_matrix_path;
  j["column_state_index"] = fit.column_state_index;
  j["row_state_index"] = fit.row_state_index;
  return j;
}

FitSummary summary_from_json(const json& j) {
  FitSummary fit;
  fit.n = j.at("n").get<std::size_t>();
  fit.D = j.at("D").get<std::size_t>();
  fit.col_partition = canonicalize(partition_from_json(j.at("col_partition")));
  for (const auto& r : j.at("row_partitions")) fit.row_partitions.push_back(partition_from_json(r));
  for (const auto& c : j.at("clusters")) {
    ClusterSummary cs;
    cs.columns = c.at("columns").get<std::vector<int>>();
    cs.K = c.at("K").get<int>();
    cs.theta = c.at("theta").get<std::vector<double>>();
    cs.weight = c.at("w").get<std::vector<double>>();
    if (c.contains("members")) cs.members = c["members"].get<std::vector<long>>();
    fit.clusters.push_back(std::move(cs));
  }
  if (fit.clusters.size() != fit.row_partitions.size() ||
      static_cast<int>(fit.clusters.size()) != fit.col_partition.n_blocks())
    throw AcbmError("summary needs one row partition and one cluster entry per column cluster");
  fit.column_state_index = j.value("column_state_index", std::size_t{0});
  fit.row_state_index = j.value("row_state_index", std::size_t{0});
  fit.accuracy.assign(fit.n * fit.D, 0.0);
  for (std::size_t jj = 0; jj < fit.D; ++jj) {
    const int c = fit.col_partition.labels[jj];
    const auto& blocks = canonical_labels(fit.row_partitions[c].labels);
    for (std::size_t i = 0; i < fit.n; ++i) fit.accuracy[i * fit.D + jj] = fit.clusters[c].theta.at(blocks[i]);
  }
  return fit;
}

json rasch_to_json(const RaschFit& fit) {
  return {{"psi", fit.psi},
          {"xi", fit.xi},
          {"sigma", fit.sigma},
          {"loglik", fit.loglik},
          {"converged", fit.converged},
          {"iterations", fit.iterations},
          {"degenerate_items", fit.degenerate_items}};
}

RaschFit rasch_from_json(const json& j) {
  RaschFit fit;
  fit.psi = j.at("psi").get<std::vector<double>>();
  fit.xi = j.at("xi").get<std::vector<double>>();
  fit.sigma = j.at("sigma").get<double>();
  fit.loglik = j.at("loglik").get<double>();
  fit.converged = j.at("converged").get<bool>();
  fit.iterations = j.value("iterations", 0);
  if (j.contains("degenerate_items")) fit.degenerate_items = j["degenerate_items"].get<std::vector<int>>();
  return fit;
}

json trace_record_to_json(const TraceRecord& rec) {
  json rows = json::object();
  for (std::size_t c = 0; c < rec.row_assign.size(); ++c) rows[std::to_string(c)] = rec.row_assign[c];
  return {{"iter", rec.iter}, {"col_assign", rec.col_assign}, {"row_assign", rows}, {"log_joint", rec.log_joint}};
}

TraceRecord trace_record_from_json(const json& j) {
  TraceRecord rec;
  rec.iter = j.at("iter").get<int>();
  rec.col_assign = j.at("col_assign").get<std::vector<int>>();
  const auto& rows = j.at("row_assign");
  rec.row_assign.resize(rows.size());
  for (const auto& [key, value] : rows.items()) {
    const std::size_t c = std::stoul(key);
    if (c >= rec.row_assign.size()) throw AcbmError("row_assign keys must be 0..K-1");
    rec.row_assign[c] = value.get<std::vector<int>>();
  }
  rec.log_joint = j.at("log_joint").get<double>();
  return rec;
}

void write_trace_ndjson(std::ostream& out, const ChainTrace& trace) {
  for (const auto& rec : trace.states) out << trace_record_to_json(rec).dump() << '\n';
}

ChainTrace read_trace_ndjson(std::istream& in) {
  ChainTrace trace;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    trace.states.push_back(trace_record_from_json(json::parse(line)));
  }
  return trace;
}

json chain_metadata(const ChainTrace& trace) {
  return {{"seed", trace.seed},       {"rng", trace.rng},         {"n_iter", trace.n_iter},
          {"n_rep", trace.n_rep},     {"burn_in", trace.burn_in}, {"thinning", trace.thinning},
          {"kept", trace.states.size()}};
}

DesignSpec design_from_json(const json& j, std::optional<std::size_t> n, std::optional<std::uint64_t> seed) {
  const std::string type = j.value("type", "acbm");
  const std::size_t n_eff = n ? *n : j.value("n", std::size_t{0});
  const std::uint64_t seed_eff = seed ? *seed : j.value("seed", std::uint64_t{0});
  DesignSpec spec;
  if (type == "acbm") {
    AcbmDesign d;
    d.n_examinees = n_eff;
    d.seed = seed_eff;
    for (const auto& c : j.at("clusters"))
      d.clusters.push_back(MixtureCluster{c.at("size").get<int>(), c.at("weights").get<std::vector<double>>(),
                                          c.at("accuracies").get<std::vector<double>>()});
    d.validate();
    spec.acbm = std::move(d);
  } else if (type == "rasch") {
    RaschDesign d;
    d.n_examinees = n_eff;
    d.seed = seed_eff;
    d.psi = j.at("psi").get<std::vector<double>>();
    d.xi_support = j.at("xi_support").get<std::vector<double>>();
    d.validate();
    spec.rasch = std::move(d);
  } else {
    throw DesignInvariantViolation("design type must be 'acbm' or 'rasch'");
  }
  return spec;
}

json read_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw AcbmError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

std::string read_text(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string metric_csv_header() { return "dgp,n,replication,cwri,adk,adw,adp,arwri,d1_acbm,d1_rasch"; }

std::string metric_csv_row(const std::string& dgp, std::size_t n, std::size_t replication, const MetricRow& row) {
  std::ostringstream out;
  out << dgp << ',' << n << ',' << replication << ',' << optional_cell(row.cwri) << ',' << optional_cell(row.adk)
      << ',' << optional_cell(row.adw) << ',' << optional_cell(row.adp) << ',' << optional_cell(row.arwri) << ','
      << optional_cell(row.d1_acbm) << ',' << optional_cell(row.d1_rasch);
  return out.str();
}

}  // namespace acbm::io
