#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "acbm/core.hpp"
#include "acbm/dgp.hpp"
#include "acbm/metrics.hpp"
#include "acbm/rasch.hpp"
#include "acbm/sampler.hpp"
#include "acbm/summarize.hpp"

namespace acbm::io {

using nlohmann::json;

// Comma-separated 0/1 entries, one examinee per row. A first row holding any
// token other than 0 or 1 is taken as question labels.
ResponseMatrix parse_matrix_csv(std::istream& in);
ResponseMatrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(std::ostream& out, const ResponseMatrix& X);
void write_matrix_csv(const std::filesystem::path& path, const ResponseMatrix& X);

void write_real_matrix_csv(const std::filesystem::path& path, std::size_t n, std::size_t d,
                           const std::vector<double>& values);

// Fixed-format real number used by every CSV writer so reruns are
// byte-identical.
std::string format_real(double v);

json partition_to_json(const Partition& p);
Partition partition_from_json(const json& j);

json truth_to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const json& j);

json summary_to_json(const FitSummary& fit, const std::string& accuracy_matrix_path);
FitSummary summary_from_json(const json& j);

json rasch_to_json(const RaschFit& fit);
RaschFit rasch_from_json(const json& j);

json trace_record_to_json(const TraceRecord& rec);
TraceRecord trace_record_from_json(const json& j);
void write_trace_ndjson(std::ostream& out, const ChainTrace& trace);
ChainTrace read_trace_ndjson(std::istream& in);

json chain_metadata(const ChainTrace& trace);

// {"type": "acbm", "clusters": [{"size", "weights", "accuracies"}]} or
// {"type": "rasch", "psi": [...], "xi_support": [...]}; optional "n" and
// "seed" are used when the caller passes none.
struct DesignSpec {
  std::optional<AcbmDesign> acbm;
  std::optional<RaschDesign> rasch;
};
DesignSpec design_from_json(const json& j, std::optional<std::size_t> n, std::optional<std::uint64_t> seed);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);
std::string read_text(const std::filesystem::path& path);

// Metric report rows {dgp, n, replication, cwri, adk, adw, adp, arwri,
// d1_acbm, d1_rasch}; absent metrics print as NA.
std::string metric_csv_header();
std::string metric_csv_row(const std::string& dgp, std::size_t n, std::size_t replication,
                           const MetricRow& row);

}  // namespace acbm::io
