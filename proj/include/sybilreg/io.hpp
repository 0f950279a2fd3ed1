#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sybilreg/estimators.hpp"
#include "sybilreg/graph_ingest.hpp"
#include "sybilreg/model.hpp"
#include "sybilreg/simulation.hpp"
#include "sybilreg/weights.hpp"

namespace sybilreg::io {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double x);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

/// Comma-separated rows with surrounding whitespace and double quotes
/// stripped; blank lines and lines starting with '#' are skipped.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

/// Header row, optional leading `id` column, then `y`, then regressors. An
/// intercept column named "(intercept)" is prepended unless disabled.
Dataset parse_dataset_csv(const std::string& text, bool add_intercept = true);

/// `{"n": N, "networks": [{"members": [...], "pi": p}]}`. Members are either
/// all zero-based integers or all string row ids (resolved through `ds`).
/// Unknown keys are ignored so annotated specs parse back.
DisjointNetworkSpec spec_from_json(const json& j, const Dataset* ds = nullptr);
/// Members are written as row ids when `row_ids` is non-empty.
json spec_to_json(const DisjointNetworkSpec& spec, const std::vector<std::string>& row_ids = {});

std::vector<ReferralEdge> parse_referrals_csv(const std::string& text);
std::vector<TransferRecord> parse_transfers_csv(const std::string& text);

json block_weights_to_json(const BlockWeights& w);
std::string dense_matrix_csv(const Eigen::MatrixXd& m);

json fit_to_json(const FitResult& fit, const EstimatorKind& kind,
                 const std::vector<std::string>& columns);

SimConfig sim_config_from_json(const json& j, SimConfig base = {});
json sim_config_to_json(const SimConfig& cfg);
json report_to_json(const SimReport& report);
/// Header `estimator,mse,mc_se` and one row per estimator; a missing
/// Monte-Carlo error is written as `null`.
std::string report_csv(const SimReport& report);

json diagnostics_to_json(const IngestDiagnostics& d);

/// Provenance echoed into every output artifact.
struct RunManifest {
  std::string subcommand;
  json inputs = json::object();
  json config = json::object();
  std::optional<std::uint64_t> seed;
  std::optional<std::string> timestamp;

  json to_json() const;
};

}  // namespace sybilreg::io
