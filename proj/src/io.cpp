#include "sybilreg/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "sybilreg/error.hpp"

namespace sybilreg::io {
namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  s = s.substr(first, last - first + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

double parse_number(const std::string& cell, std::size_t line, const std::string& column) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != cell.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::ParseError, "row " + std::to_string(line) + ", column '" + column +
                                           "': '" + cell + "' is not a finite number");
  }
  return v;
}

long parse_count(const std::string& cell, std::size_t line) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != cell.size() || v < 1) {
    throw Error(ErrorCode::ParseError,
                "row " + std::to_string(line) + ": transfer count '" + cell + "' is not a positive integer");
  }
  return v;
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json optional_vector_json(const std::optional<Eigen::VectorXd>& v) {
  return v ? vector_json(*v) : json(nullptr);
}

}  // namespace

std::string format_double(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << contents;
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

Dataset parse_dataset_csv(const std::string& text, bool add_intercept) {
  const auto rows = parse_csv(text);
  if (rows.empty()) throw Error(ErrorCode::ParseError, "dataset has no header row");
  const auto& header = rows.front();
  const bool has_id = !header.empty() && header[0] == "id";
  const std::size_t y_col = has_id ? 1 : 0;
  if (header.size() <= y_col || header[y_col] != "y") {
    throw Error(ErrorCode::ParseError, "dataset header must be [id,]y,x1,...");
  }
  const std::size_t n_reg = header.size() - y_col - 1;
  const std::size_t p = n_reg + (add_intercept ? 1 : 0);
  const std::size_t n = rows.size() - 1;

  Dataset ds;
  ds.y.resize(static_cast<Index>(n));
  ds.X.resize(static_cast<Index>(n), static_cast<Index>(p));
  if (add_intercept) ds.column_names.emplace_back("(intercept)");
  for (std::size_t k = 0; k < n_reg; ++k) ds.column_names.push_back(header[y_col + 1 + k]);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& cells = rows[r + 1];
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::ParseError, "row " + std::to_string(r + 1) + " has " +
                                             std::to_string(cells.size()) + " fields, expected " +
                                             std::to_string(header.size()));
    }
    const auto i = static_cast<Index>(r);
    if (has_id) ds.row_ids.push_back(cells[0]);
    ds.y(i) = parse_number(cells[y_col], r + 1, "y");
    Index col = 0;
    if (add_intercept) ds.X(i, col++) = 1.0;
    for (std::size_t k = 0; k < n_reg; ++k) {
      ds.X(i, col++) = parse_number(cells[y_col + 1 + k], r + 1, header[y_col + 1 + k]);
    }
  }
  validate_dataset(ds);
  return ds;
}

DisjointNetworkSpec spec_from_json(const json& j, const Dataset* ds) {
  if (!j.is_object() || !j.contains("n") || !j.contains("networks")) {
    throw Error(ErrorCode::ParseError, "spec must be an object with \"n\" and \"networks\"");
  }
  if (!j["n"].is_number_integer() || j["n"].get<long long>() < 0) {
    throw Error(ErrorCode::ParseError, "\"n\" must be a non-negative integer");
  }
  if (!j["networks"].is_array()) throw Error(ErrorCode::ParseError, "\"networks\" must be an array");

  DisjointNetworkSpec spec;
  spec.n_total = j["n"].get<Index>();
  if (ds && spec.n_total != ds->n_obs()) {
    throw Error(ErrorCode::DimensionMismatch, "spec has n = " + std::to_string(spec.n_total) +
                                                  " but the dataset has " +
                                                  std::to_string(ds->n_obs()) + " rows");
  }

  std::unordered_map<std::string, Index> by_id;
  std::optional<bool> string_members;
  for (const auto& jn : j["networks"]) {
    if (!jn.is_object() || !jn.contains("members") || !jn.contains("pi") ||
        !jn["members"].is_array() || !jn["pi"].is_number()) {
      throw Error(ErrorCode::ParseError, "each network needs a \"members\" array and numeric \"pi\"");
    }
    CandidateNetwork net;
    net.pi = jn["pi"].get<double>();
    for (const auto& m : jn["members"]) {
      const bool is_str = m.is_string();
      if (!is_str && !m.is_number_integer()) {
        throw Error(ErrorCode::ParseError, "network members must be integers or strings");
      }
      if (string_members && *string_members != is_str) {
        throw Error(ErrorCode::ParseError, "network members mix integer indices and string ids");
      }
      string_members = is_str;
      if (!is_str) {
        net.members.push_back(m.get<Index>());
        continue;
      }
      if (!ds || !ds->has_row_ids()) {
        throw Error(ErrorCode::UnknownRowId,
                    "spec uses row id '" + m.get<std::string>() + "' but no dataset ids are available");
      }
      if (by_id.empty()) {
        for (std::size_t i = 0; i < ds->row_ids.size(); ++i) by_id.emplace(ds->row_ids[i], static_cast<Index>(i));
      }
      const auto id = m.get<std::string>();
      auto it = by_id.find(id);
      if (it == by_id.end()) throw Error(ErrorCode::UnknownRowId, "unknown row id '" + id + "'");
      net.members.push_back(it->second);
    }
    spec.networks.push_back(std::move(net));
  }
  return normalized_spec(std::move(spec));
}

json spec_to_json(const DisjointNetworkSpec& spec, const std::vector<std::string>& row_ids) {
  json nets = json::array();
  for (const auto& net : spec.networks) {
    json members = json::array();
    for (Index i : net.members) {
      if (row_ids.empty()) {
        members.push_back(i);
      } else {
        members.push_back(row_ids[static_cast<std::size_t>(i)]);
      }
    }
    nets.push_back({{"members", std::move(members)}, {"pi", net.pi}});
  }
  return {{"n", spec.n_total}, {"networks", std::move(nets)}};
}

std::vector<ReferralEdge> parse_referrals_csv(const std::string& text) {
  auto rows = parse_csv(text);
  std::vector<ReferralEdge> edges;
  std::size_t start = 0;
  if (!rows.empty() && rows[0].size() == 2 && rows[0][0] == "referrer" && rows[0][1] == "referee") start = 1;
  for (std::size_t r = start; r < rows.size(); ++r) {
    if (rows[r].size() != 2 || rows[r][0].empty() || rows[r][1].empty()) {
      throw Error(ErrorCode::ParseError, "referral row " + std::to_string(r) + " must be referrer,referee");
    }
    edges.push_back({rows[r][0], rows[r][1]});
  }
  return edges;
}

std::vector<TransferRecord> parse_transfers_csv(const std::string& text) {
  auto rows = parse_csv(text);
  std::vector<TransferRecord> out;
  std::size_t start = 0;
  if (!rows.empty() && rows[0].size() == 3 && rows[0][0] == "from" && rows[0][1] == "to" &&
      rows[0][2] == "count") {
    start = 1;
  }
  for (std::size_t r = start; r < rows.size(); ++r) {
    if (rows[r].size() != 3 || rows[r][0].empty() || rows[r][1].empty()) {
      throw Error(ErrorCode::ParseError, "transfer row " + std::to_string(r) + " must be from,to,count");
    }
    out.push_back({rows[r][0], rows[r][1], parse_count(rows[r][2], r)});
  }
  return out;
}

json block_weights_to_json(const BlockWeights& w) {
  json nets = json::array();
  for (std::size_t s = 0; s < w.blocks().size(); ++s) {
    const auto& b = w.blocks()[s];
    nets.push_back({{"network_id", s},
                    {"members", b.members},
                    {"pi", b.pi},
                    {"d", b.diag},
                    {"o", b.offdiag}});
  }
  return {{"n", w.size()}, {"independent_weight", 1.0}, {"networks", std::move(nets)}};
}

std::string dense_matrix_csv(const Eigen::MatrixXd& m) {
  std::string out;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

json fit_to_json(const FitResult& fit, const EstimatorKind& kind,
                 const std::vector<std::string>& columns) {
  json cov = json::array();
  for (Index i = 0; i < fit.cov_beta.rows(); ++i) cov.push_back(vector_json(fit.cov_beta.row(i).transpose()));
  json est = {{"name", to_string(kind.type)}};
  if (kind.type == EstimatorType::Threshold) est["cutoff"] = kind.cutoff;
  if (kind.type == EstimatorType::NetworkSampled || kind.type == EstimatorType::ObservationSampled) {
    est["resamples"] = kind.resamples;
  }
  const auto& m = fit.meta;
  json meta = {{"n_used", m.n_used},
               {"residual_dof", m.residual_dof},
               {"sigma2_convention", m.sigma2_convention},
               {"heuristic_covariance", m.heuristic_covariance},
               {"notes", m.notes}};
  if (m.resamples) meta["resamples"] = *m.resamples;
  if (m.attempts) meta["attempts"] = *m.attempts;
  return {{"estimator", std::move(est)},
          {"columns", columns},
          {"beta", vector_json(fit.beta)},
          {"se", vector_json(fit.se)},
          {"sigma2_hat", fit.sigma2_hat},
          {"cov_beta", std::move(cov)},
          {"metadata", std::move(meta)}};
}

SimConfig sim_config_from_json(const json& j, SimConfig cfg) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "simulation config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "n_obs") cfg.n_obs = v.get<Index>();
      else if (key == "n_reps") cfg.n_reps = v.get<int>();
      else if (key == "noise_sd") cfg.noise_sd = v.get<double>();
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "resamples") cfg.resamples = v.get<int>();
      else if (key == "cutoff") cfg.cutoff = v.get<double>();
      else if (key == "max_networks") cfg.max_networks = v.get<int>();
      else if (key == "random_network_count") cfg.random_network_count = v.get<bool>();
      else if (key == "network_size_range") {
        cfg.min_network_size = v.at(0).get<Index>();
        cfg.max_network_size = v.at(1).get<Index>();
      } else if (key == "pi_range") {
        cfg.min_pi = v.at(0).get<double>();
        cfg.max_pi = v.at(1).get<double>();
      } else if (key == "beta_true") {
        const auto b = v.get<std::vector<double>>();
        cfg.beta_true = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Index>(b.size()));
      } else if (key == "networks") {
        if (v.is_null()) {
          cfg.networks.reset();
        } else {
          std::vector<NetworkShape> shapes;
          for (const auto& s : v) shapes.push_back({s.at("size").get<Index>(), s.at("pi").get<double>()});
          cfg.networks = std::move(shapes);
        }
      } else if (key == "threads") {
        cfg.threads = v.get<int>();
      } else {
        throw Error(ErrorCode::InvalidConfig, "unknown simulation config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("malformed simulation config: ") + e.what());
  }
  validate_sim_config(cfg);
  return cfg;
}

json sim_config_to_json(const SimConfig& cfg) {
  json j = {{"n_obs", cfg.n_obs},
            {"n_reps", cfg.n_reps},
            {"beta_true", vector_json(cfg.beta_true)},
            {"noise_sd", cfg.noise_sd},
            {"seed", cfg.seed},
            {"resamples", cfg.resamples},
            {"cutoff", cfg.cutoff},
            {"max_networks", cfg.max_networks},
            {"random_network_count", cfg.random_network_count},
            {"network_size_range", {cfg.min_network_size, cfg.max_network_size}},
            {"pi_range", {cfg.min_pi, cfg.max_pi}}};
  if (cfg.networks) {
    json nets = json::array();
    for (const auto& s : *cfg.networks) nets.push_back({{"size", s.size}, {"pi", s.pi}});
    j["networks"] = std::move(nets);
  } else {
    j["networks"] = nullptr;
  }
  return j;
}

json report_to_json(const SimReport& report) {
  json ests = json::array();
  for (const auto& s : report.estimators) {
    ests.push_back({{"estimator", to_string(s.type)},
                    {"mse", s.mse},
                    {"mc_se", s.mc_se ? json(*s.mc_se) : json(nullptr)},
                    {"mean_beta", vector_json(s.mean_beta)},
                    {"beta_mc_se", optional_vector_json(s.beta_mc_se)},
                    {"mean_reported_var", vector_json(s.mean_reported_var)},
                    {"empirical_var", optional_vector_json(s.empirical_var)}});
  }
  return {{"n_reps", report.n_reps},
          {"seed", report.config.seed},
          {"mse_definition", "mean over replications of the squared coefficient error summed over all coefficients"},
          {"config", sim_config_to_json(report.config)},
          {"layout", spec_to_json(report.layout)},
          {"estimators", std::move(ests)}};
}

std::string report_csv(const SimReport& report) {
  std::string out = "estimator,mse,mc_se\n";
  for (const auto& s : report.estimators) {
    out += std::string(to_string(s.type)) + ',' + format_double(s.mse) + ',' +
           (s.mc_se ? format_double(*s.mc_se) : std::string("null")) + '\n';
  }
  return out;
}

json diagnostics_to_json(const IngestDiagnostics& d) {
  return {{"trees_found", d.trees_found},
          {"candidates", d.candidates},
          {"networks", d.networks},
          {"wallets_dropped", d.wallets_dropped},
          {"candidates_discarded", d.candidates_discarded}};
}

json RunManifest::to_json() const {
  return {{"tool", "sybilreg"},
          {"version", kToolVersion},
          {"subcommand", subcommand},
          {"inputs", inputs},
          {"config", config},
          {"seed", seed ? json(*seed) : json(nullptr)},
          {"timestamp", timestamp ? json(*timestamp) : json(nullptr)}};
}

}  // namespace sybilreg::io
