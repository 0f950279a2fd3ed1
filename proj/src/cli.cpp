#include "sybilreg/cli.hpp"

#include <cstdlib>
#include <ostream>

#include <CLI11.hpp>

#include "sybilreg/error.hpp"
#include "sybilreg/estimators.hpp"
#include "sybilreg/graph_ingest.hpp"
#include "sybilreg/io.hpp"
#include "sybilreg/simulation.hpp"
#include "sybilreg/weights.hpp"

namespace sybilreg {
namespace {

using io::json;

constexpr Index kMaxDenseN = 5000;

std::optional<std::string> resolve_timestamp(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) return std::string(epoch);
  return std::nullopt;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    io::write_file(path, text);
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string with_manifest_comment(const io::RunManifest& m, const std::string& csv) {
  return "# manifest: " + m.to_json().dump() + "\n" + csv;
}

struct WeightsArgs {
  std::string spec_file, out_file, format = "block-json", method = "closed-form";
};

struct FitArgs {
  std::string data_file, spec_file, out_file, estimator = "weighted";
  double cutoff = 0.5;
  int resamples = 100;
  std::uint64_t seed = 0;
  bool no_intercept = false;
};

struct SimulateArgs {
  std::string config_file, out_file, csv_file;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps, resamples, threads;
  std::optional<Index> n_obs;
  std::optional<double> noise_sd;
  bool random_count = false;
};

struct DeriveArgs {
  std::string referrals_file, transfers_file, data_file, out_file, transfers_out;
  Index min_tree_size = 20;
  long min_transfers = 10;
  double pi = 0.5;
};

int cmd_weights(const WeightsArgs& a, const std::string& stamp, std::ostream& out) {
  const json raw = json::parse(io::read_file(a.spec_file));
  const DisjointNetworkSpec spec = io::spec_from_json(raw);
  io::RunManifest m{"weights",
                    {{"spec_file", a.spec_file}},
                    {{"format", a.format}, {"method", a.method}},
                    std::nullopt,
                    resolve_timestamp(stamp)};

  if (a.format == "dense-csv") {
    if (spec.n_total > kMaxDenseN) {
      throw Error(ErrorCode::SizeRefused, "dense output is limited to N <= " + std::to_string(kMaxDenseN) +
                                              " (N = " + std::to_string(spec.n_total) +
                                              "); use --format block-json");
    }
    const Eigen::MatrixXd w = a.method == "general"
                                  ? optimal_weights_general(expected_topology_disjoint(spec)).matrix
                                  : optimal_weights_closed_form(spec).dense();
    emit(a.out_file, with_manifest_comment(m, io::dense_matrix_csv(w)), out);
    return 0;
  }
  if (a.method != "closed-form") {
    throw Error(ErrorCode::InvalidConfig, "block-json output requires --method closed-form");
  }
  json j = io::block_weights_to_json(optimal_weights_closed_form(spec));
  j["manifest"] = m.to_json();
  emit(a.out_file, dump(j), out);
  return 0;
}

int cmd_fit(const FitArgs& a, const std::string& stamp, std::ostream& out) {
  const Dataset ds = io::parse_dataset_csv(io::read_file(a.data_file), !a.no_intercept);
  DisjointNetworkSpec spec{{}, ds.n_obs()};
  if (!a.spec_file.empty()) spec = io::spec_from_json(json::parse(io::read_file(a.spec_file)), &ds);

  const auto type = parse_estimator(a.estimator);
  if (!type) throw Error(ErrorCode::InvalidConfig, "unknown estimator '" + a.estimator + "'");
  const EstimatorKind kind{*type, a.cutoff, a.resamples};
  const FitResult fit = run_estimator(kind, ds, spec, a.seed);

  io::RunManifest m{"fit",
                    {{"data_file", a.data_file}, {"spec_file", a.spec_file}},
                    {{"estimator", a.estimator},
                     {"cutoff", a.cutoff},
                     {"resamples", a.resamples},
                     {"intercept", !a.no_intercept}},
                    a.seed,
                    resolve_timestamp(stamp)};
  json j = io::fit_to_json(fit, kind, ds.column_names);
  j["n_obs"] = ds.n_obs();
  j["manifest"] = m.to_json();
  emit(a.out_file, dump(j), out);
  return 0;
}

int cmd_simulate(const SimulateArgs& a, const std::string& stamp, std::ostream& out) {
  SimConfig cfg;
  if (!a.config_file.empty()) cfg = io::sim_config_from_json(json::parse(io::read_file(a.config_file)));
  if (a.seed) cfg.seed = *a.seed;
  if (a.reps) cfg.n_reps = *a.reps;
  if (a.resamples) cfg.resamples = *a.resamples;
  if (a.threads) cfg.threads = *a.threads;
  if (a.n_obs) cfg.n_obs = *a.n_obs;
  if (a.noise_sd) cfg.noise_sd = *a.noise_sd;
  if (a.random_count) cfg.random_network_count = true;
  validate_sim_config(cfg);

  const SimReport report = run_simulation(cfg);
  json cfg_echo = io::sim_config_to_json(cfg);
  io::RunManifest m{"simulate", {{"config_file", a.config_file}}, cfg_echo, cfg.seed,
                    resolve_timestamp(stamp)};
  json j = io::report_to_json(report);
  j["manifest"] = m.to_json();
  emit(a.out_file, dump(j), out);
  if (!a.csv_file.empty()) emit(a.csv_file, with_manifest_comment(m, io::report_csv(report)), out);
  return 0;
}

int cmd_derive(const DeriveArgs& a, const std::string& stamp, std::ostream& out) {
  const Dataset ds = io::parse_dataset_csv(io::read_file(a.data_file));
  const auto id_map = RowIndexMap::from_dataset(ds);
  const auto forest = build_referral_forest(io::parse_referrals_csv(io::read_file(a.referrals_file)));

  io::RunManifest m{"derive-networks",
                    {{"referrals_file", a.referrals_file},
                     {"transfers_file", a.transfers_file},
                     {"data_file", a.data_file}},
                    {{"min_tree_size", a.min_tree_size},
                     {"min_transfers", a.min_transfers},
                     {"pi", a.pi}},
                    std::nullopt,
                    resolve_timestamp(stamp)};

  auto write_spec = [&](const DerivedSpec& d, const char* heuristic, const std::string& path) {
    json j = io::spec_to_json(d.spec, ds.row_ids);
    j["heuristic"] = heuristic;
    j["diagnostics"] = io::diagnostics_to_json(d.diagnostics);
    j["manifest"] = m.to_json();
    emit(path, dump(j), out);
  };

  write_spec(flag_large_trees(forest, a.min_tree_size, a.pi, id_map), "referral-tree-size", a.out_file);
  if (!a.transfers_file.empty()) {
    const auto transfers = io::parse_transfers_csv(io::read_file(a.transfers_file));
    write_spec(flag_transfer_clusters(forest, transfers, a.min_transfers, a.pi, id_map),
               "repeated-transfers", a.transfers_out);
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weighted regression for experiments with suspected Sybil networks", "sybilreg"};
  app.require_subcommand(1);
  app.set_version_flag("--version", io::kToolVersion);
  std::string stamp;
  app.add_option("--timestamp", stamp, "Timestamp recorded in the run manifest (default: SOURCE_DATE_EPOCH or none)");

  WeightsArgs wa;
  auto* weights = app.add_subcommand("weights", "Write the optimal weight matrix for a network spec");
  weights->add_option("--spec", wa.spec_file, "Spec JSON (integer members)")->required();
  weights->add_option("--out", wa.out_file, "Output file (default: stdout)");
  weights->add_option("--format", wa.format)->check(CLI::IsMember({"block-json", "dense-csv"}));
  weights->add_option("--method", wa.method)->check(CLI::IsMember({"closed-form", "general"}));

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Fit one estimator to a dataset");
  fit->add_option("--data", fa.data_file, "Dataset CSV")->required();
  fit->add_option("--spec", fa.spec_file, "Spec JSON (default: no networks)");
  fit->add_option("--estimator", fa.estimator)
      ->check(CLI::IsMember({"exclusion", "inclusion", "threshold", "network-sampled",
                             "observation-sampled", "weighted"}));
  fit->add_option("--cutoff", fa.cutoff, "Threshold estimator cutoff");
  fit->add_option("--resamples", fa.resamples, "Resample count for sampled estimators");
  fit->add_option("--seed", fa.seed);
  fit->add_flag("--no-intercept", fa.no_intercept);
  fit->add_option("--out", fa.out_file);

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Run the six-estimator Monte-Carlo comparison");
  sim->add_option("--config", sa.config_file, "Simulation config JSON");
  sim->add_option("--seed", sa.seed);
  sim->add_option("--reps", sa.reps);
  sim->add_option("--n-obs", sa.n_obs);
  sim->add_option("--noise-sd", sa.noise_sd);
  sim->add_option("--resamples", sa.resamples);
  sim->add_option("--threads", sa.threads);
  sim->add_flag("--random-network-count", sa.random_count);
  sim->add_option("--out", sa.out_file, "Report JSON (default: stdout)");
  sim->add_option("--csv", sa.csv_file, "Per-estimator MSE table");

  DeriveArgs da;
  auto* derive = app.add_subcommand("derive-networks", "Build candidate networks from referral and transfer logs");
  derive->add_option("--referrals", da.referrals_file, "referrer,referee CSV")->required();
  derive->add_option("--transfers", da.transfers_file, "from,to,count CSV");
  derive->add_option("--data", da.data_file, "Dataset CSV with an id column")->required();
  derive->add_option("--min-tree-size", da.min_tree_size);
  derive->add_option("--min-transfers", da.min_transfers);
  derive->add_option("--pi", da.pi);
  derive->add_option("--out", da.out_file, "Tree-size spec JSON (default: stdout)");
  derive->add_option("--transfers-out", da.transfers_out, "Transfer spec JSON (default: stdout)");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*weights) return cmd_weights(wa, stamp, out);
    if (*fit) return cmd_fit(fa, stamp, out);
    if (*sim) return cmd_simulate(sa, stamp, out);
    if (*derive) return cmd_derive(da, stamp, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    err << "error: malformed JSON: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace sybilreg
