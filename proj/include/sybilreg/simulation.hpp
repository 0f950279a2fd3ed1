#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sybilreg/estimators.hpp"
#include "sybilreg/model.hpp"

namespace sybilreg {

struct NetworkShape {
  Index size = 0;
  double pi = 0.0;
};

/// Monte-Carlo setup. When `networks` is unset, the network sizes and
/// probabilities are drawn once per run from the configured ranges.
struct SimConfig {
  Index n_obs = 400;
  std::optional<std::vector<NetworkShape>> networks;
  int max_networks = 7;
  bool random_network_count = false;  // draw the count uniformly in [1, max_networks]
  Index min_network_size = 10;
  Index max_network_size = 90;
  double min_pi = 0.1;
  double max_pi = 0.9;
  int n_reps = 1000;
  Eigen::VectorXd beta_true = (Eigen::VectorXd(3) << 2.0, 3.0, -0.5).finished();
  double noise_sd = 1.0;
  std::uint64_t seed = 42;
  int resamples = 100;
  double cutoff = 0.5;
  int threads = 1;
};

void validate_sim_config(const SimConfig& cfg);

/// Fixed network layout for a run: networks occupy consecutive rows from 0,
/// independent rows follow.
DisjointNetworkSpec resolve_layout(const SimConfig& cfg);

struct Replication {
  Dataset data;
  DisjointNetworkSpec spec;    // carries pi_s, not the realized statuses
  Topology realized;           // diagnostics only
  Eigen::VectorXd errors;      // realized error draws
};

/// Draws covariates i.i.d. N(0, 1), a Bernoulli(pi_s) Sybil status per
/// network, and errors N(0, noise_sd^2) that are shared by all members of a
/// realized Sybil network. Depends only on (cfg, rep_index).
Replication generate_replication(const SimConfig& cfg, const DisjointNetworkSpec& layout,
                                 int rep_index);
Replication generate_replication(const SimConfig& cfg, int rep_index);

/// Per-replication estimates, indexed like kAllEstimators.
struct ReplicationOutcome {
  std::array<Eigen::VectorXd, 6> beta;
  std::array<Eigen::VectorXd, 6> reported_var;  // diagonal of cov_beta
};

struct SimRun {
  DisjointNetworkSpec layout;
  std::vector<ReplicationOutcome> reps;
};

/// Runs all six estimators on every replication; replications may be spread
/// over `cfg.threads` workers without changing the result.
SimRun simulate_replications(const SimConfig& cfg);

struct EstimatorSummary {
  EstimatorType type;
  double mse = 0.0;                         // mean over reps of ||beta_hat - beta||^2
  std::optional<double> mc_se;              // unset with a single replication
  Eigen::VectorXd mean_beta;
  std::optional<Eigen::VectorXd> beta_mc_se;
  Eigen::VectorXd mean_reported_var;
  std::optional<Eigen::VectorXd> empirical_var;
};

struct SimReport {
  SimConfig config;
  DisjointNetworkSpec layout;
  int n_reps = 0;
  std::vector<EstimatorSummary> estimators;  // order of kAllEstimators

  const EstimatorSummary& get(EstimatorType type) const;
};

/// Squared coefficient error ||beta_hat - beta_true||^2 for one estimator.
std::vector<double> squared_errors(const SimConfig& cfg, const SimRun& run, EstimatorType type);

SimReport summarize(const SimConfig& cfg, const SimRun& run);
SimReport run_simulation(const SimConfig& cfg);

}  // namespace sybilreg
