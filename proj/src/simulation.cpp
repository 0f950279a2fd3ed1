#include "sybilreg/simulation.hpp"

#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include "sybilreg/error.hpp"
#include "sybilreg/random.hpp"

namespace sybilreg {
namespace {

constexpr std::uint64_t kLayoutStream = 1;
constexpr std::uint64_t kDataStream = 2;
constexpr std::uint64_t kEstimatorStream = 3;

std::size_t slot(EstimatorType t) {
  for (std::size_t k = 0; k < kAllEstimators.size(); ++k)
    if (kAllEstimators[k] == t) return k;
  return 0;
}

}  // namespace

void validate_sim_config(const SimConfig& cfg) {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidConfig, m); };
  if (cfg.beta_true.size() < 1) fail("beta_true must have at least one coefficient");
  if (!cfg.beta_true.allFinite()) fail("beta_true must be finite");
  if (cfg.n_obs < cfg.beta_true.size()) fail("n_obs must be at least the number of coefficients");
  if (cfg.n_reps < 1) fail("n_reps must be at least 1");
  if (!(cfg.noise_sd >= 0.0) || !std::isfinite(cfg.noise_sd)) fail("noise_sd must be finite and non-negative");
  if (cfg.resamples < 1) fail("resamples must be at least 1");
  if (!(cfg.cutoff >= 0.0 && cfg.cutoff <= 1.0)) fail("cutoff must lie in [0, 1]");
  if (cfg.threads < 1) fail("threads must be at least 1");
  if (cfg.networks) {
    Index total = 0;
    for (const auto& s : *cfg.networks) {
      if (s.size < 2) fail("network sizes must be at least 2");
      if (!(s.pi >= 0.0 && s.pi <= 1.0)) fail("network pi must lie in [0, 1]");
      total += s.size;
    }
    if (total > cfg.n_obs) fail("networks cover more rows than n_obs");
  } else {
    if (cfg.max_networks < 0) fail("max_networks must be non-negative");
    if (cfg.random_network_count && cfg.max_networks < 1) fail("max_networks must be positive");
    if (cfg.min_network_size < 2 || cfg.max_network_size < cfg.min_network_size) {
      fail("network size range must satisfy 2 <= min <= max");
    }
    if (!(cfg.min_pi >= 0.0 && cfg.min_pi <= cfg.max_pi && cfg.max_pi <= 1.0)) {
      fail("pi range must satisfy 0 <= min <= max <= 1");
    }
    if (cfg.min_network_size > cfg.n_obs && cfg.max_networks > 0) fail("networks cannot fit into n_obs");
  }
}

DisjointNetworkSpec resolve_layout(const SimConfig& cfg) {
  validate_sim_config(cfg);
  std::vector<NetworkShape> shapes;
  if (cfg.networks) {
    shapes = *cfg.networks;
  } else {
    Engine eng = make_engine({cfg.seed, kLayoutStream});
    const auto uniform_int = [&eng](Index lo, Index hi) {
      return lo + static_cast<Index>(uniform01(eng) * static_cast<double>(hi - lo + 1));
    };
    const int count = cfg.random_network_count ? static_cast<int>(uniform_int(1, cfg.max_networks))
                                               : cfg.max_networks;
    // Redraw whole layouts until they fit into n_obs.
    for (int attempt = 0;; ++attempt) {
      if (attempt == 10000) {
        throw Error(ErrorCode::InvalidConfig, "could not draw networks that fit into n_obs");
      }
      shapes.clear();
      Index total = 0;
      for (int s = 0; s < count; ++s) {
        NetworkShape shape;
        shape.size = uniform_int(cfg.min_network_size, cfg.max_network_size);
        shape.pi = cfg.min_pi + uniform01(eng) * (cfg.max_pi - cfg.min_pi);
        total += shape.size;
        shapes.push_back(shape);
      }
      if (total <= cfg.n_obs) break;
    }
  }

  DisjointNetworkSpec spec;
  spec.n_total = cfg.n_obs;
  Index next = 0;
  for (const auto& s : shapes) {
    CandidateNetwork net;
    net.pi = s.pi;
    for (Index k = 0; k < s.size; ++k) net.members.push_back(next++);
    spec.networks.push_back(std::move(net));
  }
  return validate_spec(spec);
}

Replication generate_replication(const SimConfig& cfg, const DisjointNetworkSpec& layout,
                                 int rep_index) {
  const Index n = cfg.n_obs;
  const Index p = cfg.beta_true.size();
  Engine eng = make_engine({cfg.seed, kDataStream, static_cast<std::uint64_t>(rep_index)});
  std::normal_distribution<double> normal(0.0, 1.0);

  Replication rep;
  rep.spec = layout;
  rep.data.X.resize(n, p);
  for (Index i = 0; i < n; ++i) {
    rep.data.X(i, 0) = 1.0;
    for (Index j = 1; j < p; ++j) rep.data.X(i, j) = normal(eng);
  }
  rep.data.column_names.push_back("(intercept)");
  for (Index j = 1; j < p; ++j) rep.data.column_names.push_back("x" + std::to_string(j));

  std::vector<char> sybil(layout.networks.size());
  std::vector<std::vector<Index>> groups;
  for (std::size_t s = 0; s < layout.networks.size(); ++s) {
    sybil[s] = uniform01(eng) < layout.networks[s].pi;
    if (sybil[s]) groups.push_back(layout.networks[s].members);
  }
  rep.realized = Topology::from_groups(n, groups);

  const auto owner = network_membership(layout);
  std::vector<std::optional<double>> shared(layout.networks.size());
  rep.errors.resize(n);
  for (Index i = 0; i < n; ++i) {
    const Index s = owner[static_cast<std::size_t>(i)];
    if (s >= 0 && sybil[static_cast<std::size_t>(s)]) {
      auto& e = shared[static_cast<std::size_t>(s)];
      if (!e) e = cfg.noise_sd * normal(eng);
      rep.errors(i) = *e;
    } else {
      rep.errors(i) = cfg.noise_sd * normal(eng);
    }
  }
  rep.data.y = rep.data.X * cfg.beta_true + rep.errors;
  return rep;
}

Replication generate_replication(const SimConfig& cfg, int rep_index) {
  return generate_replication(cfg, resolve_layout(cfg), rep_index);
}

SimRun simulate_replications(const SimConfig& cfg) {
  SimRun run;
  run.layout = resolve_layout(cfg);
  run.reps.resize(static_cast<std::size_t>(cfg.n_reps));
  std::vector<std::optional<Error>> failures(run.reps.size());

  auto work = [&](int r) {
    const Replication rep = generate_replication(cfg, run.layout, r);
    auto& out = run.reps[static_cast<std::size_t>(r)];
    for (std::size_t k = 0; k < kAllEstimators.size(); ++k) {
      const EstimatorKind kind{kAllEstimators[k], cfg.cutoff, cfg.resamples};
      const std::uint64_t seed =
          substream_seed({cfg.seed, kEstimatorStream, static_cast<std::uint64_t>(r), k});
      const FitResult fit = run_estimator(kind, rep.data, rep.spec, seed);
      out.beta[k] = fit.beta;
      out.reported_var[k] = fit.cov_beta.diagonal();
    }
  };
  auto guarded = [&](int r) {
    try {
      work(r);
    } catch (const Error& e) {
      failures[static_cast<std::size_t>(r)] =
          Error(e.code(), "replication " + std::to_string(r) + ": " + e.what());
    }
  };

  if (cfg.threads <= 1) {
    for (int r = 0; r < cfg.n_reps; ++r) guarded(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    for (int t = 0; t < cfg.threads; ++t) {
      pool.emplace_back([&] {
        for (int r = next++; r < cfg.n_reps; r = next++) guarded(r);
      });
    }
  }
  // Report the lowest failing replication so errors are schedule independent.
  for (auto& f : failures)
    if (f) throw *f;
  return run;
}

std::vector<double> squared_errors(const SimConfig& cfg, const SimRun& run, EstimatorType type) {
  std::vector<double> out;
  out.reserve(run.reps.size());
  for (const auto& r : run.reps) out.push_back((r.beta[slot(type)] - cfg.beta_true).squaredNorm());
  return out;
}

SimReport summarize(const SimConfig& cfg, const SimRun& run) {
  SimReport report;
  report.config = cfg;
  report.layout = run.layout;
  report.n_reps = static_cast<int>(run.reps.size());
  const auto reps = static_cast<double>(run.reps.size());
  const Index p = cfg.beta_true.size();

  for (EstimatorType type : kAllEstimators) {
    const std::size_t k = slot(type);
    EstimatorSummary s{type, 0.0, std::nullopt, Eigen::VectorXd::Zero(p), std::nullopt,
                       Eigen::VectorXd::Zero(p), std::nullopt};
    const auto sq = squared_errors(cfg, run, type);
    for (double e : sq) s.mse += e;
    s.mse /= reps;
    for (const auto& r : run.reps) {
      s.mean_beta += r.beta[k];
      s.mean_reported_var += r.reported_var[k];
    }
    s.mean_beta /= reps;
    s.mean_reported_var /= reps;

    if (run.reps.size() > 1) {
      double ss = 0.0;
      for (double e : sq) ss += (e - s.mse) * (e - s.mse);
      s.mc_se = std::sqrt(ss / (reps - 1.0) / reps);
      Eigen::VectorXd var = Eigen::VectorXd::Zero(p);
      for (const auto& r : run.reps) var += (r.beta[k] - s.mean_beta).array().square().matrix();
      var /= reps - 1.0;
      s.empirical_var = var;
      s.beta_mc_se = (var / reps).cwiseSqrt();
    }
    report.estimators.push_back(std::move(s));
  }
  return report;
}

SimReport run_simulation(const SimConfig& cfg) { return summarize(cfg, simulate_replications(cfg)); }

const EstimatorSummary& SimReport::get(EstimatorType type) const {
  for (const auto& s : estimators)
    if (s.type == type) return s;
  throw Error(ErrorCode::InvalidConfig, "estimator missing from report");
}

}  // namespace sybilreg
