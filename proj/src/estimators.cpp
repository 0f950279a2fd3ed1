#include "sybilreg/estimators.hpp"

#include <string>
#include <vector>

#include "sybilreg/error.hpp"
#include "sybilreg/random.hpp"
#include "sybilreg/regression.hpp"
#include "sybilreg/weights.hpp"

namespace sybilreg {
namespace {

void check_inputs(const Dataset& ds, const DisjointNetworkSpec& spec) {
  validate_dataset(ds);
  validate_spec(spec);
  if (spec.n_total != ds.n_obs()) {
    throw Error(ErrorCode::DimensionMismatch, "spec covers " + std::to_string(spec.n_total) +
                                                  " rows but the dataset has " +
                                                  std::to_string(ds.n_obs()));
  }
}

FitResult fit_rows(const Dataset& ds, const std::vector<Index>& rows, std::string_view name) {
  if (static_cast<Index>(rows.size()) < ds.n_params()) {
    throw Error(ErrorCode::InsufficientData,
                std::string(name) + " keeps " + std::to_string(rows.size()) +
                    " rows, fewer than the " + std::to_string(ds.n_params()) + " parameters");
  }
  FitResult fit = ols_fit(ds.subset(rows));
  fit.meta.estimator = std::string(name);
  return fit;
}

// Rows whose network (if any) passes `keep_network`.
template <typename Pred>
std::vector<Index> rows_where(const DisjointNetworkSpec& spec, Pred keep_network) {
  const auto owner = network_membership(spec);
  std::vector<Index> rows;
  rows.reserve(owner.size());
  for (std::size_t i = 0; i < owner.size(); ++i) {
    if (owner[i] < 0 || keep_network(spec.networks[static_cast<std::size_t>(owner[i])])) {
      rows.push_back(static_cast<Index>(i));
    }
  }
  return rows;
}

enum class SampleUnit { Network, Observation };

FitResult fit_sampled(const Dataset& ds, const DisjointNetworkSpec& spec, int resamples,
                      std::uint64_t seed, SampleUnit unit) {
  check_inputs(ds, spec);
  const std::string_view name = to_string(unit == SampleUnit::Network
                                              ? EstimatorType::NetworkSampled
                                              : EstimatorType::ObservationSampled);
  if (resamples < 1) {
    throw Error(ErrorCode::InvalidConfig, "resample count must be at least 1");
  }
  const Index n = ds.n_obs();
  const Index p = ds.n_params();
  const long max_attempts = 10L * resamples;

  std::vector<Eigen::VectorXd> draws;
  draws.reserve(static_cast<std::size_t>(resamples));
  double sigma2_sum = 0.0;
  long attempt = 0;
  std::vector<char> keep(static_cast<std::size_t>(n));
  std::vector<Index> rows;
  while (static_cast<int>(draws.size()) < resamples) {
    if (attempt >= max_attempts) {
      throw Error(ErrorCode::InsufficientData,
                  std::string(name) + " found only " + std::to_string(draws.size()) +
                      " usable resamples in " + std::to_string(max_attempts) + " attempts");
    }
    Engine eng = make_engine({seed, static_cast<std::uint64_t>(attempt)});
    ++attempt;

    std::fill(keep.begin(), keep.end(), char{1});
    for (const auto& net : spec.networks) {
      const double p_keep = 1.0 - net.pi;
      if (unit == SampleUnit::Network) {
        const bool k = uniform01(eng) < p_keep;
        for (Index i : net.members) keep[static_cast<std::size_t>(i)] = k;
      } else {
        for (Index i : net.members) keep[static_cast<std::size_t>(i)] = uniform01(eng) < p_keep;
      }
    }
    rows.clear();
    for (Index i = 0; i < n; ++i)
      if (keep[static_cast<std::size_t>(i)]) rows.push_back(i);
    if (static_cast<Index>(rows.size()) < p) continue;

    try {
      FitResult f = ols_fit(ds.subset(rows));
      draws.push_back(std::move(f.beta));
      sigma2_sum += f.sigma2_hat;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RankDeficientDesign) throw;
    }
  }

  const auto b = static_cast<double>(resamples);
  FitResult fit;
  fit.beta = Eigen::VectorXd::Zero(p);
  for (const auto& d : draws) fit.beta += d;
  fit.beta /= b;
  fit.cov_beta = Eigen::MatrixXd::Zero(p, p);
  if (resamples > 1) {
    for (const auto& d : draws) {
      const Eigen::VectorXd dev = d - fit.beta;
      fit.cov_beta.noalias() += dev * dev.transpose();
    }
    fit.cov_beta /= (b - 1.0) * b;
  } else {
    fit.meta.notes.emplace_back("single resample: covariance undefined, reported as zero");
  }
  fit.se = fit.cov_beta.diagonal().cwiseSqrt();
  fit.sigma2_hat = sigma2_sum / b;

  fit.meta.estimator = std::string(name);
  fit.meta.sigma2_convention = "mean over resamples of RSS / (n_b - p)";
  fit.meta.n_used = n;
  fit.meta.residual_dof = n - p;
  fit.meta.heuristic_covariance = true;
  fit.meta.resamples = resamples;
  fit.meta.attempts = static_cast<int>(attempt);
  fit.meta.notes.emplace_back(
      "beta is the average of per-resample OLS coefficients; covariance is the empirical "
      "covariance of the resampled coefficients divided by B (heuristic)");
  return fit;
}

}  // namespace

std::string_view to_string(EstimatorType type) {
  switch (type) {
    case EstimatorType::Exclusion: return "exclusion";
    case EstimatorType::Inclusion: return "inclusion";
    case EstimatorType::Threshold: return "threshold";
    case EstimatorType::NetworkSampled: return "network-sampled";
    case EstimatorType::ObservationSampled: return "observation-sampled";
    case EstimatorType::Weighted: return "weighted";
  }
  return "unknown";
}

std::optional<EstimatorType> parse_estimator(std::string_view name) {
  for (EstimatorType t : kAllEstimators) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

void validate_kind(const EstimatorKind& kind) {
  if (!(kind.cutoff >= 0.0 && kind.cutoff <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "threshold cutoff must lie in [0, 1]");
  }
  if (kind.resamples < 1) throw Error(ErrorCode::InvalidConfig, "resample count must be at least 1");
}

FitResult fit_exclusion(const Dataset& ds, const DisjointNetworkSpec& spec) {
  check_inputs(ds, spec);
  return fit_rows(ds, rows_where(spec, [](const CandidateNetwork&) { return false; }), "exclusion");
}

FitResult fit_inclusion(const Dataset& ds, const DisjointNetworkSpec& spec) {
  check_inputs(ds, spec);
  FitResult fit = ols_fit(ds);
  fit.meta.estimator = "inclusion";
  return fit;
}

FitResult fit_threshold(const Dataset& ds, const DisjointNetworkSpec& spec, double cutoff) {
  check_inputs(ds, spec);
  validate_kind({EstimatorType::Threshold, cutoff, 1});
  FitResult fit = fit_rows(
      ds, rows_where(spec, [cutoff](const CandidateNetwork& c) { return !(c.pi > cutoff); }),
      "threshold");
  fit.meta.notes.push_back("excluded networks with pi > " + std::to_string(cutoff));
  return fit;
}

FitResult fit_network_sampled(const Dataset& ds, const DisjointNetworkSpec& spec, int resamples,
                              std::uint64_t seed) {
  return fit_sampled(ds, spec, resamples, seed, SampleUnit::Network);
}

FitResult fit_observation_sampled(const Dataset& ds, const DisjointNetworkSpec& spec,
                                  int resamples, std::uint64_t seed) {
  return fit_sampled(ds, spec, resamples, seed, SampleUnit::Observation);
}

FitResult fit_weighted(const Dataset& ds, const DisjointNetworkSpec& spec) {
  check_inputs(ds, spec);
  auto [rolled, rest] = roll_up_guaranteed(ds, spec);
  FitResult fit = weighted_fit(rolled, optimal_weights_closed_form(rest));
  if (rolled.n_obs() != ds.n_obs()) {
    fit.meta.notes.push_back("collapsed " + std::to_string(spec.networks.size() - rest.networks.size()) +
                             " guaranteed network(s) into mean rows before weighting");
  }
  return fit;
}

FitResult run_estimator(const EstimatorKind& kind, const Dataset& ds,
                        const DisjointNetworkSpec& spec, std::uint64_t seed) {
  validate_kind(kind);
  switch (kind.type) {
    case EstimatorType::Exclusion: return fit_exclusion(ds, spec);
    case EstimatorType::Inclusion: return fit_inclusion(ds, spec);
    case EstimatorType::Threshold: return fit_threshold(ds, spec, kind.cutoff);
    case EstimatorType::NetworkSampled: return fit_network_sampled(ds, spec, kind.resamples, seed);
    case EstimatorType::ObservationSampled:
      return fit_observation_sampled(ds, spec, kind.resamples, seed);
    case EstimatorType::Weighted: return fit_weighted(ds, spec);
  }
  throw Error(ErrorCode::InvalidConfig, "unknown estimator");
}

}  // namespace sybilreg
