#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "sybilreg/model.hpp"

namespace sybilreg {

enum class EstimatorType {
  Exclusion,
  Inclusion,
  Threshold,
  NetworkSampled,
  ObservationSampled,
  Weighted,
};

inline constexpr std::array<EstimatorType, 6> kAllEstimators = {
    EstimatorType::Exclusion,      EstimatorType::Inclusion,          EstimatorType::Threshold,
    EstimatorType::NetworkSampled, EstimatorType::ObservationSampled, EstimatorType::Weighted,
};

std::string_view to_string(EstimatorType type);
/// Accepts the names produced by to_string ("network-sampled", ...).
std::optional<EstimatorType> parse_estimator(std::string_view name);

/// Estimator choice plus its tuning: `cutoff` only matters for Threshold,
/// `resamples` only for the two sampled kinds.
struct EstimatorKind {
  EstimatorType type = EstimatorType::Weighted;
  double cutoff = 0.5;
  int resamples = 100;
};

void validate_kind(const EstimatorKind& kind);

/// OLS on the rows outside every candidate network, whatever its pi.
FitResult fit_exclusion(const Dataset& ds, const DisjointNetworkSpec& spec);
/// OLS on every row.
FitResult fit_inclusion(const Dataset& ds, const DisjointNetworkSpec& spec);
/// OLS without the rows of networks whose pi is strictly above `cutoff`.
FitResult fit_threshold(const Dataset& ds, const DisjointNetworkSpec& spec, double cutoff = 0.5);

/// Averages B OLS fits, each keeping every network whole with probability
/// 1 - pi (independently per network). Covariance is the spread of the B
/// draws divided by B and is flagged heuristic. Resample b uses substream
/// {seed, attempt}, so results do not depend on evaluation order.
FitResult fit_network_sampled(const Dataset& ds, const DisjointNetworkSpec& spec, int resamples,
                              std::uint64_t seed);
/// As fit_network_sampled, but every network member is kept independently.
FitResult fit_observation_sampled(const Dataset& ds, const DisjointNetworkSpec& spec,
                                  int resamples, std::uint64_t seed);

/// Rolls up pi == 1 networks, then fits with the closed-form optimal weights.
FitResult fit_weighted(const Dataset& ds, const DisjointNetworkSpec& spec);

FitResult run_estimator(const EstimatorKind& kind, const Dataset& ds,
                        const DisjointNetworkSpec& spec, std::uint64_t seed);

}  // namespace sybilreg
