#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sybilreg {

using Index = Eigen::Index;

/// Response vector plus design matrix. Row identity is positional; `row_ids`
/// are only used for joins against external files and for reporting.
struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::vector<std::string> row_ids;       // empty, or one unique id per row
  std::vector<std::string> column_names;  // empty, or one name per column of X

  Index n_obs() const { return X.rows(); }
  Index n_params() const { return X.cols(); }
  bool has_row_ids() const { return !row_ids.empty(); }

  /// Copy of the rows listed in `rows` (in that order).
  Dataset subset(const std::vector<Index>& rows) const;
};

/// Throws InvalidDataset unless N >= p >= 1, all entries are finite and the
/// row ids (if any) are unique and cover every row.
void validate_dataset(const Dataset& ds);

/// A group of rows that is, with probability `pi`, controlled by one actor.
struct CandidateNetwork {
  std::vector<Index> members;  // sorted, unique, size >= 2
  double pi = 0.0;

  Index size() const { return static_cast<Index>(members.size()); }
  friend bool operator==(const CandidateNetwork&, const CandidateNetwork&) = default;
};

/// Pairwise-disjoint candidate networks over `n_total` observations. Rows
/// outside every network are independent.
struct DisjointNetworkSpec {
  std::vector<CandidateNetwork> networks;
  Index n_total = 0;

  friend bool operator==(const DisjointNetworkSpec&, const DisjointNetworkSpec&) = default;
};

/// Returns its argument unchanged if it is well formed. Throws
/// OverlappingNetworks, IndexOutOfRange, InvalidProbability or
/// SingletonNetwork otherwise. Member lists must already be sorted.
const DisjointNetworkSpec& validate_spec(const DisjointNetworkSpec& spec);

/// Sorts and deduplicates every member list, then validates.
DisjointNetworkSpec normalized_spec(DisjointNetworkSpec spec);

/// -1 for independent rows, otherwise the position of the owning network.
std::vector<Index> network_membership(const DisjointNetworkSpec& spec);

/// Partition of {0..n-1} into actors. Stored as a canonical label per index
/// (the smallest index of its block), so equal partitions compare equal.
class Topology {
 public:
  explicit Topology(Index n = 0);

  /// Blocks not listed are singletons. Groups must be disjoint.
  static Topology from_groups(Index n, const std::vector<std::vector<Index>>& groups);

  Index size() const { return static_cast<Index>(label_.size()); }
  Index label(Index i) const { return label_[static_cast<std::size_t>(i)]; }
  bool linked(Index i, Index j) const { return label(i) == label(j); }

  /// Blocks of size >= 2, ordered by smallest member.
  std::vector<std::vector<Index>> groups() const;

  /// Symmetric 0/1 matrix with ones exactly where two indices share an actor.
  Eigen::MatrixXd matrix() const;

  friend bool operator==(const Topology&, const Topology&) = default;

 private:
  std::vector<Index> label_;
};

struct TopologyOutcome {
  double prob = 0.0;
  Topology topology;
};

/// Finite distribution over partitions of the same N observations.
struct TopologyDistribution {
  std::vector<TopologyOutcome> outcomes;
};

/// Throws InvalidProbability, DimensionMismatch or
/// ProbabilitiesDoNotSumToOne (tolerance 1e-12).
void validate_distribution(const TopologyDistribution& dist);

/// Expands a disjoint spec into its 2^K all-or-nothing outcomes. Outcomes
/// with probability zero (pi of exactly 0 or 1) are omitted. Refuses K > 20.
TopologyDistribution to_distribution(const DisjointNetworkSpec& spec);

/// Free-form notes about how a fit was produced, echoed into result files.
struct FitMetadata {
  std::string estimator;
  std::string sigma2_convention = "weighted residuals r'Wr / (N - p)";
  Index n_used = 0;
  Index residual_dof = 0;
  bool heuristic_covariance = false;
  std::optional<int> resamples;
  std::optional<int> attempts;
  std::vector<std::string> notes;
};

struct FitResult {
  Eigen::VectorXd beta;
  double sigma2_hat = 0.0;
  Eigen::MatrixXd cov_beta;
  Eigen::VectorXd se;
  FitMetadata meta;
};

}  // namespace sybilreg
