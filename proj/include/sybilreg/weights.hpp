#pragma once

#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "sybilreg/model.hpp"

namespace sybilreg {

/// Linkage-probability matrix: entry (i, j) is the probability that rows i
/// and j are controlled by the same actor. Kept in block form when it comes
/// from a disjoint spec, dense otherwise.
class ExpectedTopology {
 public:
  static ExpectedTopology from_spec(DisjointNetworkSpec spec);
  static ExpectedTopology from_dense(Eigen::MatrixXd matrix);

  Index size() const;
  bool is_block() const { return block_.has_value(); }
  const DisjointNetworkSpec& block() const { return *block_; }

  double at(Index i, Index j) const;

  /// Materializes the N x N matrix (intended for N up to a few thousand).
  Eigen::MatrixXd dense() const;

 private:
  std::optional<DisjointNetworkSpec> block_;
  std::vector<Index> owner_;
  Eigen::MatrixXd dense_;
};

/// One network's slice of a block-sparse weight matrix: `diag` on the
/// diagonal and `offdiag` between distinct members.
struct WeightBlock {
  std::vector<Index> members;
  double pi = 0.0;
  double diag = 1.0;
  double offdiag = 0.0;
};

/// Block-diagonal weights with unit weight for rows outside every block.
/// Storage is the member lists plus two scalars per block.
class BlockWeights {
 public:
  BlockWeights(Index n_total, std::vector<WeightBlock> blocks);

  Index size() const { return n_total_; }
  const std::vector<WeightBlock>& blocks() const { return blocks_; }
  /// -1 for rows with unit weight.
  Index block_of(Index i) const { return owner_[static_cast<std::size_t>(i)]; }

  double at(Index i, Index j) const;
  double row_sum(Index i) const;
  Eigen::MatrixXd dense() const;

 private:
  Index n_total_;
  std::vector<WeightBlock> blocks_;
  std::vector<Index> owner_;
};

struct DenseWeights {
  Eigen::MatrixXd matrix;
};

using WeightMatrix = std::variant<BlockWeights, DenseWeights>;

Index weight_size(const WeightMatrix& w);
Eigen::MatrixXd to_dense(const WeightMatrix& w);

/// Unit diagonal, pi_s between members of network s, zero elsewhere.
ExpectedTopology expected_topology_disjoint(const DisjointNetworkSpec& spec);

/// Probability-weighted sum of the 0/1 matrix forms of every outcome.
ExpectedTopology expected_topology_general(const TopologyDistribution& dist);

/// Per-network closed-form inverse of the expected topology; no matrix is
/// inverted. For a network of size n with probability pi:
///   diag    = (1 + (n - 2) pi) / ((1 - pi) (1 + (n - 1) pi))
///   offdiag = -pi / ((1 - pi) (1 + (n - 1) pi))
/// Throws GuaranteedNetwork when some pi equals 1; roll those up first.
BlockWeights optimal_weights_closed_form(const DisjointNetworkSpec& spec);

/// Dense inverse of the expected topology. Throws SingularTopology when the
/// smallest LDLT pivot falls below 1e-10 * N.
DenseWeights optimal_weights_general(const ExpectedTopology& et);

/// Collapses every network with pi == 1 into one synthetic row holding the
/// member means of y and X, placed at the position of its smallest member.
/// Other networks are re-indexed to the shrunken row numbering.
std::pair<Dataset, DisjointNetworkSpec> roll_up_guaranteed(const Dataset& ds,
                                                           const DisjointNetworkSpec& spec);

/// Approximate weight of an independent row relative to a member of a
/// suspected network of size n: 1 + pi (n - 1).
double simple_ratio(double pi, Index n);

}  // namespace sybilreg
