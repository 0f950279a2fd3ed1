#include "sybilreg/weights.hpp"

#include <algorithm>
#include <string>

#include "sybilreg/error.hpp"

namespace sybilreg {

ExpectedTopology ExpectedTopology::from_spec(DisjointNetworkSpec spec) {
  validate_spec(spec);
  ExpectedTopology et;
  et.owner_ = network_membership(spec);
  et.block_ = std::move(spec);
  return et;
}

ExpectedTopology ExpectedTopology::from_dense(Eigen::MatrixXd matrix) {
  if (matrix.rows() != matrix.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "expected topology must be square");
  }
  ExpectedTopology et;
  et.dense_ = std::move(matrix);
  return et;
}

Index ExpectedTopology::size() const { return block_ ? block_->n_total : dense_.rows(); }

double ExpectedTopology::at(Index i, Index j) const {
  if (!block_) return dense_(i, j);
  if (i == j) return 1.0;
  const Index s = owner_[static_cast<std::size_t>(i)];
  if (s < 0 || s != owner_[static_cast<std::size_t>(j)]) return 0.0;
  return block_->networks[static_cast<std::size_t>(s)].pi;
}

Eigen::MatrixXd ExpectedTopology::dense() const {
  if (!block_) return dense_;
  const Index n = block_->n_total;
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
  for (const auto& net : block_->networks) {
    for (Index i : net.members)
      for (Index j : net.members)
        if (i != j) m(i, j) = net.pi;
  }
  return m;
}

BlockWeights::BlockWeights(Index n_total, std::vector<WeightBlock> blocks)
    : n_total_(n_total), blocks_(std::move(blocks)), owner_(static_cast<std::size_t>(n_total), -1) {
  for (std::size_t s = 0; s < blocks_.size(); ++s) {
    for (Index i : blocks_[s].members) {
      if (i < 0 || i >= n_total_) {
        throw Error(ErrorCode::IndexOutOfRange, "weight block member out of range");
      }
      if (owner_[static_cast<std::size_t>(i)] != -1) {
        throw Error(ErrorCode::OverlappingNetworks, "weight blocks overlap");
      }
      owner_[static_cast<std::size_t>(i)] = static_cast<Index>(s);
    }
  }
}

double BlockWeights::at(Index i, Index j) const {
  const Index s = block_of(i);
  if (s < 0) return i == j ? 1.0 : 0.0;
  if (s != block_of(j)) return 0.0;
  const auto& b = blocks_[static_cast<std::size_t>(s)];
  return i == j ? b.diag : b.offdiag;
}

double BlockWeights::row_sum(Index i) const {
  const Index s = block_of(i);
  if (s < 0) return 1.0;
  const auto& b = blocks_[static_cast<std::size_t>(s)];
  return b.diag + static_cast<double>(b.members.size() - 1) * b.offdiag;
}

Eigen::MatrixXd BlockWeights::dense() const {
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(n_total_, n_total_);
  for (const auto& b : blocks_) {
    for (Index i : b.members)
      for (Index j : b.members) w(i, j) = i == j ? b.diag : b.offdiag;
  }
  return w;
}

Index weight_size(const WeightMatrix& w) {
  return std::visit(
      [](const auto& m) -> Index {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, BlockWeights>) {
          return m.size();
        } else {
          return m.matrix.rows();
        }
      },
      w);
}

Eigen::MatrixXd to_dense(const WeightMatrix& w) {
  if (const auto* b = std::get_if<BlockWeights>(&w)) return b->dense();
  return std::get<DenseWeights>(w).matrix;
}

ExpectedTopology expected_topology_disjoint(const DisjointNetworkSpec& spec) {
  return ExpectedTopology::from_spec(spec);
}

ExpectedTopology expected_topology_general(const TopologyDistribution& dist) {
  validate_distribution(dist);
  const Index n = dist.outcomes.front().topology.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (const auto& o : dist.outcomes) {
    for (const auto& block : o.topology.groups()) {
      for (Index i : block)
        for (Index j : block)
          if (i != j) m(i, j) += o.prob;
    }
  }
  // Every outcome contributes 1 on the diagonal; the probabilities sum to 1.
  m.diagonal().setOnes();
  return ExpectedTopology::from_dense(std::move(m));
}

BlockWeights optimal_weights_closed_form(const DisjointNetworkSpec& spec) {
  validate_spec(spec);
  std::vector<WeightBlock> blocks;
  blocks.reserve(spec.networks.size());
  for (std::size_t s = 0; s < spec.networks.size(); ++s) {
    const auto& net = spec.networks[s];
    if (net.pi >= 1.0) {
      throw Error(ErrorCode::GuaranteedNetwork,
                  "network " + std::to_string(s) +
                      " has pi = 1; collapse it with roll_up_guaranteed before weighting");
    }
    const double n = static_cast<double>(net.members.size());
    const double pi = net.pi;
    const double denom = (1.0 - pi) * (1.0 + (n - 1.0) * pi);
    WeightBlock b;
    b.members = net.members;
    b.pi = pi;
    b.diag = (1.0 + (n - 2.0) * pi) / denom;
    b.offdiag = -pi / denom;
    blocks.push_back(std::move(b));
  }
  return BlockWeights(spec.n_total, std::move(blocks));
}

DenseWeights optimal_weights_general(const ExpectedTopology& et) {
  const Eigen::MatrixXd g = et.dense();
  const Index n = g.rows();
  if (n == 0) return {Eigen::MatrixXd(0, 0)};
  Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
  const double tol = 1e-10 * static_cast<double>(n);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() < tol) {
    throw Error(ErrorCode::SingularTopology,
                "expected topology is rank deficient (a network is linked with probability 1); "
                "collapse guaranteed networks with roll_up_guaranteed first");
  }
  Eigen::MatrixXd w = ldlt.solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::MatrixXd sym = 0.5 * (w + w.transpose());
  return {std::move(sym)};
}

std::pair<Dataset, DisjointNetworkSpec> roll_up_guaranteed(const Dataset& ds,
                                                           const DisjointNetworkSpec& spec) {
  validate_spec(spec);
  if (spec.n_total != ds.n_obs()) {
    throw Error(ErrorCode::DimensionMismatch, "spec covers " + std::to_string(spec.n_total) +
                                                  " rows but the dataset has " +
                                                  std::to_string(ds.n_obs()));
  }
  const bool any_guaranteed = std::any_of(spec.networks.begin(), spec.networks.end(),
                                          [](const CandidateNetwork& c) { return c.pi >= 1.0; });
  if (!any_guaranteed) return {ds, spec};

  const Index n = ds.n_obs();
  // Rows absorbed into an earlier representative are dropped; representatives
  // are the smallest member of each guaranteed network.
  std::vector<Index> collapsed_into(static_cast<std::size_t>(n), -1);
  for (const auto& net : spec.networks) {
    if (net.pi < 1.0) continue;
    for (Index i : net.members) collapsed_into[static_cast<std::size_t>(i)] = net.members.front();
  }
  std::vector<Index> new_index(static_cast<std::size_t>(n), -1);
  Index next = 0;
  for (Index i = 0; i < n; ++i) {
    const Index c = collapsed_into[static_cast<std::size_t>(i)];
    if (c == -1 || c == i) new_index[static_cast<std::size_t>(i)] = next++;
  }

  Dataset out;
  out.y.resize(next);
  out.X.resize(next, ds.n_params());
  out.column_names = ds.column_names;
  if (ds.has_row_ids()) out.row_ids.resize(static_cast<std::size_t>(next));
  for (Index i = 0; i < n; ++i) {
    const Index k = new_index[static_cast<std::size_t>(i)];
    if (k < 0) continue;
    out.y(k) = ds.y(i);
    out.X.row(k) = ds.X.row(i);
    if (ds.has_row_ids()) out.row_ids[static_cast<std::size_t>(k)] = ds.row_ids[static_cast<std::size_t>(i)];
  }

  DisjointNetworkSpec rest;
  rest.n_total = next;
  for (const auto& net : spec.networks) {
    if (net.pi >= 1.0) {
      const Index k = new_index[static_cast<std::size_t>(net.members.front())];
      const auto m = static_cast<double>(net.members.size());
      double ysum = 0.0;
      Eigen::RowVectorXd xsum = Eigen::RowVectorXd::Zero(ds.n_params());
      std::string id;
      for (Index i : net.members) {
        ysum += ds.y(i);
        xsum += ds.X.row(i);
        if (ds.has_row_ids()) {
          if (!id.empty()) id += '|';
          id += ds.row_ids[static_cast<std::size_t>(i)];
        }
      }
      out.y(k) = ysum / m;
      out.X.row(k) = xsum / m;
      if (ds.has_row_ids()) out.row_ids[static_cast<std::size_t>(k)] = id;
      continue;
    }
    CandidateNetwork moved{{}, net.pi};
    moved.members.reserve(net.members.size());
    for (Index i : net.members) moved.members.push_back(new_index[static_cast<std::size_t>(i)]);
    rest.networks.push_back(std::move(moved));
  }
  return {std::move(out), std::move(rest)};
}

double simple_ratio(double pi, Index n) {
  if (!(pi >= 0.0 && pi <= 1.0)) throw Error(ErrorCode::InvalidProbability, "pi outside [0, 1]");
  if (n < 1) throw Error(ErrorCode::InvalidConfig, "network size must be at least 1");
  return 1.0 + pi * static_cast<double>(n - 1);
}

}  // namespace sybilreg
