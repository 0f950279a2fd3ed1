#include "sybilreg/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "sybilreg/error.hpp"

namespace sybilreg {

Dataset Dataset::subset(const std::vector<Index>& rows) const {
  Dataset out;
  const auto n = static_cast<Index>(rows.size());
  out.y.resize(n);
  out.X.resize(n, X.cols());
  for (Index k = 0; k < n; ++k) {
    const Index r = rows[static_cast<std::size_t>(k)];
    out.y(k) = y(r);
    out.X.row(k) = X.row(r);
  }
  if (has_row_ids()) {
    out.row_ids.reserve(rows.size());
    for (Index r : rows) out.row_ids.push_back(row_ids[static_cast<std::size_t>(r)]);
  }
  out.column_names = column_names;
  return out;
}

void validate_dataset(const Dataset& ds) {
  const Index n = ds.X.rows();
  const Index p = ds.X.cols();
  if (p < 1) throw Error(ErrorCode::InvalidDataset, "design matrix has no columns");
  if (n < p) {
    throw Error(ErrorCode::InvalidDataset,
                "need at least as many rows as columns (N=" + std::to_string(n) +
                    ", p=" + std::to_string(p) + ")");
  }
  if (ds.y.size() != n) {
    throw Error(ErrorCode::InvalidDataset, "response length " + std::to_string(ds.y.size()) +
                                               " does not match " + std::to_string(n) + " rows");
  }
  if (!ds.y.allFinite() || !ds.X.allFinite()) {
    throw Error(ErrorCode::InvalidDataset, "non-finite entry in response or design");
  }
  if (ds.has_row_ids()) {
    if (static_cast<Index>(ds.row_ids.size()) != n) {
      throw Error(ErrorCode::InvalidDataset, "row_ids length does not match the number of rows");
    }
    std::unordered_set<std::string> seen;
    for (const auto& id : ds.row_ids) {
      if (!seen.insert(id).second) {
        throw Error(ErrorCode::InvalidDataset, "duplicate row id '" + id + "'");
      }
    }
  }
  if (!ds.column_names.empty() && static_cast<Index>(ds.column_names.size()) != p) {
    throw Error(ErrorCode::InvalidDataset, "column_names length does not match the design");
  }
}

const DisjointNetworkSpec& validate_spec(const DisjointNetworkSpec& spec) {
  if (spec.n_total < 0) throw Error(ErrorCode::IndexOutOfRange, "negative observation count");
  std::vector<Index> owner(static_cast<std::size_t>(spec.n_total), -1);
  for (std::size_t s = 0; s < spec.networks.size(); ++s) {
    const auto& net = spec.networks[s];
    if (!(net.pi >= 0.0 && net.pi <= 1.0)) {
      throw Error(ErrorCode::InvalidProbability,
                  "network " + std::to_string(s) + " has pi outside [0, 1]");
    }
    if (net.members.size() < 2) {
      throw Error(ErrorCode::SingletonNetwork,
                  "network " + std::to_string(s) + " has fewer than two members");
    }
    for (std::size_t k = 0; k < net.members.size(); ++k) {
      const Index i = net.members[k];
      if (i < 0 || i >= spec.n_total) {
        throw Error(ErrorCode::IndexOutOfRange, "network " + std::to_string(s) + " member " +
                                                    std::to_string(i) + " is outside [0, " +
                                                    std::to_string(spec.n_total) + ")");
      }
      if (k > 0 && net.members[k - 1] >= i) {
        if (net.members[k - 1] == i) {
          throw Error(ErrorCode::OverlappingNetworks,
                      "network " + std::to_string(s) + " lists index " + std::to_string(i) +
                          " twice");
        }
        throw Error(ErrorCode::InvalidConfig,
                    "network " + std::to_string(s) + " members are not sorted");
      }
      auto& o = owner[static_cast<std::size_t>(i)];
      if (o != -1) {
        throw Error(ErrorCode::OverlappingNetworks,
                    "index " + std::to_string(i) + " belongs to networks " + std::to_string(o) +
                        " and " + std::to_string(s));
      }
      o = static_cast<Index>(s);
    }
  }
  return spec;
}

DisjointNetworkSpec normalized_spec(DisjointNetworkSpec spec) {
  for (auto& net : spec.networks) {
    std::sort(net.members.begin(), net.members.end());
    net.members.erase(std::unique(net.members.begin(), net.members.end()), net.members.end());
  }
  validate_spec(spec);
  return spec;
}

std::vector<Index> network_membership(const DisjointNetworkSpec& spec) {
  std::vector<Index> owner(static_cast<std::size_t>(spec.n_total), -1);
  for (std::size_t s = 0; s < spec.networks.size(); ++s) {
    for (Index i : spec.networks[s].members) owner[static_cast<std::size_t>(i)] = static_cast<Index>(s);
  }
  return owner;
}

Topology::Topology(Index n) : label_(static_cast<std::size_t>(n)) {
  std::iota(label_.begin(), label_.end(), Index{0});
}

Topology Topology::from_groups(Index n, const std::vector<std::vector<Index>>& groups) {
  Topology t(n);
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (const auto& g : groups) {
    if (g.empty()) continue;
    const Index root = *std::min_element(g.begin(), g.end());
    for (Index i : g) {
      if (i < 0 || i >= n) {
        throw Error(ErrorCode::IndexOutOfRange, "topology index " + std::to_string(i) + " out of range");
      }
      if (used[static_cast<std::size_t>(i)]) {
        throw Error(ErrorCode::OverlappingNetworks,
                    "index " + std::to_string(i) + " appears in two topology blocks");
      }
      used[static_cast<std::size_t>(i)] = true;
      t.label_[static_cast<std::size_t>(i)] = root;
    }
  }
  return t;
}

std::vector<std::vector<Index>> Topology::groups() const {
  std::vector<std::vector<Index>> by_root(label_.size());
  for (std::size_t i = 0; i < label_.size(); ++i) {
    by_root[static_cast<std::size_t>(label_[i])].push_back(static_cast<Index>(i));
  }
  std::vector<std::vector<Index>> out;
  for (auto& g : by_root) {
    if (g.size() >= 2) out.push_back(std::move(g));
  }
  return out;
}

Eigen::MatrixXd Topology::matrix() const {
  const Index n = size();
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
  for (const auto& block : groups()) {
    for (Index i : block)
      for (Index j : block) g(i, j) = 1.0;
  }
  return g;
}

void validate_distribution(const TopologyDistribution& dist) {
  if (dist.outcomes.empty()) {
    throw Error(ErrorCode::ProbabilitiesDoNotSumToOne, "distribution has no outcomes");
  }
  const Index n = dist.outcomes.front().topology.size();
  double total = 0.0;
  for (const auto& o : dist.outcomes) {
    if (!(o.prob > 0.0 && o.prob <= 1.0)) {
      throw Error(ErrorCode::InvalidProbability, "outcome probability outside (0, 1]");
    }
    if (o.topology.size() != n) {
      throw Error(ErrorCode::DimensionMismatch, "outcomes are defined over different N");
    }
    total += o.prob;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::ProbabilitiesDoNotSumToOne,
                "outcome probabilities sum to " + std::to_string(total));
  }
}

TopologyDistribution to_distribution(const DisjointNetworkSpec& spec) {
  validate_spec(spec);
  const std::size_t k = spec.networks.size();
  if (k > 20) {
    throw Error(ErrorCode::SizeRefused, "refusing to enumerate 2^" + std::to_string(k) + " topologies");
  }
  TopologyDistribution dist;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    double prob = 1.0;
    std::vector<std::vector<Index>> groups;
    for (std::size_t s = 0; s < k; ++s) {
      const auto& net = spec.networks[s];
      if (mask & (std::uint64_t{1} << s)) {
        prob *= net.pi;
        groups.push_back(net.members);
      } else {
        prob *= 1.0 - net.pi;
      }
    }
    if (prob > 0.0) dist.outcomes.push_back({prob, Topology::from_groups(spec.n_total, groups)});
  }
  return dist;
}

}  // namespace sybilreg
