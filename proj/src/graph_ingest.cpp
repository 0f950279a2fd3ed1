#include "sybilreg/graph_ingest.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "sybilreg/error.hpp"

namespace sybilreg {
namespace {

void check_pi(double pi) {
  if (!(pi >= 0.0 && pi <= 1.0)) throw Error(ErrorCode::InvalidProbability, "pi outside [0, 1]");
}

// Turns groups of wallet ids into networks over dataset rows.
DerivedSpec map_candidates(const std::vector<std::vector<std::string>>& candidates,
                           Index trees_found, double pi, const RowIndexMap& id_map) {
  DerivedSpec out;
  out.spec.n_total = id_map.n_rows;
  out.diagnostics.trees_found = trees_found;
  out.diagnostics.candidates = static_cast<Index>(candidates.size());
  for (const auto& wallets : candidates) {
    CandidateNetwork net;
    net.pi = pi;
    for (const auto& w : wallets) {
      auto it = id_map.rows.find(w);
      if (it == id_map.rows.end()) {
        ++out.diagnostics.wallets_dropped;
      } else {
        net.members.push_back(it->second);
      }
    }
    std::sort(net.members.begin(), net.members.end());
    if (net.members.size() < 2) {
      ++out.diagnostics.candidates_discarded;
      continue;
    }
    out.spec.networks.push_back(std::move(net));
  }
  std::sort(out.spec.networks.begin(), out.spec.networks.end(),
            [](const CandidateNetwork& a, const CandidateNetwork& b) {
              return a.members.front() < b.members.front();
            });
  out.diagnostics.networks = static_cast<Index>(out.spec.networks.size());
  validate_spec(out.spec);
  return out;
}

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

RowIndexMap RowIndexMap::from_dataset(const Dataset& ds) {
  if (!ds.has_row_ids()) {
    throw Error(ErrorCode::InvalidDataset, "dataset has no row ids to join wallets against");
  }
  RowIndexMap m;
  m.n_rows = ds.n_obs();
  for (std::size_t i = 0; i < ds.row_ids.size(); ++i) m.rows.emplace(ds.row_ids[i], static_cast<Index>(i));
  return m;
}

ReferralForest build_referral_forest(const std::vector<ReferralEdge>& edges) {
  std::map<std::string, std::string> parent;
  std::map<std::string, std::vector<std::string>> children;
  std::set<std::string> wallets;
  for (const auto& e : edges) {
    if (e.referrer == e.referee) {
      throw Error(ErrorCode::ReferralCycle, "wallet '" + e.referrer + "' refers itself");
    }
    auto [it, inserted] = parent.emplace(e.referee, e.referrer);
    if (!inserted) {
      if (it->second == e.referrer) continue;
      const auto& [a, b] = std::minmax(it->second, e.referrer);
      throw Error(ErrorCode::MultipleReferrers,
                  "wallet '" + e.referee + "' is referred by both '" + a + "' and '" + b + "'");
    }
    children[e.referrer].push_back(e.referee);
    wallets.insert(e.referrer);
    wallets.insert(e.referee);
  }

  ReferralForest forest;
  std::set<std::string> reached;
  for (const auto& w : wallets) {
    if (parent.count(w)) continue;
    ReferralTree tree{w, {}};
    std::vector<std::string> stack{w};
    while (!stack.empty()) {
      std::string cur = std::move(stack.back());
      stack.pop_back();
      reached.insert(cur);
      if (auto it = children.find(cur); it != children.end()) {
        for (const auto& c : it->second) stack.push_back(c);
      }
      tree.members.push_back(std::move(cur));
    }
    std::sort(tree.members.begin(), tree.members.end());
    forest.trees.push_back(std::move(tree));
  }
  // With at most one referrer each, a wallet unreachable from every root
  // sits on (or hangs below) a cycle.
  if (reached.size() != wallets.size()) {
    for (const auto& w : wallets) {
      if (!reached.count(w)) {
        throw Error(ErrorCode::ReferralCycle, "referral chain through '" + w + "' loops");
      }
    }
  }
  return forest;
}

DerivedSpec flag_large_trees(const ReferralForest& forest, Index min_size, double pi_default,
                             const RowIndexMap& id_map) {
  if (min_size < 2) throw Error(ErrorCode::InvalidConfig, "minimum tree size must be at least 2");
  check_pi(pi_default);
  std::vector<std::vector<std::string>> candidates;
  for (const auto& t : forest.trees) {
    if (static_cast<Index>(t.members.size()) >= min_size) candidates.push_back(t.members);
  }
  return map_candidates(candidates, static_cast<Index>(forest.trees.size()), pi_default, id_map);
}

DerivedSpec flag_transfer_clusters(const ReferralForest& forest,
                                   const std::vector<TransferRecord>& transfers,
                                   long min_transfers, double pi_default,
                                   const RowIndexMap& id_map) {
  if (min_transfers < 1) throw Error(ErrorCode::InvalidConfig, "minimum transfer count must be at least 1");
  check_pi(pi_default);

  // Global wallet numbering: trees in order, members in order.
  std::map<std::string, std::pair<std::size_t, std::size_t>> where;  // wallet -> (tree, slot)
  std::vector<std::size_t> offset;
  std::size_t total = 0;
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    offset.push_back(total);
    for (const auto& w : forest.trees[t].members) where.emplace(w, std::make_pair(t, total++));
  }

  std::map<std::pair<std::size_t, std::size_t>, long> pair_counts;
  for (const auto& r : transfers) {
    if (r.count < 1) throw Error(ErrorCode::ParseError, "transfer count must be positive");
    auto a = where.find(r.from);
    auto b = where.find(r.to);
    if (a == where.end() || b == where.end()) continue;
    if (a->second.first != b->second.first) continue;
    if (a->second.second == b->second.second) continue;
    const auto key = std::minmax(a->second.second, b->second.second);
    pair_counts[{key.first, key.second}] += r.count;
  }

  DisjointSets sets(total);
  for (const auto& [key, count] : pair_counts) {
    if (count >= min_transfers) sets.unite(key.first, key.second);
  }

  std::vector<std::vector<std::string>> candidates;
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    std::map<std::size_t, std::vector<std::string>> comps;
    const auto& members = forest.trees[t].members;
    for (std::size_t k = 0; k < members.size(); ++k) {
      comps[sets.find(offset[t] + k)].push_back(members[k]);
    }
    for (auto& [root, wallets] : comps) {
      if (wallets.size() >= 2) candidates.push_back(std::move(wallets));
    }
  }
  return map_candidates(candidates, static_cast<Index>(forest.trees.size()), pi_default, id_map);
}

}  // namespace sybilreg
