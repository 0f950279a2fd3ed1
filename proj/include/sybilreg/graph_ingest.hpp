#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "sybilreg/model.hpp"

namespace sybilreg {

struct ReferralEdge {
  std::string referrer;
  std::string referee;
};

struct TransferRecord {
  std::string from;
  std::string to;
  long count = 1;
};

struct ReferralTree {
  std::string root;
  std::vector<std::string> members;  // sorted, includes the root
};

/// Trees sorted by root id; independent of edge order.
struct ReferralForest {
  std::vector<ReferralTree> trees;
};

/// Maps wallet ids onto dataset rows.
struct RowIndexMap {
  std::unordered_map<std::string, Index> rows;
  Index n_rows = 0;

  static RowIndexMap from_dataset(const Dataset& ds);
};

struct IngestDiagnostics {
  Index trees_found = 0;
  Index candidates = 0;          // trees (or transfer components) meeting the threshold
  Index networks = 0;            // candidates that survived id mapping
  Index wallets_dropped = 0;     // flagged wallets absent from the dataset
  Index candidates_discarded = 0;  // candidates left with fewer than two mapped rows
};

struct DerivedSpec {
  DisjointNetworkSpec spec;
  IngestDiagnostics diagnostics;
};

/// Groups wallets into maximal referral trees. Throws MultipleReferrers if a
/// wallet has two distinct referrers and ReferralCycle if any referral chain
/// loops (including self-referrals). Repeated identical edges are ignored.
ReferralForest build_referral_forest(const std::vector<ReferralEdge>& edges);

/// One candidate network per tree with at least `min_size` wallets.
DerivedSpec flag_large_trees(const ReferralForest& forest, Index min_size, double pi_default,
                             const RowIndexMap& id_map);

/// Within each tree, links wallet pairs whose combined transfer count (both
/// directions, summed over records) reaches `min_transfers`; each connected
/// component becomes a candidate network. Transfers that leave a tree, or
/// touch wallets outside every tree, are ignored.
DerivedSpec flag_transfer_clusters(const ReferralForest& forest,
                                   const std::vector<TransferRecord>& transfers,
                                   long min_transfers, double pi_default,
                                   const RowIndexMap& id_map);

}  // namespace sybilreg
