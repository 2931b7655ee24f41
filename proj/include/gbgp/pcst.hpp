#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gbgp/graph.hpp"

namespace gbgp {

// Prize-collecting Steiner forest instance. Edge cost of edge e is
// edge_cost_multiplier * graph.edges()[e].weight.
struct PcstInstance {
  const Graph& graph;
  std::span<const double> prizes;
  double edge_cost_multiplier = 1.0;
  std::optional<NodeId> root;
  int target_components = 1;
};

struct PcstForest {
  std::vector<NodeId> nodes;        // sorted
  std::vector<std::int32_t> edges;  // sorted edge indices
};

// Goemans-Williamson moat growing followed by strong pruning.
//
// Unrooted: clusters grow until at most target_components remain active;
// every resulting tree is strongly pruned from its best root and the
// target_components trees of largest net worth are returned (ties go to the
// tree with the smaller lowest node id). Trees with non-positive net worth are
// dropped, so an all-zero prize vector yields an empty forest.
//
// Rooted: the root's cluster never grows; the returned tree is the root's
// cluster pruned from the root.
PcstForest pcst(const PcstInstance& instance);

// Net worth of a node set under the instance: prizes collected minus the cost
// of the given edges.
double pcst_net_worth(const PcstInstance& instance, const PcstForest& forest);

}  // namespace gbgp
