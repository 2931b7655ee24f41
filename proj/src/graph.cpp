#include "gbgp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <unordered_set>

#include "gbgp/error.hpp"

namespace gbgp {

namespace {

std::uint64_t pair_key(NodeId u, NodeId v) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
         static_cast<std::uint32_t>(v);
}

}  // namespace

Graph::Graph(NodeId node_count, std::vector<Edge> edges)
    : node_count_(node_count), edges_(std::move(edges)) {
  if (node_count_ < 0) throw ValidationError("negative node count");
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(edges_.size() * 2);
  std::vector<std::int64_t> degree(static_cast<std::size_t>(node_count_) + 1, 0);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    Edge& e = edges_[i];
    if (e.u < 0 || e.v < 0 || e.u >= node_count_ || e.v >= node_count_) {
      throw ValidationError("edge " + std::to_string(i) + " has node id out of range");
    }
    if (e.u == e.v) {
      throw ValidationError("self-loop on node " + std::to_string(e.u));
    }
    if (!std::isfinite(e.weight) || e.weight <= 0.0) {
      throw ValidationError("edge " + std::to_string(i) + " has non-positive weight");
    }
    if (e.u > e.v) std::swap(e.u, e.v);
    if (!seen.insert(pair_key(e.u, e.v)).second) {
      throw ValidationError("duplicate edge (" + std::to_string(e.u) + ", " +
                            std::to_string(e.v) + ")");
    }
    ++degree[e.u];
    ++degree[e.v];
  }

  offsets_.assign(static_cast<std::size_t>(node_count_) + 1, 0);
  for (NodeId v = 0; v < node_count_; ++v) offsets_[v + 1] = offsets_[v] + degree[v];
  adjacency_.resize(edges_.size() * 2);
  adjacent_edge_.resize(edges_.size() * 2);
  std::vector<std::int64_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    adjacency_[cursor[e.u]] = e.v;
    adjacent_edge_[cursor[e.u]++] = static_cast<std::int32_t>(i);
    adjacency_[cursor[e.v]] = e.u;
    adjacent_edge_[cursor[e.v]++] = static_cast<std::int32_t>(i);
  }
}

BlockPartition::BlockPartition(const Graph& graph, std::vector<int> assignment,
                               int block_count)
    : block_count_(block_count), assignment_(std::move(assignment)) {
  if (block_count_ < 1) throw ValidationError("block count must be >= 1");
  if (static_cast<NodeId>(assignment_.size()) != graph.node_count()) {
    throw ValidationError("partition has " + std::to_string(assignment_.size()) +
                          " entries for a graph with " +
                          std::to_string(graph.node_count()) + " nodes");
  }
  block_nodes_.resize(block_count_);
  local_index_.resize(assignment_.size());
  for (NodeId v = 0; v < graph.node_count(); ++v) {
    const int k = assignment_[v];
    if (k < 0 || k >= block_count_) {
      throw ValidationError("node " + std::to_string(v) + " has block id " +
                            std::to_string(k) + " outside [0, " +
                            std::to_string(block_count_) + ")");
    }
    local_index_[v] = static_cast<NodeId>(block_nodes_[k].size());
    block_nodes_[k].push_back(v);
  }

  intra_edges_.resize(block_count_);
  std::vector<std::vector<Edge>> local_edges(block_count_);
  const auto& edges = graph.edges();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    const int ku = assignment_[e.u];
    if (ku == assignment_[e.v]) {
      intra_edges_[ku].push_back(static_cast<std::int32_t>(i));
      local_edges[ku].push_back({local_index_[e.u], local_index_[e.v], e.weight});
    } else {
      cut_edges_.push_back(static_cast<std::int32_t>(i));
    }
  }
  block_graphs_.reserve(block_count_);
  for (int k = 0; k < block_count_; ++k) {
    block_graphs_.emplace_back(static_cast<NodeId>(block_nodes_[k].size()),
                               std::move(local_edges[k]));
  }
}

std::vector<std::vector<NodeId>> connected_components(const Graph& graph,
                                                      std::span<const NodeId> nodes) {
  const NodeId n = graph.node_count();
  std::vector<char> member(static_cast<std::size_t>(n), 0);
  for (NodeId v : nodes) {
    if (v < 0 || v >= n) throw ValidationError("node id " + std::to_string(v) + " out of range");
    member[v] = 1;
  }
  std::vector<NodeId> sorted(nodes.begin(), nodes.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::vector<std::vector<NodeId>> components;
  std::vector<NodeId> stack;
  for (NodeId start : sorted) {
    if (member[start] != 1) continue;
    std::vector<NodeId> component;
    member[start] = 2;
    stack.push_back(start);
    while (!stack.empty()) {
      const NodeId v = stack.back();
      stack.pop_back();
      component.push_back(v);
      for (NodeId w : graph.neighbors(v)) {
        if (member[w] == 1) {
          member[w] = 2;
          stack.push_back(w);
        }
      }
    }
    std::sort(component.begin(), component.end());
    components.push_back(std::move(component));
  }
  return components;
}

BlockPartition partition_contiguous(const Graph& graph, int block_count) {
  const NodeId n = graph.node_count();
  if (block_count < 1 || block_count > std::max<NodeId>(n, 1)) {
    throw ValidationError("block count " + std::to_string(block_count) +
                          " outside [1, " + std::to_string(n) + "]");
  }
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  const NodeId base = n / block_count;
  const NodeId extra = n % block_count;

  std::deque<NodeId> frontier;
  NodeId next_seed = 0;
  for (int k = 0; k < block_count; ++k) {
    const NodeId target = base + (k < extra ? 1 : 0);
    NodeId filled = 0;
    // Leftover frontier from the previous block keeps the regions adjacent.
    while (filled < target) {
      if (frontier.empty()) {
        while (next_seed < n && assignment[next_seed] != -1) ++next_seed;
        frontier.push_back(next_seed);
      }
      const NodeId v = frontier.front();
      frontier.pop_front();
      if (assignment[v] != -1) continue;
      assignment[v] = k;
      ++filled;
      for (NodeId w : graph.neighbors(v)) {
        if (assignment[w] == -1) frontier.push_back(w);
      }
    }
  }
  return BlockPartition(graph, std::move(assignment), block_count);
}

Graph replicate_graph(const Graph& base, int copies) {
  if (copies < 1) throw ValidationError("replica count must be >= 1");
  const NodeId n = base.node_count();
  std::vector<Edge> edges;
  edges.reserve(base.edge_count() * static_cast<std::size_t>(copies));
  for (int t = 0; t < copies; ++t) {
    const NodeId offset = static_cast<NodeId>(t) * n;
    for (const Edge& e : base.edges()) edges.push_back({e.u + offset, e.v + offset, e.weight});
  }
  return Graph(n * copies, std::move(edges));
}

BlockPartition replicate_partition(const Graph& replicated, NodeId base_nodes, int copies) {
  if (replicated.node_count() != base_nodes * copies) {
    throw ValidationError("replicated graph size does not match base_nodes * copies");
  }
  std::vector<int> assignment(static_cast<std::size_t>(replicated.node_count()));
  for (NodeId v = 0; v < replicated.node_count(); ++v) assignment[v] = v / std::max<NodeId>(base_nodes, 1);
  return BlockPartition(replicated, std::move(assignment), copies);
}

void validate_signal(const Graph& graph, std::span<const double> values) {
  if (static_cast<NodeId>(values.size()) != graph.node_count()) {
    throw ValidationError("signal length " + std::to_string(values.size()) +
                          " does not match node count " +
                          std::to_string(graph.node_count()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw ValidationError("signal entry for node " + std::to_string(i) + " is not finite");
    }
  }
}

}  // namespace gbgp
