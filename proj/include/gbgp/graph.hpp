#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gbgp {

using NodeId = std::int32_t;

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Undirected simple graph over dense ids [0, N) with a CSR adjacency built
// once at construction. Immutable afterwards.
class Graph {
 public:
  Graph() = default;

  // Validates: ids in range, no self-loops, no duplicate unordered pairs,
  // strictly positive finite weights. Edges are stored with u < v.
  Graph(NodeId node_count, std::vector<Edge> edges);

  NodeId node_count() const { return node_count_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  // Edge indices parallel to neighbors(v).
  std::span<const std::int32_t> incident_edges(NodeId v) const {
    return {adjacent_edge_.data() + offsets_[v],
            adjacent_edge_.data() + offsets_[v + 1]};
  }
  std::size_t degree(NodeId v) const {
    return static_cast<std::size_t>(offsets_[v + 1] - offsets_[v]);
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.node_count_ == b.node_count_ && a.edges_ == b.edges_;
  }

 private:
  NodeId node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::int64_t> offsets_{0};
  std::vector<NodeId> adjacency_;
  std::vector<std::int32_t> adjacent_edge_;
};

// Assignment of nodes to K blocks with the derived intra-block edge sets
// E^1..E^K, the cut set E^0, and one local-id subgraph per block.
class BlockPartition {
 public:
  BlockPartition() = default;
  BlockPartition(const Graph& graph, std::vector<int> assignment, int block_count);

  int block_count() const { return block_count_; }
  NodeId node_count() const { return static_cast<NodeId>(assignment_.size()); }
  const std::vector<int>& assignment() const { return assignment_; }
  int block_of(NodeId v) const { return assignment_[v]; }
  // Position of v inside block_nodes(block_of(v)).
  NodeId local_index(NodeId v) const { return local_index_[v]; }

  // Sorted global ids of V^k.
  std::span<const NodeId> block_nodes(int k) const { return block_nodes_[k]; }
  // Induced subgraph of block k in local ids.
  const Graph& block_graph(int k) const { return block_graphs_[k]; }
  // Indices into graph.edges().
  std::span<const std::int32_t> intra_edges(int k) const { return intra_edges_[k]; }
  std::span<const std::int32_t> cut_edges() const { return cut_edges_; }

 private:
  int block_count_ = 0;
  std::vector<int> assignment_;
  std::vector<NodeId> local_index_;
  std::vector<std::vector<NodeId>> block_nodes_;
  std::vector<Graph> block_graphs_;
  std::vector<std::vector<std::int32_t>> intra_edges_;
  std::vector<std::int32_t> cut_edges_;
};

// Detected node subset of one block, global ids, sorted and duplicate-free.
struct SupportSet {
  int block_id = 0;
  std::vector<NodeId> nodes;

  friend bool operator==(const SupportSet&, const SupportSet&) = default;
};

using BlockSupports = std::vector<SupportSet>;

// Maximal connected subsets of the subgraph induced by `nodes`. Each
// component is sorted; components are ordered by their smallest id.
std::vector<std::vector<NodeId>> connected_components(const Graph& graph,
                                                      std::span<const NodeId> nodes);

// BFS region growing into K blocks whose sizes differ by at most one.
// Deterministic: seeds are always the lowest unassigned node id.
BlockPartition partition_contiguous(const Graph& graph, int block_count);

// K disjoint copies of `base`; copy t occupies ids [t*n, (t+1)*n) and is block t.
// No edges join different copies.
Graph replicate_graph(const Graph& base, int copies);
BlockPartition replicate_partition(const Graph& replicated, NodeId base_nodes, int copies);

// Throws ValidationError unless values.size() == N and every entry is finite.
void validate_signal(const Graph& graph, std::span<const double> values);

}  // namespace gbgp
