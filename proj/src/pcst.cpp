#include "gbgp/pcst.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <queue>
#include <utility>
#include <string>

#include "gbgp/error.hpp"

namespace gbgp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTightEps = 1e-9;

using Event = std::pair<double, int>;
// Min-queue by (time, cluster); entries are live while they equal the
// cluster's current key.
using EventQueue = std::priority_queue<Event, std::vector<Event>, std::greater<Event>>;

// Pooled pairing heaps of edge parts. Stored values are relative to the sum
// of child_offset over a node's ancestors, so adding a constant to a whole
// heap touches only its root. Rescheduled parts get a fresh node; the old one
// goes stale and is skipped when it surfaces.
class PartHeaps {
 public:
  void reserve(std::size_t n) { nodes_.reserve(n); }

  // Returns the new root; `node` receives the inserted node's index.
  int insert(int root, double key, int part, int& node) {
    node = static_cast<int>(nodes_.size());
    nodes_.push_back({-1, -1, -1, key, 0.0, part});
    return link(root, node);
  }
  static constexpr int kEmpty = -1;
  double key(int root) const { return nodes_[root].value; }
  int part(int root) const { return nodes_[root].part; }
  void add_offset(int root, double delta) {
    if (root == kEmpty) return;
    nodes_[root].value += delta;
    nodes_[root].child_offset += delta;
  }

  int link(int a, int b) {
    if (a == kEmpty) return b;
    if (b == kEmpty) return a;
    if (std::pair(nodes_[b].value, nodes_[b].part) < std::pair(nodes_[a].value, nodes_[a].part)) {
      std::swap(a, b);
    }
    Node& top = nodes_[a];
    Node& sub = nodes_[b];
    sub.value -= top.child_offset;
    sub.child_offset -= top.child_offset;
    sub.sibling = top.child;
    if (top.child != kEmpty) nodes_[top.child].left_up = b;
    sub.left_up = a;
    top.child = b;
    return a;
  }

  // Two-pass pairing of the root's children.
  int pop(int root) {
    const double offset = nodes_[root].child_offset;
    children_.clear();
    for (int c = nodes_[root].child; c != kEmpty;) {
      Node& node = nodes_[c];
      const int next = node.sibling;
      node.value += offset;
      node.child_offset += offset;
      node.sibling = kEmpty;
      node.left_up = kEmpty;
      children_.push_back(c);
      c = next;
    }
    nodes_[root].child = kEmpty;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < children_.size(); i += 2) {
      children_[pairs++] =
          i + 1 < children_.size() ? link(children_[i], children_[i + 1]) : children_[i];
    }
    int result = kEmpty;
    for (std::size_t i = pairs; i-- > 0;) result = link(children_[i], result);
    return result;
  }

 private:
  struct Node {
    int child;
    int sibling;
    int left_up;
    double value;
    double child_offset;
    int part;
  };
  std::vector<Node> nodes_;
  std::vector<int> children_;
};

struct Cluster {
  bool active = false;
  bool contains_root = false;
  double active_start_time = 0.0;
  double active_end_time = 0.0;
  double moat = 0.0;
  double prize_sum = 0.0;
  double subcluster_moat_sum = 0.0;
  int merged_into = -1;
  int skip_up = -1;
  double skip_up_sum = 0.0;
  int heap = -1;
};

class MoatGrowth {
 public:
  explicit MoatGrowth(const PcstInstance& inst) : inst_(inst), graph_(inst.graph) {}

  // Runs the growth phase; returns indices of edges used for merges.
  std::vector<std::int32_t> run();

  int root_cluster_of(NodeId v) {
    int c = v;
    while (clusters_[c].merged_into != -1) c = clusters_[c].merged_into;
    return c;
  }

 private:
  double edge_cost(std::size_t e) const {
    return inst_.edge_cost_multiplier * graph_.edges()[e].weight;
  }
  NodeId endpoint(int part) const {
    const Edge& e = graph_.edges()[static_cast<std::size_t>(part / 2)];
    return part % 2 == 0 ? e.u : e.v;
  }

  void heap_insert(int cluster, double time, int part) {
    int& root = clusters_[cluster].heap;
    root = heaps_.insert(root, time, part, part_node_[part]);
  }
  void heap_erase(int part) { part_node_[part] = -1; }
  // Drops stale entries at the top first.
  double heap_min(int cluster) {
    int& root = clusters_[cluster].heap;
    while (root != PartHeaps::kEmpty && part_node_[heaps_.part(root)] != root) {
      root = heaps_.pop(root);
    }
    return root == PartHeaps::kEmpty ? kInf : heaps_.key(root);
  }

  void refresh_edge_event(int cluster) {
    auto& key = edge_event_key_[cluster];
    const double t = clusters_[cluster].active ? heap_min(cluster) : kInf;
    if (key.first == t) return;
    key = {t, cluster};
    if (t != kInf) edge_events_.push(key);
  }

  void schedule_deactivation(int cluster) {
    const Cluster& c = clusters_[cluster];
    const double t = c.active_start_time + c.prize_sum - c.subcluster_moat_sum;
    deactivation_key_[cluster] = {t, cluster};
    deactivations_.push(deactivation_key_[cluster]);
  }
  void cancel_deactivation(int cluster) { deactivation_key_[cluster] = {kInf, cluster}; }

  // Earliest live entry of a lazily deleted event queue, or kInf.
  static double next_event(EventQueue& queue, const std::vector<Event>& live) {
    while (!queue.empty() && live[queue.top().second] != queue.top()) queue.pop();
    return queue.empty() ? kInf : queue.top().first;
  }

  // Sum of moats on the path from `part`'s endpoint up to its root cluster.
  void sum_on_part(int part, double& total, double& finished, int& root);
  void merge(int part, int current_cluster, int other_cluster);
  int new_cluster();

  const PcstInstance& inst_;
  const Graph& graph_;
  std::vector<Cluster> clusters_;
  PartHeaps heaps_;
  std::vector<int> part_node_;  // live heap node of each edge part, -1 if none
  std::vector<char> part_deleted_;
  std::vector<Event> edge_event_key_;
  std::vector<Event> deactivation_key_;
  EventQueue edge_events_;
  EventQueue deactivations_;
  std::vector<std::pair<int, double>> path_;
  std::vector<std::int32_t> merge_edges_;
  double now_ = 0.0;
  int active_count_ = 0;
};

int MoatGrowth::new_cluster() {
  clusters_.emplace_back();
  edge_event_key_.push_back({kInf, static_cast<int>(clusters_.size()) - 1});
  deactivation_key_.push_back({kInf, static_cast<int>(clusters_.size()) - 1});
  return static_cast<int>(clusters_.size()) - 1;
}

void MoatGrowth::sum_on_part(int part, double& total, double& finished, int& root) {
  int c = endpoint(part);
  total = 0.0;
  path_.clear();
  while (clusters_[c].merged_into != -1) {
    path_.emplace_back(c, total);
    if (clusters_[c].skip_up >= 0) {
      total += clusters_[c].skip_up_sum;
      c = clusters_[c].skip_up;
    } else {
      total += clusters_[c].moat;
      c = clusters_[c].merged_into;
    }
  }
  for (const auto& [visited, partial] : path_) {
    clusters_[visited].skip_up = c;
    clusters_[visited].skip_up_sum = total - partial;
  }
  root = c;
  if (clusters_[c].active) {
    finished = total;
    total += now_ - clusters_[c].active_start_time;
  } else {
    total += clusters_[c].moat;
    finished = total;
  }
}

void MoatGrowth::merge(int part, int current, int other) {
  merge_edges_.push_back(part / 2);
  part_deleted_[part ^ 1] = 1;

  Cluster& cur = clusters_[current];
  cur.active = false;
  cur.active_end_time = now_;
  cur.moat = now_ - cur.active_start_time;
  cancel_deactivation(current);
  refresh_edge_event(current);
  --active_count_;

  Cluster& oth = clusters_[other];
  if (oth.active) {
    oth.active = false;
    oth.active_end_time = now_;
    oth.moat = now_ - oth.active_start_time;
    cancel_deactivation(other);
    refresh_edge_event(other);
    --active_count_;
  } else {
    heaps_.add_offset(oth.heap, now_ - oth.active_end_time);
  }

  const int merged = new_cluster();
  Cluster& a = clusters_[current];
  Cluster& b = clusters_[other];
  Cluster& m = clusters_[merged];
  m.prize_sum = a.prize_sum + b.prize_sum;
  m.subcluster_moat_sum = a.subcluster_moat_sum + a.moat + b.subcluster_moat_sum + b.moat;
  m.contains_root = a.contains_root || b.contains_root;
  m.active = !m.contains_root;
  m.active_start_time = now_;
  m.heap = heaps_.link(a.heap, b.heap);
  a.heap = PartHeaps::kEmpty;
  b.heap = PartHeaps::kEmpty;
  a.merged_into = merged;
  b.merged_into = merged;
  if (m.active) {
    ++active_count_;
    schedule_deactivation(merged);
    refresh_edge_event(merged);
  } else {
    m.active_end_time = now_;
  }
}

std::vector<std::int32_t> MoatGrowth::run() {
  const NodeId n = graph_.node_count();
  const std::size_t m = graph_.edge_count();
  clusters_.reserve(2 * static_cast<std::size_t>(n));
  heaps_.reserve(4 * m);
  part_node_.assign(2 * m, -1);
  part_deleted_.assign(2 * m, 0);

  for (NodeId v = 0; v < n; ++v) {
    const int c = new_cluster();
    Cluster& cl = clusters_[c];
    cl.prize_sum = inst_.prizes[v];
    cl.contains_root = inst_.root && *inst_.root == v;
    cl.active = !cl.contains_root;
    if (cl.active) ++active_count_;
  }
  for (std::size_t e = 0; e < m; ++e) {
    const double half = edge_cost(e) / 2.0;
    const Edge& edge = graph_.edges()[e];
    heap_insert(edge.u, half, static_cast<int>(2 * e));
    heap_insert(edge.v, half, static_cast<int>(2 * e + 1));
  }
  for (NodeId v = 0; v < n; ++v) {
    if (clusters_[v].active) {
      schedule_deactivation(v);
      refresh_edge_event(v);
    }
  }

  const int target = inst_.root ? 0 : inst_.target_components;
  while (active_count_ > target) {
    const double t_edge = next_event(edge_events_, edge_event_key_);
    const double t_deact = next_event(deactivations_, deactivation_key_);
    if (t_edge == kInf && t_deact == kInf) break;

    if (t_edge < t_deact) {
      now_ = t_edge;
      const int cluster = edge_events_.top().second;
      if (heap_min(cluster) != t_edge) {
        refresh_edge_event(cluster);
        continue;
      }
      int& root = clusters_[cluster].heap;
      const int part = heaps_.part(root);
      part_node_[part] = -1;
      root = heaps_.pop(root);
      refresh_edge_event(cluster);
      if (part_deleted_[part]) continue;

      const int other_part = part ^ 1;
      double sum_cur = 0, fin_cur = 0, sum_oth = 0, fin_oth = 0;
      int cur_root = -1, oth_root = -1;
      sum_on_part(part, sum_cur, fin_cur, cur_root);
      sum_on_part(other_part, sum_oth, fin_oth, oth_root);
      if (cur_root == oth_root) {
        part_deleted_[other_part] = 1;
        continue;
      }
      const double cost = edge_cost(static_cast<std::size_t>(part / 2));
      const double remainder = cost - sum_cur - sum_oth;
      if (remainder <= kTightEps * cost) {
        merge(part, cur_root, oth_root);
      } else if (clusters_[oth_root].active) {
        const double next = now_ + remainder / 2.0;
        heap_insert(cur_root, next, part);
        refresh_edge_event(cur_root);
        heap_erase(other_part);
        heap_insert(oth_root, next, other_part);
        refresh_edge_event(oth_root);
      } else {
        heap_insert(cur_root, now_ + remainder, part);
        refresh_edge_event(cur_root);
        // Fires as soon as the inactive side is merged back into growth.
        heap_erase(other_part);
        heap_insert(oth_root, clusters_[oth_root].active_end_time, other_part);
      }
    } else {
      now_ = t_deact;
      const int cluster = deactivations_.top().second;
      cancel_deactivation(cluster);
      Cluster& c = clusters_[cluster];
      c.active = false;
      c.active_end_time = now_;
      c.moat = now_ - c.active_start_time;
      refresh_edge_event(cluster);
      --active_count_;
    }
  }
  return merge_edges_;
}

struct TreeAdjacency {
  std::vector<std::int64_t> offsets;
  std::vector<NodeId> neighbor;
  std::vector<std::int32_t> edge;
};

TreeAdjacency build_adjacency(const Graph& graph, const std::vector<std::int32_t>& edges) {
  TreeAdjacency adj;
  const NodeId n = graph.node_count();
  adj.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  for (auto e : edges) {
    ++adj.offsets[graph.edges()[e].u + 1];
    ++adj.offsets[graph.edges()[e].v + 1];
  }
  for (NodeId v = 0; v < n; ++v) adj.offsets[v + 1] += adj.offsets[v];
  adj.neighbor.resize(edges.size() * 2);
  adj.edge.resize(edges.size() * 2);
  std::vector<std::int64_t> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
  for (auto e : edges) {
    const Edge& ed = graph.edges()[e];
    adj.neighbor[cursor[ed.u]] = ed.v;
    adj.edge[cursor[ed.u]++] = e;
    adj.neighbor[cursor[ed.v]] = ed.u;
    adj.edge[cursor[ed.v]++] = e;
  }
  return adj;
}

// Strong pruning of one tree of the merge forest.
class StrongPruner {
 public:
  StrongPruner(const PcstInstance& inst, const TreeAdjacency& adj)
      : inst_(inst), adj_(adj) {
    const auto n = static_cast<std::size_t>(inst.graph.node_count());
    parent_.assign(n, -1);
    parent_edge_.assign(n, -1);
    value_.assign(n, 0.0);
  }

  // DFS order from `root` with parents; fills value_ bottom-up.
  void evaluate(NodeId root, std::vector<NodeId>& order) {
    order.clear();
    order.push_back(root);
    parent_[root] = -1;
    parent_edge_[root] = -1;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const NodeId v = order[i];
      for (auto j = adj_.offsets[v]; j < adj_.offsets[v + 1]; ++j) {
        const NodeId w = adj_.neighbor[j];
        if (w == parent_[v]) continue;
        parent_[w] = v;
        parent_edge_[w] = adj_.edge[j];
        order.push_back(w);
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const NodeId v = *it;
      value_[v] = inst_.prizes[v];
      for (auto j = adj_.offsets[v]; j < adj_.offsets[v + 1]; ++j) {
        const NodeId w = adj_.neighbor[j];
        if (w == parent_[v]) continue;
        value_[v] += std::max(0.0, value_[w] - cost(adj_.edge[j]));
      }
    }
  }

  NodeId best_root(const std::vector<NodeId>& order) {
    // Rerooting: full[v] is the pruned worth of the tree rooted at v.
    std::vector<double>& full = scratch_;
    full.resize(value_.size());
    NodeId best = order.front();
    for (const NodeId v : order) {
      if (parent_[v] == -1) {
        full[v] = value_[v];
      } else {
        const NodeId p = parent_[v];
        const double c = cost(parent_edge_[v]);
        const double without_v = full[p] - std::max(0.0, value_[v] - c);
        full[v] = value_[v] + std::max(0.0, without_v - c);
      }
      if (full[v] > full[best] || (full[v] == full[best] && v < best)) best = v;
    }
    return best;
  }

  // Keeps subtrees whose contribution is strictly positive.
  double collect(NodeId root, const std::vector<NodeId>& order, PcstForest& out) {
    std::vector<char>& keep = keep_;
    if (keep.size() != value_.size()) keep.assign(value_.size(), 0);
    keep[root] = 1;
    out.nodes.push_back(root);
    for (std::size_t i = 1; i < order.size(); ++i) {
      const NodeId v = order[i];
      if (!keep[parent_[v]]) continue;
      if (value_[v] - cost(parent_edge_[v]) > 0.0) {
        keep[v] = 1;
        out.nodes.push_back(v);
        out.edges.push_back(parent_edge_[v]);
      }
    }
    for (NodeId v : order) keep[v] = 0;
    return value_[root];
  }

 private:
  double cost(std::int32_t e) const {
    return inst_.edge_cost_multiplier * inst_.graph.edges()[e].weight;
  }

  const PcstInstance& inst_;
  const TreeAdjacency& adj_;
  std::vector<NodeId> parent_;
  std::vector<std::int32_t> parent_edge_;
  std::vector<double> value_;
  std::vector<double> scratch_;
  std::vector<char> keep_;
};

void validate(const PcstInstance& inst) {
  if (static_cast<NodeId>(inst.prizes.size()) != inst.graph.node_count()) {
    throw ValidationError("prize vector length does not match node count");
  }
  for (double p : inst.prizes) {
    if (!std::isfinite(p) || p < 0.0) throw ValidationError("prizes must be finite and >= 0");
  }
  if (!(inst.edge_cost_multiplier > 0.0) || !std::isfinite(inst.edge_cost_multiplier)) {
    throw ValidationError("edge cost multiplier must be positive");
  }
  if (inst.root && (*inst.root < 0 || *inst.root >= inst.graph.node_count())) {
    throw ValidationError("root out of range");
  }
  if (inst.target_components < 1) throw ValidationError("target component count must be >= 1");
}

}  // namespace

PcstForest pcst(const PcstInstance& inst) {
  validate(inst);
  PcstForest result;
  const NodeId n = inst.graph.node_count();
  if (n == 0) return result;

  MoatGrowth growth(inst);
  const auto merge_edges = growth.run();
  const TreeAdjacency adj = build_adjacency(inst.graph, merge_edges);
  StrongPruner pruner(inst, adj);
  std::vector<NodeId> order;

  if (inst.root) {
    pruner.evaluate(*inst.root, order);
    pruner.collect(*inst.root, order, result);
  } else {
    struct Candidate {
      double worth;
      NodeId lowest;
      NodeId root;
    };
    std::vector<Candidate> candidates;
    std::vector<char> visited(static_cast<std::size_t>(n), 0);
    PcstForest scratch;
    for (NodeId v = 0; v < n; ++v) {
      if (visited[v]) continue;
      pruner.evaluate(v, order);
      for (NodeId w : order) visited[w] = 1;
      const NodeId root = pruner.best_root(order);
      if (root != v) pruner.evaluate(root, order);
      scratch.nodes.clear();
      scratch.edges.clear();
      const double worth = pruner.collect(root, order, scratch);
      if (worth <= 0.0) continue;
      candidates.push_back(
          {worth, *std::min_element(scratch.nodes.begin(), scratch.nodes.end()), root});
    }
    const auto take = std::min<std::size_t>(candidates.size(),
                                            static_cast<std::size_t>(inst.target_components));
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                      candidates.end(), [](const Candidate& a, const Candidate& b) {
                        if (a.worth != b.worth) return a.worth > b.worth;
                        return a.lowest < b.lowest;
                      });
    for (std::size_t i = 0; i < take; ++i) {
      pruner.evaluate(candidates[i].root, order);
      pruner.collect(candidates[i].root, order, result);
    }
  }
  std::sort(result.nodes.begin(), result.nodes.end());
  std::sort(result.edges.begin(), result.edges.end());
  return result;
}

double pcst_net_worth(const PcstInstance& instance, const PcstForest& forest) {
  double worth = 0.0;
  for (NodeId v : forest.nodes) worth += instance.prizes[v];
  for (auto e : forest.edges) worth -= instance.edge_cost_multiplier * instance.graph.edges()[e].weight;
  return worth;
}

}  // namespace gbgp
