#include "gbgp/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "gbgp/error.hpp"
#include "gbgp/io.hpp"
#include "gbgp/rng.hpp"

namespace gbgp {

namespace {

std::size_t component_size(const Graph& graph, NodeId start) {
  std::vector<char> seen(static_cast<std::size_t>(graph.node_count()), 0);
  std::vector<NodeId> stack = {start};
  seen[start] = 1;
  std::size_t count = 0;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    ++count;
    for (NodeId w : graph.neighbors(v)) {
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
    }
  }
  return count;
}

// Extends `members` (connected, non-empty) to `target` nodes by walking.
void grow_by_walk(const Graph& graph, std::vector<NodeId>& members, std::vector<char>& in,
                  int target, Rng& rng) {
  if (static_cast<int>(members.size()) >= target) return;
  std::size_t reachable = 0;
  {
    // The walk can only reach the component(s) of the current members.
    std::vector<char> seen(in.size(), 0);
    std::vector<NodeId> stack;
    for (NodeId v : members) {
      if (!seen[v]) {
        seen[v] = 1;
        stack.push_back(v);
      }
    }
    while (!stack.empty()) {
      const NodeId v = stack.back();
      stack.pop_back();
      ++reachable;
      for (NodeId w : graph.neighbors(v)) {
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
  }
  if (reachable < static_cast<std::size_t>(target)) {
    throw ValidationError("connected component has " + std::to_string(reachable) +
                          " nodes, fewer than the requested subgraph size " +
                          std::to_string(target));
  }

  NodeId current = members[rng.below(members.size())];
  std::size_t stalled = 0;
  while (static_cast<int>(members.size()) < target) {
    const auto nbrs = graph.neighbors(current);
    if (nbrs.empty() || stalled > 10 * members.size() + 100) {
      current = members[rng.below(members.size())];
      stalled = 0;
      continue;
    }
    current = nbrs[rng.below(nbrs.size())];
    if (!in[current]) {
      in[current] = 1;
      members.push_back(current);
      stalled = 0;
    } else {
      ++stalled;
    }
  }
}

}  // namespace

Graph barabasi_albert(NodeId n, int m, std::uint64_t seed) {
  if (m < 1 || m >= n) {
    throw ValidationError("preferential attachment needs 1 <= m < n (m=" + std::to_string(m) +
                          ", n=" + std::to_string(n) + ")");
  }
  Rng rng(seed);
  // Each node appears max(degree, 1) times.
  std::vector<NodeId> urn;
  urn.reserve(static_cast<std::size_t>(2) * m * n);
  std::vector<int> degree(static_cast<std::size_t>(n), 0);
  for (NodeId v = 0; v < m; ++v) urn.push_back(v);

  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m) * (n - m));
  std::vector<NodeId> targets;
  for (NodeId v = m; v < n; ++v) {
    targets.clear();
    while (static_cast<int>(targets.size()) < m) {
      const NodeId t = urn[rng.below(urn.size())];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (NodeId t : targets) {
      edges.push_back({t, v, 1.0});
      if (degree[t]++ > 0) urn.push_back(t);
    }
    urn.push_back(v);
    degree[v] = m;
    for (int i = 1; i < m; ++i) urn.push_back(v);
  }
  return Graph(n, std::move(edges));
}

std::vector<NodeId> random_walk_subgraph(const Graph& graph, int size, std::uint64_t seed) {
  if (size < 1 || size > graph.node_count()) {
    throw ValidationError("subgraph size " + std::to_string(size) + " outside [1, " +
                          std::to_string(graph.node_count()) + "]");
  }
  Rng rng(seed);
  const auto start = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(graph.node_count())));
  if (component_size(graph, start) < static_cast<std::size_t>(size)) {
    throw ValidationError("start node's component is smaller than subgraph size " +
                          std::to_string(size));
  }
  std::vector<char> in(static_cast<std::size_t>(graph.node_count()), 0);
  std::vector<NodeId> members = {start};
  in[start] = 1;
  grow_by_walk(graph, members, in, size, rng);
  std::sort(members.begin(), members.end());
  return members;
}

std::vector<int> linear_ramp(int timestamps, int first, int last) {
  std::vector<int> sizes(static_cast<std::size_t>(std::max(timestamps, 0)));
  for (int t = 0; t < timestamps; ++t) {
    const double frac = timestamps > 1 ? static_cast<double>(t) / (timestamps - 1) : 0.0;
    sizes[t] = static_cast<int>(std::lround(first + frac * (last - first)));
  }
  return sizes;
}

std::vector<std::vector<NodeId>> evolving_subgraphs(const Graph& graph, int timestamps,
                                                    std::span<const int> sizes, double overlap,
                                                    std::uint64_t seed) {
  if (timestamps < 1) throw ValidationError("timestamps must be >= 1");
  if (static_cast<int>(sizes.size()) != timestamps) {
    throw ValidationError("need one subgraph size per timestamp");
  }
  if (!(overlap >= 0.0 && overlap <= 1.0)) throw ValidationError("overlap must be in [0, 1]");

  std::vector<std::vector<NodeId>> sets;
  sets.push_back(random_walk_subgraph(graph, sizes[0], derive_seed(seed, "evolve/0")));
  for (int t = 1; t < timestamps; ++t) {
    if (sizes[t] < 1 || sizes[t] > graph.node_count()) {
      throw ValidationError("subgraph size " + std::to_string(sizes[t]) + " outside [1, " +
                            std::to_string(graph.node_count()) + "]");
    }
    Rng rng(derive_seed(seed, "evolve/" + std::to_string(t)));
    const auto& prev = sets.back();
    const int keep = std::min<int>(
        sizes[t], static_cast<int>(std::ceil(overlap * static_cast<double>(prev.size()) - 1e-9)));

    std::vector<char> in_prev(static_cast<std::size_t>(graph.node_count()), 0);
    for (NodeId v : prev) in_prev[v] = 1;
    std::vector<char> in(static_cast<std::size_t>(graph.node_count()), 0);
    std::vector<NodeId> members;
    if (keep > 0) {
      const NodeId root = prev[rng.below(prev.size())];
      std::deque<NodeId> queue = {root};
      in[root] = 1;
      while (!queue.empty() && static_cast<int>(members.size()) < keep) {
        const NodeId v = queue.front();
        queue.pop_front();
        members.push_back(v);
        for (NodeId w : graph.neighbors(v)) {
          if (in_prev[w] && !in[w]) {
            in[w] = 1;
            queue.push_back(w);
          }
        }
      }
      // Nodes queued but not taken are not part of the core.
      std::fill(in.begin(), in.end(), 0);
      for (NodeId v : members) in[v] = 1;
    } else {
      const auto start =
          static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(graph.node_count())));
      members.push_back(start);
      in[start] = 1;
    }
    grow_by_walk(graph, members, in, sizes[t], rng);
    std::sort(members.begin(), members.end());
    sets.push_back(std::move(members));
  }
  return sets;
}

std::vector<double> inject_features(NodeId node_count, std::span<const NodeId> truth, double mu,
                                    std::uint64_t seed) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw ValidationError("mu must be finite and >= 0");
  std::vector<char> planted(static_cast<std::size_t>(node_count), 0);
  for (NodeId v : truth) {
    if (v < 0 || v >= node_count) throw ValidationError("truth node out of range");
    planted[v] = 1;
  }
  Rng rng(seed);
  std::vector<double> signal(static_cast<std::size_t>(node_count));
  for (NodeId v = 0; v < node_count; ++v) signal[v] = rng.normal(planted[v] ? mu : 0.0, 1.0);
  return signal;
}

std::vector<double> flip_noise(std::span<const double> binary, double percent, std::uint64_t seed) {
  if (!(percent >= 0.0 && percent <= 100.0)) throw ValidationError("noise percent must be in [0, 100]");
  for (double b : binary) {
    if (b != 0.0 && b != 1.0) throw ValidationError("flip noise needs a 0/1 signal");
  }
  const std::size_t n = binary.size();
  const auto flips = static_cast<std::size_t>(std::floor(percent * static_cast<double>(n) / 100.0));
  std::vector<NodeId> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<NodeId>(i);
  Rng rng(seed);
  for (std::size_t i = 0; i < flips; ++i) {
    const std::size_t j = i + rng.below(n - i);
    std::swap(order[i], order[j]);
  }
  std::vector<double> out(binary.begin(), binary.end());
  for (std::size_t i = 0; i < flips; ++i) out[order[i]] = 1.0 - out[order[i]];
  return out;
}

void validate_spec(const SyntheticSpec& spec) {
  if (spec.m < 1 || spec.m >= spec.n) throw ValidationError("need 1 <= m < n");
  if (spec.timestamps < 1) throw ValidationError("T must be >= 1");
  if (spec.subgraph_size < 1 || spec.subgraph_size > spec.n) {
    throw ValidationError("subgraph size must be in [1, n]");
  }
  if (spec.subgraph_size_last < 0 || spec.subgraph_size_last > spec.n) {
    throw ValidationError("final subgraph size must be in [1, n]");
  }
  if (!(spec.overlap >= 0.0 && spec.overlap <= 1.0)) throw ValidationError("overlap must be in [0, 1]");
  if (!(spec.mu >= 0.0) || !std::isfinite(spec.mu)) throw ValidationError("mu must be finite and >= 0");
}

TemporalInstance make_temporal_instance(const SyntheticSpec& spec) {
  validate_spec(spec);
  TemporalInstance inst;
  inst.spec = spec;
  inst.graph = barabasi_albert(spec.n, spec.m, derive_seed(spec.seed, "graph"));
  const int last = spec.subgraph_size_last > 0 ? spec.subgraph_size_last : spec.subgraph_size;
  const auto sizes = linear_ramp(spec.timestamps, spec.subgraph_size, last);
  inst.truth = evolving_subgraphs(inst.graph, spec.timestamps, sizes, spec.overlap,
                                  derive_seed(spec.seed, "truth"));
  for (int t = 0; t < spec.timestamps; ++t) {
    inst.signals.push_back(inject_features(spec.n, inst.truth[t], spec.mu,
                                           derive_seed(spec.seed, "signal/" + std::to_string(t))));
  }
  return inst;
}

NonInstance make_non_instance(const NonSpec& spec) {
  if (spec.blocks < 1 || spec.blocks > spec.n) throw ValidationError("block count must be in [1, n]");
  NonInstance inst;
  inst.spec = spec;
  inst.graph = barabasi_albert(spec.n, spec.m, derive_seed(spec.seed, "graph"));
  inst.assignment = partition_contiguous(inst.graph, spec.blocks).assignment();
  inst.truth = random_walk_subgraph(inst.graph, spec.subgraph_size, derive_seed(spec.seed, "truth"));
  inst.signal = inject_features(spec.n, inst.truth, spec.mu, derive_seed(spec.seed, "signal"));
  return inst;
}

void build_temporal_problem(Problem& problem, const Graph& base,
                            const std::vector<std::vector<double>>& signals,
                            const std::vector<std::vector<NodeId>>& truth) {
  const int timestamps = static_cast<int>(signals.size());
  if (timestamps < 1) throw ValidationError("need at least one timestamp");
  const NodeId n = base.node_count();
  problem.kind = ObjectiveKind::Temporal;
  problem.base_nodes = n;
  problem.graph = replicate_graph(base, timestamps);
  problem.partition = replicate_partition(problem.graph, n, timestamps);
  problem.signal.clear();
  for (const auto& s : signals) {
    if (static_cast<NodeId>(s.size()) != n) throw ValidationError("signal length mismatch");
    problem.signal.insert(problem.signal.end(), s.begin(), s.end());
  }
  problem.truth.assign(static_cast<std::size_t>(timestamps), {});
  for (std::size_t t = 0; t < truth.size() && t < problem.truth.size(); ++t) {
    for (NodeId v : truth[t]) problem.truth[t].push_back(static_cast<NodeId>(t) * n + v);
  }
}

void build_non_problem(Problem& problem, const Graph& graph, std::vector<int> assignment,
                       int blocks, std::vector<double> signal, std::span<const NodeId> truth) {
  problem.kind = ObjectiveKind::NetworkOfNetworks;
  problem.base_nodes = graph.node_count();
  problem.graph = graph;
  problem.partition = BlockPartition(problem.graph, std::move(assignment), blocks);
  validate_signal(problem.graph, signal);
  problem.signal = std::move(signal);
  problem.truth.assign(static_cast<std::size_t>(blocks), {});
  for (NodeId v : truth) problem.truth[problem.partition.block_of(v)].push_back(v);
  for (auto& t : problem.truth) std::sort(t.begin(), t.end());
}

void build_single_problem(Problem& problem, const Graph& graph, std::vector<double> signal,
                          std::span<const NodeId> truth) {
  problem.kind = ObjectiveKind::EmsOnly;
  problem.base_nodes = graph.node_count();
  problem.graph = graph;
  problem.partition =
      BlockPartition(problem.graph, std::vector<int>(static_cast<std::size_t>(graph.node_count()), 0), 1);
  validate_signal(problem.graph, signal);
  problem.signal = std::move(signal);
  problem.truth = {std::vector<NodeId>(truth.begin(), truth.end())};
  std::sort(problem.truth[0].begin(), problem.truth[0].end());
}

namespace {

void write_common(const std::filesystem::path& dir, const Graph& graph,
                  const std::vector<std::vector<double>>& signals, const LabeledNodes& truth) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  save_graph(dir / "graph.txt", graph);
  for (std::size_t t = 0; t < signals.size(); ++t) {
    save_signal(dir / ("signal_t" + std::to_string(t) + ".tsv"), signals[t]);
  }
  save_labeled_nodes(dir / "truth.tsv", truth);
}

int parse_int(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw ValidationError("bundle metadata lacks '" + key + "'");
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw ValidationError("bundle metadata '" + key + "' is not an integer");
  }
}

}  // namespace

void write_temporal_bundle(const std::filesystem::path& dir, const TemporalInstance& inst) {
  LabeledNodes truth;
  for (std::size_t t = 0; t < inst.truth.size(); ++t) {
    for (NodeId v : inst.truth[t]) truth.emplace_back(static_cast<int>(t), v);
  }
  write_common(dir, inst.graph, inst.signals, truth);
  const auto& s = inst.spec;
  save_key_values(dir / "metadata.txt",
                  {{"kind", "temporal"},
                   {"n", std::to_string(s.n)},
                   {"m", std::to_string(s.m)},
                   {"T", std::to_string(s.timestamps)},
                   {"edges", std::to_string(inst.graph.edge_count())},
                   {"subgraph_size", std::to_string(s.subgraph_size)},
                   {"subgraph_size_last", std::to_string(s.subgraph_size_last > 0
                                                             ? s.subgraph_size_last
                                                             : s.subgraph_size)},
                   {"overlap", format_double(s.overlap)},
                   {"mu", format_double(s.mu)},
                   {"seed", std::to_string(s.seed)},
                   {"rng", std::string(Rng::kName)}});
}

void write_non_bundle(const std::filesystem::path& dir, const NonInstance& inst) {
  LabeledNodes truth;
  for (NodeId v : inst.truth) truth.emplace_back(0, v);
  write_common(dir, inst.graph, {inst.signal}, truth);
  save_partition(dir / "partition.txt", BlockPartition(inst.graph, inst.assignment, inst.spec.blocks));
  const auto& s = inst.spec;
  save_key_values(dir / "metadata.txt",
                  {{"kind", "non"},
                   {"n", std::to_string(s.n)},
                   {"m", std::to_string(s.m)},
                   {"T", "1"},
                   {"blocks", std::to_string(s.blocks)},
                   {"edges", std::to_string(inst.graph.edge_count())},
                   {"subgraph_size", std::to_string(s.subgraph_size)},
                   {"mu", format_double(s.mu)},
                   {"seed", std::to_string(s.seed)},
                   {"rng", std::string(Rng::kName)}});
}

void load_bundle(const std::filesystem::path& dir, Problem& problem) {
  const auto meta = load_key_values(dir / "metadata.txt");
  const auto kind_it = meta.find("kind");
  if (kind_it == meta.end()) throw ValidationError("bundle metadata lacks 'kind'");
  const Graph graph = load_graph(dir / "graph.txt");
  const int timestamps = parse_int(meta, "T");
  if (timestamps < 1) throw ValidationError("bundle T must be >= 1");
  std::vector<std::vector<double>> signals;
  for (int t = 0; t < timestamps; ++t) {
    signals.push_back(load_signal(dir / ("signal_t" + std::to_string(t) + ".tsv"), graph.node_count()));
  }
  LabeledNodes labeled;
  if (std::filesystem::exists(dir / "truth.tsv")) labeled = load_labeled_nodes(dir / "truth.tsv");

  if (kind_it->second == "temporal") {
    std::vector<std::vector<NodeId>> truth(static_cast<std::size_t>(timestamps));
    for (const auto& [t, v] : labeled) {
      if (t < 0 || t >= timestamps || v < 0 || v >= graph.node_count()) {
        throw ValidationError("truth entry out of range");
      }
      truth[t].push_back(v);
    }
    build_temporal_problem(problem, graph, signals, truth);
  } else if (kind_it->second == "non") {
    const int blocks = parse_int(meta, "blocks");
    const auto partition = load_partition(dir / "partition.txt", graph, blocks);
    std::vector<NodeId> truth;
    for (const auto& [t, v] : labeled) {
      if (t != 0 || v < 0 || v >= graph.node_count()) throw ValidationError("truth entry out of range");
      truth.push_back(v);
    }
    build_non_problem(problem, graph, partition.assignment(), blocks, signals[0], truth);
  } else {
    throw ValidationError("unknown bundle kind '" + kind_it->second + "'");
  }
}

}  // namespace gbgp
