#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gbgp/graph.hpp"
#include "gbgp/objectives.hpp"

namespace gbgp {

// Preferential attachment: m isolated seed nodes, then every new node links
// to m distinct earlier nodes drawn with probability proportional to
// max(degree, 1). Exactly m * (n - m) edges.
Graph barabasi_albert(NodeId n, int m, std::uint64_t seed);

// `size` distinct nodes visited by a random walk from a random start node.
// When the walk stalls it restarts from a random visited node. The result is
// sorted and induces a connected subgraph.
std::vector<NodeId> random_walk_subgraph(const Graph& graph, int size, std::uint64_t seed);

// Connected ground-truth sets S_0..S_{T-1}. S_{t+1} keeps a connected core of
// ceil(overlap * |S_t|) nodes of S_t (BFS inside S_t from a random seed) and
// grows to sizes[t+1] by random walk.
std::vector<std::vector<NodeId>> evolving_subgraphs(const Graph& graph, int timestamps,
                                                    std::span<const int> sizes, double overlap,
                                                    std::uint64_t seed);

// Evenly spaced integer sizes from `first` to `last` over T timestamps.
std::vector<int> linear_ramp(int timestamps, int first, int last);

// c_i ~ N(mu, 1) on `truth`, N(0, 1) elsewhere.
std::vector<double> inject_features(NodeId node_count, std::span<const NodeId> truth, double mu,
                                    std::uint64_t seed);

// Flips exactly floor(percent * N / 100) distinct entries of a 0/1 vector.
std::vector<double> flip_noise(std::span<const double> binary, double percent, std::uint64_t seed);

struct SyntheticSpec {
  NodeId n = 300;
  int m = 4;
  int timestamps = 7;
  int subgraph_size = 30;
  int subgraph_size_last = 0;  // > 0: linear ramp from subgraph_size to this
  double overlap = 0.5;
  double mu = 5.0;
  std::uint64_t seed = 0;
};

void validate_spec(const SyntheticSpec& spec);

// A detection problem in solver form: the graph the objective lives on, its
// block partition, the signal, and the planted truth in (block, global node)
// pairs. Not movable once an objective refers to it.
struct Problem {
  ObjectiveKind kind = ObjectiveKind::EmsOnly;
  NodeId base_nodes = 0;  // temporal: nodes per timestamp; otherwise N
  Graph graph;
  BlockPartition partition;
  std::vector<double> signal;
  std::vector<std::vector<NodeId>> truth;  // per block, global ids, sorted

  Problem() = default;
  Problem(const Problem&) = delete;
  Problem& operator=(const Problem&) = delete;
};

// Temporal instance: BA graph, evolving truth, Gaussian signals per timestamp.
struct TemporalInstance {
  SyntheticSpec spec;
  Graph graph;
  std::vector<std::vector<NodeId>> truth;     // per timestamp, base ids
  std::vector<std::vector<double>> signals;  // per timestamp
};

TemporalInstance make_temporal_instance(const SyntheticSpec& spec);

// Network-of-networks instance: BA graph split into K contiguous blocks with
// one random-walk truth set and a Gaussian signal.
struct NonSpec {
  NodeId n = 4000;
  int m = 3;
  int blocks = 8;
  int subgraph_size = 100;
  double mu = 5.0;
  std::uint64_t seed = 0;
};

struct NonInstance {
  NonSpec spec;
  Graph graph;
  std::vector<int> assignment;
  std::vector<NodeId> truth;
  std::vector<double> signal;
};

NonInstance make_non_instance(const NonSpec& spec);

// T copies of the base graph, one block per timestamp, concatenated signals.
void build_temporal_problem(Problem& problem, const Graph& base,
                            const std::vector<std::vector<double>>& signals,
                            const std::vector<std::vector<NodeId>>& truth);
void build_non_problem(Problem& problem, const Graph& graph, std::vector<int> assignment,
                       int blocks, std::vector<double> signal, std::span<const NodeId> truth);
// Single block over the whole graph.
void build_single_problem(Problem& problem, const Graph& graph, std::vector<double> signal,
                          std::span<const NodeId> truth);

// Instance bundle on disk:
//   graph.txt, signal_t<t>.tsv (one per timestamp), truth.tsv (`t <TAB> node`),
//   partition.txt (network-of-networks only), metadata.txt (key=value).
void write_temporal_bundle(const std::filesystem::path& dir, const TemporalInstance& instance);
void write_non_bundle(const std::filesystem::path& dir, const NonInstance& instance);

// Reads a bundle written by either writer into solver form.
void load_bundle(const std::filesystem::path& dir, Problem& problem);

}  // namespace gbgp
