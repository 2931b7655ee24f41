#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gbgp/graph.hpp"

namespace gbgp {

namespace fs = std::filesystem;

// Edge list: `#` comment lines, whitespace-separated `u v [w]` data lines.
// A `# nodes N` comment pins the node count (so trailing isolated nodes
// survive a round trip); otherwise N = max id + 1.
Graph load_graph(const fs::path& path);
void save_graph(const fs::path& path, const Graph& graph);

// Accepts arbitrary non-whitespace node tokens, assigns dense ids in order of
// first appearance and writes `external <TAB> dense` lines to `id_map_path`.
Graph load_graph_remapped(const fs::path& path, const fs::path& id_map_path);

// One block id per line; line i assigns node i (METIS output convention).
BlockPartition load_partition(const fs::path& path, const Graph& graph, int block_count);
void save_partition(const fs::path& path, const BlockPartition& partition);

// `node_id <TAB> value`, one line per node.
std::vector<double> load_signal(const fs::path& path, NodeId node_count);
void save_signal(const fs::path& path, const std::vector<double>& values);

// `node_id <TAB> t <TAB> value`; returns one vector per timestamp.
std::vector<std::vector<double>> load_temporal_signal(const fs::path& path, NodeId node_count,
                                                      int timestamps);

// Labeled node sets as `t <TAB> node_id` lines (ground truth, detections).
using LabeledNodes = std::vector<std::pair<int, NodeId>>;
LabeledNodes load_labeled_nodes(const fs::path& path);
void save_labeled_nodes(const fs::path& path, const LabeledNodes& nodes);

// Flat `key=value` lines; `#` comments and blank lines ignored.
std::map<std::string, std::string> load_key_values(const fs::path& path);
void save_key_values(const fs::path& path, const std::vector<std::pair<std::string, std::string>>& entries);

// Whole-file text helpers that throw IoError.
std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

// Shortest round-trip decimal form of a double.
std::string format_double(double value);

}  // namespace gbgp
