#include "gbgp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "gbgp/error.hpp"

namespace gbgp {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

std::string where(const fs::path& path, std::size_t line_no) {
  return path.string() + ":" + std::to_string(line_no) + ": ";
}

template <typename Int>
Int parse_int(std::string_view token, const fs::path& path, std::size_t line_no) {
  Int value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ValidationError(where(path, line_no) + "expected integer, got '" + std::string(token) + "'");
  }
  return value;
}

double parse_double(std::string_view token, const fs::path& path, std::size_t line_no) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) {
    throw ValidationError(where(path, line_no) + "expected finite number, got '" +
                          std::string(token) + "'");
  }
  return value;
}

bool is_blank_or_comment(std::string_view line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void check_written(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<Edge> parse_edge_lines(const std::vector<std::string>& lines, const fs::path& path,
                                   NodeId& declared_nodes, NodeId& max_id) {
  std::vector<Edge> edges;
  declared_nodes = -1;
  max_id = -1;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    if (is_blank_or_comment(line)) {
      const auto tokens = split_ws(line);
      if (tokens.size() == 3 && tokens[0] == "#" && tokens[1] == "nodes") {
        declared_nodes = parse_int<NodeId>(tokens[2], path, i + 1);
      }
      continue;
    }
    const auto tokens = split_ws(line);
    if (tokens.size() != 2 && tokens.size() != 3) {
      throw ValidationError(where(path, i + 1) + "expected 'u v [w]'");
    }
    Edge e;
    e.u = parse_int<NodeId>(tokens[0], path, i + 1);
    e.v = parse_int<NodeId>(tokens[1], path, i + 1);
    if (e.u < 0 || e.v < 0) throw ValidationError(where(path, i + 1) + "negative node id");
    if (e.u == e.v) {
      throw ValidationError(where(path, i + 1) + "self-loop on node " + std::to_string(e.u));
    }
    if (tokens.size() == 3) {
      e.weight = parse_double(tokens[2], path, i + 1);
      if (e.weight < 0.0) throw ValidationError(where(path, i + 1) + "negative edge weight");
      if (e.weight == 0.0) throw ValidationError(where(path, i + 1) + "zero edge weight");
    }
    max_id = std::max({max_id, e.u, e.v});
    edges.push_back(e);
  }
  return edges;
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  check_written(out, path);
}

Graph load_graph(const fs::path& path) {
  const auto lines = read_lines(path);
  NodeId declared = -1;
  NodeId max_id = -1;
  auto edges = parse_edge_lines(lines, path, declared, max_id);
  const NodeId n = declared >= 0 ? declared : max_id + 1;
  if (max_id >= n) {
    throw ValidationError(path.string() + ": node id " + std::to_string(max_id) +
                          " exceeds declared node count " + std::to_string(n));
  }
  return Graph(n, std::move(edges));
}

void save_graph(const fs::path& path, const Graph& graph) {
  auto out = open_out(path);
  out << "# nodes " << graph.node_count() << '\n';
  for (const Edge& e : graph.edges()) {
    out << e.u << '\t' << e.v;
    if (e.weight != 1.0) out << '\t' << format_double(e.weight);
    out << '\n';
  }
  check_written(out, path);
}

Graph load_graph_remapped(const fs::path& path, const fs::path& id_map_path) {
  const auto lines = read_lines(path);
  std::unordered_map<std::string, NodeId> ids;
  std::vector<std::string> order;
  auto id_of = [&](std::string_view token) {
    auto [it, inserted] = ids.try_emplace(std::string(token), static_cast<NodeId>(order.size()));
    if (inserted) order.emplace_back(token);
    return it->second;
  };
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_blank_or_comment(lines[i])) continue;
    const auto tokens = split_ws(lines[i]);
    if (tokens.size() != 2 && tokens.size() != 3) {
      throw ValidationError(where(path, i + 1) + "expected 'u v [w]'");
    }
    if (tokens[0] == tokens[1]) {
      throw ValidationError(where(path, i + 1) + "self-loop on node " + std::string(tokens[0]));
    }
    Edge e;
    e.u = id_of(tokens[0]);
    e.v = id_of(tokens[1]);
    if (tokens.size() == 3) {
      e.weight = parse_double(tokens[2], path, i + 1);
      if (e.weight <= 0.0) throw ValidationError(where(path, i + 1) + "non-positive edge weight");
    }
    edges.push_back(e);
  }
  auto out = open_out(id_map_path);
  for (std::size_t i = 0; i < order.size(); ++i) out << order[i] << '\t' << i << '\n';
  check_written(out, id_map_path);
  return Graph(static_cast<NodeId>(order.size()), std::move(edges));
}

BlockPartition load_partition(const fs::path& path, const Graph& graph, int block_count) {
  const auto lines = read_lines(path);
  std::vector<int> assignment;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_blank_or_comment(lines[i])) continue;
    const auto tokens = split_ws(lines[i]);
    if (tokens.size() != 1) throw ValidationError(where(path, i + 1) + "expected one block id");
    const int k = parse_int<int>(tokens[0], path, i + 1);
    if (k < 0 || k >= block_count) {
      throw ValidationError(where(path, i + 1) + "block id " + std::to_string(k) +
                            " outside [0, " + std::to_string(block_count) + ")");
    }
    assignment.push_back(k);
  }
  if (static_cast<NodeId>(assignment.size()) != graph.node_count()) {
    throw ValidationError(path.string() + ": " + std::to_string(assignment.size()) +
                          " block ids for " + std::to_string(graph.node_count()) + " nodes");
  }
  return BlockPartition(graph, std::move(assignment), block_count);
}

void save_partition(const fs::path& path, const BlockPartition& partition) {
  auto out = open_out(path);
  for (int k : partition.assignment()) out << k << '\n';
  check_written(out, path);
}

std::vector<double> load_signal(const fs::path& path, NodeId node_count) {
  const auto lines = read_lines(path);
  std::vector<double> values(static_cast<std::size_t>(node_count), 0.0);
  std::vector<char> seen(static_cast<std::size_t>(node_count), 0);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_blank_or_comment(lines[i])) continue;
    const auto tokens = split_ws(lines[i]);
    if (tokens.size() != 2) throw ValidationError(where(path, i + 1) + "expected 'node value'");
    const NodeId v = parse_int<NodeId>(tokens[0], path, i + 1);
    if (v < 0 || v >= node_count) {
      throw ValidationError(where(path, i + 1) + "node id " + std::to_string(v) + " out of range");
    }
    if (seen[v]) throw ValidationError(where(path, i + 1) + "duplicate node " + std::to_string(v));
    seen[v] = 1;
    values[v] = parse_double(tokens[1], path, i + 1);
  }
  const auto missing = std::find(seen.begin(), seen.end(), 0);
  if (missing != seen.end()) {
    throw ValidationError(path.string() + ": no value for node " +
                          std::to_string(missing - seen.begin()));
  }
  return values;
}

void save_signal(const fs::path& path, const std::vector<double>& values) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < values.size(); ++i) out << i << '\t' << format_double(values[i]) << '\n';
  check_written(out, path);
}

std::vector<std::vector<double>> load_temporal_signal(const fs::path& path, NodeId node_count,
                                                      int timestamps) {
  const auto lines = read_lines(path);
  std::vector<std::vector<double>> values(static_cast<std::size_t>(timestamps),
                                          std::vector<double>(static_cast<std::size_t>(node_count)));
  std::vector<char> seen(static_cast<std::size_t>(node_count) * timestamps, 0);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_blank_or_comment(lines[i])) continue;
    const auto tokens = split_ws(lines[i]);
    if (tokens.size() != 3) throw ValidationError(where(path, i + 1) + "expected 'node t value'");
    const NodeId v = parse_int<NodeId>(tokens[0], path, i + 1);
    const int t = parse_int<int>(tokens[1], path, i + 1);
    if (v < 0 || v >= node_count) throw ValidationError(where(path, i + 1) + "node id out of range");
    if (t < 0 || t >= timestamps) throw ValidationError(where(path, i + 1) + "timestamp out of range");
    auto& flag = seen[static_cast<std::size_t>(t) * node_count + v];
    if (flag) throw ValidationError(where(path, i + 1) + "duplicate (node, t) entry");
    flag = 1;
    values[t][v] = parse_double(tokens[2], path, i + 1);
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw ValidationError(path.string() + ": signal does not cover every (node, t) pair");
  }
  return values;
}

LabeledNodes load_labeled_nodes(const fs::path& path) {
  const auto lines = read_lines(path);
  LabeledNodes nodes;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_blank_or_comment(lines[i])) continue;
    const auto tokens = split_ws(lines[i]);
    if (tokens.size() != 2) throw ValidationError(where(path, i + 1) + "expected 't node_id'");
    const int t = parse_int<int>(tokens[0], path, i + 1);
    const NodeId v = parse_int<NodeId>(tokens[1], path, i + 1);
    if (t < 0 || v < 0) throw ValidationError(where(path, i + 1) + "negative label or node id");
    nodes.emplace_back(t, v);
  }
  return nodes;
}

void save_labeled_nodes(const fs::path& path, const LabeledNodes& nodes) {
  auto out = open_out(path);
  for (const auto& [t, v] : nodes) out << t << '\t' << v << '\n';
  check_written(out, path);
}

std::map<std::string, std::string> load_key_values(const fs::path& path) {
  const auto lines = read_lines(path);
  std::map<std::string, std::string> entries;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_blank_or_comment(lines[i])) continue;
    const auto eq = lines[i].find('=');
    if (eq == std::string::npos) throw ValidationError(where(path, i + 1) + "expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    entries[trim(lines[i].substr(0, eq))] = trim(lines[i].substr(eq + 1));
  }
  return entries;
}

void save_key_values(const fs::path& path,
                     const std::vector<std::pair<std::string, std::string>>& entries) {
  auto out = open_out(path);
  for (const auto& [k, v] : entries) out << k << '=' << v << '\n';
  check_written(out, path);
}

}  // namespace gbgp
