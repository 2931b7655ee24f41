#include "gbgp/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gbgp/error.hpp"

namespace gbgp {

namespace {

struct EmsSums {
  double cx = 0.0;
  double ones = 0.0;
  double sq = 0.0;
};

template <typename Index>
EmsSums ems_sums(std::span<const double> c, Index&& x_at, std::size_t n) {
  EmsSums s;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x_at(i);
    s.cx += c[i] * xi;
    s.ones += xi;
    s.sq += xi * xi;
  }
  return s;
}

double ems_from_sums(const EmsSums& s, EmsForm form, double epsilon) {
  const double d = std::max(s.ones, epsilon);
  const double scan = form == EmsForm::Squared ? s.cx * s.cx / d : s.cx / std::sqrt(d);
  return -scan + 0.5 * s.sq;
}

}  // namespace

double ems_block_value(std::span<const double> c, std::span<const double> x, EmsForm form,
                       double epsilon) {
  const auto s = ems_sums(c, [&](std::size_t i) { return x[i]; }, x.size());
  return ems_from_sums(s, form, epsilon);
}

void ems_block_gradient(std::span<const double> c, std::span<const double> x,
                        std::span<double> out, EmsForm form, double epsilon) {
  const auto s = ems_sums(c, [&](std::size_t i) { return x[i]; }, x.size());
  const double d = std::max(s.ones, epsilon);
  const double dd = s.ones >= epsilon ? 1.0 : 0.0;
  if (form == EmsForm::Squared) {
    const double a = 2.0 * s.cx / d;
    const double b = s.cx * s.cx / (d * d) * dd;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = -a * c[i] + b + x[i];
  } else {
    const double root = std::sqrt(d);
    const double b = s.cx / (2.0 * d * root) * dd;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = -c[i] / root + b + x[i];
  }
}

std::vector<double> BlockObjective::full_gradient(std::span<const double> x) const {
  const BlockPartition& p = partition();
  std::vector<double> grad(x.size(), 0.0);
  std::vector<double> block;
  for (int k = 0; k < p.block_count(); ++k) {
    const auto nodes = p.block_nodes(k);
    block.resize(nodes.size());
    block_gradient(x, k, block);
    for (std::size_t i = 0; i < nodes.size(); ++i) grad[nodes[i]] = block[i];
  }
  return grad;
}

ScanObjective::ScanObjective(const Graph& graph, const BlockPartition& partition,
                             ObjectiveSpec spec)
    : graph_(graph), partition_(partition), spec_(std::move(spec)) {
  if (!(spec_.lambda >= 0.0) || !std::isfinite(spec_.lambda)) {
    throw ValidationError("lambda must be finite and >= 0");
  }
  if (!(spec_.epsilon_denominator > 0.0)) {
    throw ValidationError("denominator epsilon must be > 0");
  }
  if (partition_.node_count() != graph_.node_count()) {
    throw ValidationError("partition does not match graph");
  }
  validate_signal(graph_, spec_.signal);

  if (spec_.kind == ObjectiveKind::Temporal) {
    const auto width = partition_.block_nodes(0).size();
    for (int k = 1; k < partition_.block_count(); ++k) {
      if (partition_.block_nodes(k).size() != width) {
        throw ValidationError("temporal objective needs equal-size blocks (timestamp " +
                              std::to_string(k) + " has " +
                              std::to_string(partition_.block_nodes(k).size()) + " nodes, expected " +
                              std::to_string(width) + ")");
      }
    }
  }
  if (spec_.kind == ObjectiveKind::NetworkOfNetworks) {
    const auto n = static_cast<std::size_t>(graph_.node_count());
    cut_offsets_.assign(n + 1, 0);
    for (auto e : partition_.cut_edges()) {
      ++cut_offsets_[graph_.edges()[e].u + 1];
      ++cut_offsets_[graph_.edges()[e].v + 1];
    }
    for (std::size_t v = 0; v < n; ++v) cut_offsets_[v + 1] += cut_offsets_[v];
    cut_neighbors_.resize(partition_.cut_edges().size() * 2);
    std::vector<std::int64_t> cursor(cut_offsets_.begin(), cut_offsets_.end() - 1);
    for (auto e : partition_.cut_edges()) {
      const Edge& ed = graph_.edges()[e];
      cut_neighbors_[cursor[ed.u]++] = ed.v;
      cut_neighbors_[cursor[ed.v]++] = ed.u;
    }
  }
}

double ScanObjective::block_ems(std::span<const double> x, int k) const {
  const auto nodes = partition_.block_nodes(k);
  EmsSums s;
  for (NodeId v : nodes) {
    const double xi = x[v];
    s.cx += spec_.signal[v] * xi;
    s.ones += xi;
    s.sq += xi * xi;
  }
  return ems_from_sums(s, spec_.form, spec_.epsilon_denominator);
}

double ScanObjective::ems_value(std::span<const double> x) const {
  double total = 0.0;
  for (int k = 0; k < partition_.block_count(); ++k) total += block_ems(x, k);
  return total;
}

double ScanObjective::coupling_value(std::span<const double> x) const {
  double total = 0.0;
  if (spec_.kind == ObjectiveKind::Temporal) {
    for (int k = 1; k < partition_.block_count(); ++k) {
      const auto cur = partition_.block_nodes(k);
      const auto prev = partition_.block_nodes(k - 1);
      for (std::size_t i = 0; i < cur.size(); ++i) {
        const double d = x[cur[i]] - x[prev[i]];
        total += d * d;
      }
    }
  } else if (spec_.kind == ObjectiveKind::NetworkOfNetworks) {
    for (auto e : partition_.cut_edges()) {
      const double d = x[graph_.edges()[e].u] - x[graph_.edges()[e].v];
      total += d * d;
    }
  }
  return spec_.lambda * total;
}

double ScanObjective::value(std::span<const double> x) const {
  return ems_value(x) + coupling_value(x);
}

double ScanObjective::block_value(std::span<const double> x, int k) const {
  double coupling = 0.0;
  const auto nodes = partition_.block_nodes(k);
  if (spec_.kind == ObjectiveKind::Temporal) {
    for (int j : {k - 1, k + 1}) {
      if (j < 0 || j >= partition_.block_count()) continue;
      const auto other = partition_.block_nodes(j);
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double d = x[nodes[i]] - x[other[i]];
        coupling += d * d;
      }
    }
  } else if (spec_.kind == ObjectiveKind::NetworkOfNetworks) {
    for (NodeId v : nodes) {
      for (auto j = cut_offsets_[v]; j < cut_offsets_[v + 1]; ++j) {
        const double d = x[v] - x[cut_neighbors_[j]];
        coupling += d * d;
      }
    }
  }
  return block_ems(x, k) + spec_.lambda * coupling;
}

void ScanObjective::block_gradient(std::span<const double> x, int k, std::span<double> out) const {
  const auto nodes = partition_.block_nodes(k);
  EmsSums s;
  for (NodeId v : nodes) {
    s.cx += spec_.signal[v] * x[v];
    s.ones += x[v];
  }
  const double d = std::max(s.ones, spec_.epsilon_denominator);
  const double dd = s.ones >= spec_.epsilon_denominator ? 1.0 : 0.0;
  double a = 0.0;
  double b = 0.0;
  if (spec_.form == EmsForm::Squared) {
    a = 2.0 * s.cx / d;
    b = s.cx * s.cx / (d * d) * dd;
  } else {
    a = 1.0 / std::sqrt(d);
    b = s.cx / (2.0 * d * std::sqrt(d)) * dd;
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out[i] = -a * spec_.signal[nodes[i]] + b + x[nodes[i]];
  }

  const double two_lambda = 2.0 * spec_.lambda;
  if (spec_.kind == ObjectiveKind::Temporal) {
    for (int j : {k - 1, k + 1}) {
      if (j < 0 || j >= partition_.block_count()) continue;
      const auto other = partition_.block_nodes(j);
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        out[i] += two_lambda * (x[nodes[i]] - x[other[i]]);
      }
    }
  } else if (spec_.kind == ObjectiveKind::NetworkOfNetworks) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const NodeId v = nodes[i];
      for (auto j = cut_offsets_[v]; j < cut_offsets_[v + 1]; ++j) {
        out[i] += two_lambda * (x[v] - x[cut_neighbors_[j]]);
      }
    }
  }
}

namespace {

void require_kind(const ScanObjective& objective, ObjectiveKind kind) {
  if (objective.spec().kind != kind) throw ValidationError("objective kind mismatch");
}

}  // namespace

double temporal_value(const ScanObjective& objective, std::span<const double> x) {
  require_kind(objective, ObjectiveKind::Temporal);
  return objective.value(x);
}

void temporal_block_gradient(const ScanObjective& objective, std::span<const double> x, int k,
                             std::span<double> out) {
  require_kind(objective, ObjectiveKind::Temporal);
  objective.block_gradient(x, k, out);
}

double non_value(const ScanObjective& objective, std::span<const double> x) {
  require_kind(objective, ObjectiveKind::NetworkOfNetworks);
  return objective.value(x);
}

void non_block_gradient(const ScanObjective& objective, std::span<const double> x, int k,
                        std::span<double> out) {
  require_kind(objective, ObjectiveKind::NetworkOfNetworks);
  objective.block_gradient(x, k, out);
}

std::vector<double> initial_point(const BlockPartition& partition, std::span<const double> signal) {
  std::vector<double> x(signal.size(), 0.0);
  for (int k = 0; k < partition.block_count(); ++k) {
    const auto nodes = partition.block_nodes(k);
    if (nodes.empty()) continue;
    NodeId best = nodes[0];
    for (NodeId v : nodes) {
      if (std::abs(signal[v]) > std::abs(signal[best])) best = v;
    }
    x[best] = 1.0;
  }
  return x;
}

std::vector<double> normalize_per_block(const BlockPartition& partition,
                                        std::span<const double> signal) {
  std::vector<double> out(signal.begin(), signal.end());
  for (int k = 0; k < partition.block_count(); ++k) {
    const auto nodes = partition.block_nodes(k);
    if (nodes.empty()) continue;
    double lo = signal[nodes[0]];
    double hi = lo;
    for (NodeId v : nodes) {
      lo = std::min(lo, signal[v]);
      hi = std::max(hi, signal[v]);
    }
    for (NodeId v : nodes) out[v] = hi > lo ? (signal[v] - lo) / (hi - lo) : 0.0;
  }
  return out;
}

}  // namespace gbgp
