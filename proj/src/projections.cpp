#include "gbgp/projections.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "gbgp/error.hpp"
#include "gbgp/pcst.hpp"

namespace gbgp {

namespace {

double prize_sum(std::span<const double> prizes, const std::vector<NodeId>& nodes) {
  double total = 0.0;
  for (NodeId v : nodes) total += prizes[v];
  return total;
}

void grow_support(const Graph& graph, std::span<const double> prizes, int capacity,
                  std::vector<NodeId>& support) {
  if (static_cast<int>(support.size()) >= capacity) return;
  std::vector<char> in(static_cast<std::size_t>(graph.node_count()), 0);
  for (NodeId v : support) in[v] = 1;
  // Max prize first, lowest id on ties.
  using Item = std::pair<double, NodeId>;
  auto cmp = [](const Item& a, const Item& b) {
    return a.first != b.first ? a.first < b.first : a.second > b.second;
  };
  std::priority_queue<Item, std::vector<Item>, decltype(cmp)> frontier(cmp);
  auto push_neighbors = [&](NodeId v) {
    for (NodeId w : graph.neighbors(v)) {
      if (!in[w] && prizes[w] > 0.0) frontier.emplace(prizes[w], w);
    }
  };
  for (NodeId v : support) push_neighbors(v);
  while (!frontier.empty() && static_cast<int>(support.size()) < capacity) {
    const NodeId v = frontier.top().second;
    frontier.pop();
    if (in[v]) continue;
    in[v] = 1;
    support.push_back(v);
    push_neighbors(v);
  }
  std::sort(support.begin(), support.end());
}

void check_budget(const Graph& graph, std::span<const double> values, int budget) {
  if (graph.node_count() == 0) throw ValidationError("projection on an empty block");
  if (static_cast<NodeId>(values.size()) != graph.node_count()) {
    throw ValidationError("projection input length " + std::to_string(values.size()) +
                          " does not match block size " + std::to_string(graph.node_count()));
  }
  if (budget < 1) throw ValidationError("sparsity budget must be >= 1");
  if (budget > graph.node_count()) {
    throw ValidationError("sparsity budget " + std::to_string(budget) + " exceeds block size " +
                          std::to_string(graph.node_count()));
  }
}

}  // namespace

int capacity_for(int budget, CapacityMode mode) {
  return mode == CapacityMode::TwiceBudget ? 2 * budget : budget;
}

ProjectionOutcome budget_search(const Graph& graph, std::span<const double> prizes, int capacity,
                                const ProjectionOptions& options) {
  ProjectionOutcome outcome;
  const NodeId n = graph.node_count();
  capacity = std::min<int>(capacity, n);
  if (n == 0 || capacity < 1) return outcome;

  NodeId top = 0;
  for (NodeId v = 1; v < n; ++v) {
    if (prizes[v] > prizes[top]) top = v;
  }
  const double scale = prizes[top];
  if (!(scale > 0.0)) {
    outcome.support = {0};
    outcome.budget_used = 1;
    return outcome;
  }
  std::vector<double> scaled(prizes.begin(), prizes.end());
  for (double& p : scaled) p /= scale;

  std::vector<NodeId> best = {top};
  double best_prize = scaled[top];
  auto consider = [&](const std::vector<NodeId>& nodes) {
    const double captured = prize_sum(scaled, nodes);
    if (captured > best_prize || (captured == best_prize && nodes.size() > best.size())) {
      best = nodes;
      best_prize = captured;
    }
  };

  int iterations = 0;
  auto probe = [&](double multiplier) {
    ++iterations;
    return pcst(PcstInstance{graph, scaled, multiplier, std::nullopt, options.components}).nodes;
  };

  do {
    const auto loose = probe(options.multiplier_lo);
    if (static_cast<int>(loose.size()) <= capacity) {
      consider(loose);
      break;
    }
    if (iterations >= options.max_search_iterations) break;
    const auto tight = probe(options.multiplier_hi);
    if (static_cast<int>(tight.size()) > capacity) break;  // fall back to the top node
    consider(tight);

    double lo = std::log(options.multiplier_lo);
    double hi = std::log(options.multiplier_hi);
    while (iterations < options.max_search_iterations && hi - lo > options.log_width_tol) {
      const double mid = 0.5 * (lo + hi);
      const auto nodes = probe(std::exp(mid));
      if (static_cast<int>(nodes.size()) <= capacity) {
        consider(nodes);
        hi = mid;
        if (static_cast<int>(nodes.size()) == capacity) break;
      } else {
        lo = mid;
      }
    }
  } while (false);

  if (options.grow_to_capacity) grow_support(graph, scaled, capacity, best);
  outcome.support = std::move(best);
  outcome.budget_used = static_cast<int>(outcome.support.size());
  outcome.search_iterations = iterations;
  return outcome;
}

ProjectionOutcome head_project(std::span<const double> weights, const Graph& graph, int budget,
                               const ProjectionOptions& options) {
  check_budget(graph, weights, budget);
  std::vector<double> prizes(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) prizes[i] = weights[i] * weights[i];
  auto outcome = budget_search(graph, prizes, capacity_for(budget, options.head_capacity), options);
  outcome.residual_sq = prize_sum(prizes, outcome.support);
  return outcome;
}

ProjectionOutcome tail_project(std::span<const double> values, const Graph& graph, int budget,
                               const ProjectionOptions& options) {
  check_budget(graph, values, budget);
  std::vector<double> prizes(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) prizes[i] = values[i] * values[i];
  auto outcome = budget_search(graph, prizes, capacity_for(budget, options.tail_capacity), options);
  double outside = 0.0;
  std::vector<char> in(values.size(), 0);
  for (NodeId v : outcome.support) in[v] = 1;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!in[i]) outside += prizes[i];
  }
  outcome.residual_sq = outside;
  return outcome;
}

}  // namespace gbgp
