#pragma once

#include <span>
#include <vector>

#include "gbgp/graph.hpp"

namespace gbgp {

// How many nodes a projection may return for a user budget s.
enum class CapacityMode { Budget, TwiceBudget };

int capacity_for(int budget, CapacityMode mode);

struct ProjectionOptions {
  int components = 1;                   // g
  CapacityMode head_capacity = CapacityMode::TwiceBudget;
  CapacityMode tail_capacity = CapacityMode::Budget;
  int max_search_iterations = 50;
  double multiplier_lo = 1e-6;
  double multiplier_hi = 1e6;
  // Bisection stops once log(hi) - log(lo) drops below this width.
  double log_width_tol = 1e-3;
  // Extend the best support through adjacent positive-prize nodes up to capacity.
  bool grow_to_capacity = true;
};

struct ProjectionOutcome {
  std::vector<NodeId> support;  // sorted block-local ids
  double residual_sq = 0.0;     // head: ||w_S||^2, tail: ||b - b_S||^2
  int budget_used = 0;          // == support.size()
  int search_iterations = 0;    // PCST solves performed
};

// Searches the PCST edge-cost multiplier so the returned forest has at most
// `capacity` nodes and at most options.components trees. Prizes are scaled to
// max 1 before searching. residual_sq is left at 0; callers fill it in.
ProjectionOutcome budget_search(const Graph& graph, std::span<const double> prizes, int capacity,
                                const ProjectionOptions& options);

// Support capturing large ||w_S||_2 among connected sets (prizes w_i^2).
ProjectionOutcome head_project(std::span<const double> weights, const Graph& graph, int budget,
                               const ProjectionOptions& options = {});

// Support with small ||b - b_S||_2 among connected sets (prizes b_i^2).
ProjectionOutcome tail_project(std::span<const double> values, const Graph& graph, int budget,
                               const ProjectionOptions& options = {});

}  // namespace gbgp
