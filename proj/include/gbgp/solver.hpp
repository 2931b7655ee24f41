#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gbgp/graph.hpp"
#include "gbgp/objectives.hpp"
#include "gbgp/projections.hpp"

namespace gbgp {

enum class StepMode { Fixed, Backtracking };

// What the head projection is applied to. ProjectedGradient zeroes gradient
// entries that point out of the box (x_j = 0 with a positive partial, or
// x_j = 1 with a negative one), since no feasible step can use them.
enum class HeadInput { ProjectedGradient, RawGradient };

struct SolverConfig {
  std::vector<int> budgets;  // s_k per block; a single entry applies to every block
  double outer_tol = 1e-3;
  double inner_tol = 1e-6;
  int max_outer_iters = 30;
  int max_inner_iters = 200;
  StepMode step_mode = StepMode::Backtracking;
  double fixed_step = 1.0;
  HeadInput head_input = HeadInput::ProjectedGradient;
  ProjectionOptions projection;
  // 0 = serial cyclic solver. tau >= 1 = randomized parallel solver with
  // expected tau blocks per round and at most tau worker threads.
  int parallel = 0;
  std::uint64_t seed = 0;
  // Assert support containment, Omega construction and connectivity each
  // outer iteration (throws SolverError on violation).
  bool check_invariants = true;
  // Keep x after every outer iteration in DetectionResult::iterates.
  bool record_iterates = false;
};

struct OuterRecord {
  int iteration = 0;
  double delta = 0.0;      // sum_k ||x^{k,i+1} - x^{k,i}||
  double objective = 0.0;  // F(x^{i+1})
  double wall_ms = 0.0;    // since solve start
};

struct DetectionResult {
  BlockSupports supports;  // Psi_k of the last outer iteration, global ids
  std::vector<double> x_final;
  int outer_iters = 0;
  bool converged = false;
  std::vector<OuterRecord> history;
  std::vector<std::vector<double>> iterates;  // only with record_iterates
  double head_seconds = 0.0;
  double inner_seconds = 0.0;
  double tail_seconds = 0.0;
  double total_seconds = 0.0;
};

// Per-block support restriction in block-local ids (sorted).
using LocalSupports = std::vector<std::vector<NodeId>>;

// Algorithm 1. Starts from x_init (global, length N).
DetectionResult gbgp_solve(const BlockObjective& objective, const SolverConfig& config,
                           std::span<const double> x_init);
// Same, starting from initial_point() of the objective's signal.
DetectionResult gbgp_solve(const ScanObjective& objective, const SolverConfig& config);

// Algorithm 2: cyclic accelerated proximal block-coordinate descent on the
// restriction supp(x^k) within omega[k]. Returns the global vector b.
std::vector<double> bcd_solve(const BlockObjective& objective, const LocalSupports& omega,
                              std::span<const double> x_init, const SolverConfig& config);

// Algorithm 3: randomized parallel block-coordinate descent with
// theta-sequence acceleration; config.parallel = tau >= 1.
std::vector<double> parallel_bcd_solve(const BlockObjective& objective, const LocalSupports& omega,
                                       std::span<const double> x_init, const SolverConfig& config);

// Closed-form proximal linear step: clip(zero_off_omega(y - alpha * grad)).
std::vector<double> proximal_block_update(std::span<const double> y, std::span<const double> grad,
                                          double alpha, std::span<const char> in_omega);

// Step size for block k at the point x (block k of x is the extrapolated
// point). Fixed mode returns config.fixed_step. Backtracking halves from 1.0
// until F(x+) <= F(y) + <g, x+ - y> + |x+ - y|^2 / (2 alpha); throws
// SolverError once alpha drops below 1e-12.
double estimate_step_size(const BlockObjective& objective, int k, std::span<const double> x,
                          std::span<const char> in_omega, const SolverConfig& config);

// rho_{t+1} = (1 + sqrt(1 + 4 rho_t^2)) / 2.
double next_rho(double rho);
// theta_{t+1} = (sqrt(theta^4 + 4 theta^2) - theta^2) / 2.
double next_theta(double theta);

// `i <TAB> delta <TAB> objective <TAB> wall_ms` per outer iteration.
void write_trace(const std::filesystem::path& path, const std::vector<OuterRecord>& history);

}  // namespace gbgp
