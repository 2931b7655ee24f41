#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gbgp/datagen.hpp"
#include "gbgp/io.hpp"
#include "gbgp/solver.hpp"

namespace gbgp {

struct MetricRow {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double wall_seconds = 0.0;
};

// P = |D & T| / |D| (0 when D is empty), R = |D & T| / |T| (1 when both are
// empty, 0 when only T is), F = 2PR / (P + R) or 0. Labeled inputs are pooled
// over (t, node) pairs.
MetricRow precision_recall_f1(std::span<const NodeId> detected, std::span<const NodeId> truth);
MetricRow precision_recall_f1(const LabeledNodes& detected, const LabeledNodes& truth);

// Detected supports against the problem's per-block truth, pooled.
MetricRow score(const Problem& problem, const BlockSupports& supports);

// Supports / truth as labeled nodes. Temporal problems are written with
// per-timestamp base ids; everything else as t=0 with global ids.
LabeledNodes supports_to_labeled(const Problem& problem, const BlockSupports& supports);
LabeledNodes truth_to_labeled(const Problem& problem);
// Inverse of supports_to_labeled; one SupportSet per block, sorted nodes.
BlockSupports labeled_to_supports(const Problem& problem, const LabeledNodes& labeled);

struct DetectConfig {
  double lambda = 0.0;
  EmsForm form = EmsForm::Squared;
  bool normalize = false;  // min-max rescale the signal per block
  SolverConfig solver;
};

DetectionResult detect(const Problem& problem, const DetectConfig& config);

struct ExperimentRow {
  std::string dataset;
  double mu = 0.0;
  double noise_percent = 0.0;
  MetricRow metrics;
  std::uint64_t seed = 0;
  bool converged = false;
};

struct ExperimentSummary {
  MetricRow mean;
  MetricRow stddev;  // sample standard deviation; 0 for a single run
  std::vector<ExperimentRow> runs;
};

// Builds the problem for one seed.
using ProblemFactory = std::function<void(std::uint64_t seed, Problem& problem)>;

struct ExperimentConfig {
  std::string dataset = "synthetic";
  double mu = 0.0;
  double noise_percent = 0.0;
  DetectConfig detect;
};

// One detection per seed (solver seed = instance seed), rows in seed order.
// Solver failures are rethrown with the seed attached.
ExperimentSummary run_experiment(const ProblemFactory& factory, const ExperimentConfig& config,
                                 std::span<const std::uint64_t> seeds);

ExperimentSummary summarize(std::vector<ExperimentRow> runs);

// Binary signal (1 on truth) with flip noise at each percentage, one
// detection per level on a single-block problem.
std::vector<ExperimentRow> robustness_sweep(const Graph& graph, std::span<const NodeId> truth,
                                            std::span<const double> noise_percents,
                                            const DetectConfig& config, std::uint64_t seed);

struct ScalingRow {
  NodeId n = 0;
  std::size_t edges = 0;
  double wall_seconds = 0.0;  // median over repeats
};

struct ScalingSpec {
  int m = 3;
  int subgraph_size = 50;
  double mu = 5.0;
  int repeats = 3;
  std::uint64_t seed = 0;
};

// Single-block planted instances on preferential-attachment graphs; only
// gbgp_solve is timed.
std::vector<ScalingRow> scaling_bench(std::span<const NodeId> sizes, const ScalingSpec& spec,
                                      const DetectConfig& config);

struct ParallelComparison {
  MetricRow serial;
  MetricRow parallel;
  double speedup = 0.0;  // serial / parallel median wall time
};

// Median-of-repeats timing of the serial and tau-parallel solver on one
// network-of-networks instance.
ParallelComparison compare_parallel(const NonSpec& spec, const DetectConfig& config, int tau,
                                    int repeats);

// TSV with header `dataset mu P_noise precision recall f1 wall_s seed`.
std::string results_table(const std::vector<ExperimentRow>& rows);
std::vector<std::pair<std::string, std::string>> summary_entries(const ExperimentSummary& summary);

}  // namespace gbgp
