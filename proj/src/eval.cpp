#include "gbgp/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <set>
#include <sstream>

#include "gbgp/error.hpp"
#include "gbgp/rng.hpp"

namespace gbgp {

namespace {

template <typename T>
MetricRow metrics_from_sets(std::set<T> detected, const std::set<T>& truth) {
  std::size_t hits = 0;
  for (const auto& d : detected) hits += truth.count(d);
  MetricRow row;
  row.precision = detected.empty() ? 0.0 : static_cast<double>(hits) / detected.size();
  if (truth.empty()) {
    row.recall = detected.empty() ? 1.0 : 0.0;
  } else {
    row.recall = static_cast<double>(hits) / truth.size();
  }
  const double sum = row.precision + row.recall;
  row.f1 = sum > 0.0 ? 2.0 * row.precision * row.recall / sum : 0.0;
  return row;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

MetricRow precision_recall_f1(std::span<const NodeId> detected, std::span<const NodeId> truth) {
  return metrics_from_sets(std::set<NodeId>(detected.begin(), detected.end()),
                           std::set<NodeId>(truth.begin(), truth.end()));
}

MetricRow precision_recall_f1(const LabeledNodes& detected, const LabeledNodes& truth) {
  return metrics_from_sets(std::set<std::pair<int, NodeId>>(detected.begin(), detected.end()),
                           std::set<std::pair<int, NodeId>>(truth.begin(), truth.end()));
}

LabeledNodes supports_to_labeled(const Problem& problem, const BlockSupports& supports) {
  LabeledNodes out;
  for (const auto& s : supports) {
    for (NodeId v : s.nodes) {
      if (problem.kind == ObjectiveKind::Temporal) {
        out.emplace_back(s.block_id, v - static_cast<NodeId>(s.block_id) * problem.base_nodes);
      } else {
        out.emplace_back(0, v);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

LabeledNodes truth_to_labeled(const Problem& problem) {
  BlockSupports as_supports;
  for (std::size_t k = 0; k < problem.truth.size(); ++k) {
    as_supports.push_back({static_cast<int>(k), problem.truth[k]});
  }
  return supports_to_labeled(problem, as_supports);
}

BlockSupports labeled_to_supports(const Problem& problem, const LabeledNodes& labeled) {
  const int blocks = problem.partition.block_count();
  BlockSupports supports(static_cast<std::size_t>(blocks));
  for (int k = 0; k < blocks; ++k) supports[k].block_id = k;
  for (const auto& [t, v] : labeled) {
    if (problem.kind == ObjectiveKind::Temporal) {
      if (t < 0 || t >= blocks || v < 0 || v >= problem.base_nodes) {
        throw ValidationError("support entry (" + std::to_string(t) + ", " + std::to_string(v) +
                              ") out of range");
      }
      supports[t].nodes.push_back(static_cast<NodeId>(t) * problem.base_nodes + v);
    } else {
      if (t != 0 || v < 0 || v >= problem.graph.node_count()) {
        throw ValidationError("support entry (" + std::to_string(t) + ", " + std::to_string(v) +
                              ") out of range");
      }
      supports[problem.partition.block_of(v)].nodes.push_back(v);
    }
  }
  for (auto& s : supports) {
    std::sort(s.nodes.begin(), s.nodes.end());
    s.nodes.erase(std::unique(s.nodes.begin(), s.nodes.end()), s.nodes.end());
  }
  return supports;
}

MetricRow score(const Problem& problem, const BlockSupports& supports) {
  return precision_recall_f1(supports_to_labeled(problem, supports), truth_to_labeled(problem));
}

DetectionResult detect(const Problem& problem, const DetectConfig& config) {
  ObjectiveSpec spec;
  spec.kind = problem.kind;
  spec.lambda = config.lambda;
  spec.form = config.form;
  spec.signal = config.normalize ? normalize_per_block(problem.partition, problem.signal)
                                 : problem.signal;
  const ScanObjective objective(problem.graph, problem.partition, std::move(spec));
  return gbgp_solve(objective, config.solver);
}

ExperimentSummary summarize(std::vector<ExperimentRow> runs) {
  ExperimentSummary summary;
  const auto n = static_cast<double>(runs.size());
  if (runs.empty()) return summary;
  auto accumulate = [&](auto field) {
    double mean = 0.0;
    for (const auto& r : runs) mean += field(r.metrics);
    mean /= n;
    double var = 0.0;
    for (const auto& r : runs) var += (field(r.metrics) - mean) * (field(r.metrics) - mean);
    const double sd = runs.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    return std::pair{mean, sd};
  };
  std::tie(summary.mean.precision, summary.stddev.precision) =
      accumulate([](const MetricRow& m) { return m.precision; });
  std::tie(summary.mean.recall, summary.stddev.recall) =
      accumulate([](const MetricRow& m) { return m.recall; });
  std::tie(summary.mean.f1, summary.stddev.f1) = accumulate([](const MetricRow& m) { return m.f1; });
  std::tie(summary.mean.wall_seconds, summary.stddev.wall_seconds) =
      accumulate([](const MetricRow& m) { return m.wall_seconds; });
  summary.runs = std::move(runs);
  return summary;
}

ExperimentSummary run_experiment(const ProblemFactory& factory, const ExperimentConfig& config,
                                 std::span<const std::uint64_t> seeds) {
  std::vector<ExperimentRow> rows;
  for (const std::uint64_t seed : seeds) {
    auto problem = std::make_unique<Problem>();
    factory(seed, *problem);
    DetectConfig dc = config.detect;
    dc.solver.seed = seed;
    DetectionResult result;
    try {
      result = detect(*problem, dc);
    } catch (const SolverError& e) {
      throw SolverError("seed " + std::to_string(seed) + ": " + e.what());
    }
    ExperimentRow row;
    row.dataset = config.dataset;
    row.mu = config.mu;
    row.noise_percent = config.noise_percent;
    row.metrics = score(*problem, result.supports);
    row.metrics.wall_seconds = result.total_seconds;
    row.seed = seed;
    row.converged = result.converged;
    rows.push_back(std::move(row));
  }
  return summarize(std::move(rows));
}

std::vector<ExperimentRow> robustness_sweep(const Graph& graph, std::span<const NodeId> truth,
                                            std::span<const double> noise_percents,
                                            const DetectConfig& config, std::uint64_t seed) {
  std::vector<double> binary(static_cast<std::size_t>(graph.node_count()), 0.0);
  for (NodeId v : truth) binary[v] = 1.0;
  std::vector<ExperimentRow> rows;
  for (const double percent : noise_percents) {
    const auto noisy = flip_noise(binary, percent, derive_seed(seed, "noise"));
    auto problem = std::make_unique<Problem>();
    build_single_problem(*problem, graph, noisy, truth);
    DetectConfig dc = config;
    dc.solver.seed = seed;
    const auto result = detect(*problem, dc);
    ExperimentRow row;
    row.dataset = "robustness";
    row.noise_percent = percent;
    row.metrics = score(*problem, result.supports);
    row.metrics.wall_seconds = result.total_seconds;
    row.seed = seed;
    row.converged = result.converged;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ScalingRow> scaling_bench(std::span<const NodeId> sizes, const ScalingSpec& spec,
                                      const DetectConfig& config) {
  if (!std::is_sorted(sizes.begin(), sizes.end())) throw ValidationError("sizes must be ascending");
  if (spec.repeats < 1) throw ValidationError("repeats must be >= 1");
  std::vector<ScalingRow> rows;
  for (const NodeId n : sizes) {
    const std::uint64_t seed = derive_seed(spec.seed, "scaling/" + std::to_string(n));
    const Graph graph = barabasi_albert(n, spec.m, derive_seed(seed, "graph"));
    const auto truth = random_walk_subgraph(graph, spec.subgraph_size, derive_seed(seed, "truth"));
    auto problem = std::make_unique<Problem>();
    build_single_problem(*problem, graph,
                         inject_features(n, truth, spec.mu, derive_seed(seed, "signal")), truth);
    ObjectiveSpec os;
    os.kind = problem->kind;
    os.lambda = config.lambda;
    os.form = config.form;
    os.signal = problem->signal;
    const ScanObjective objective(problem->graph, problem->partition, std::move(os));
    const auto x0 = initial_point(problem->partition, problem->signal);
    std::vector<double> times;
    for (int r = 0; r < spec.repeats; ++r) {
      const auto start = std::chrono::steady_clock::now();
      gbgp_solve(objective, config.solver, x0);
      times.push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    rows.push_back({n, graph.edge_count(), median(times)});
  }
  return rows;
}

ParallelComparison compare_parallel(const NonSpec& spec, const DetectConfig& config, int tau,
                                    int repeats) {
  if (tau < 1) throw ValidationError("tau must be >= 1");
  if (repeats < 1) throw ValidationError("repeats must be >= 1");
  const auto inst = make_non_instance(spec);
  auto problem = std::make_unique<Problem>();
  build_non_problem(*problem, inst.graph, inst.assignment, spec.blocks, inst.signal, inst.truth);

  auto run = [&](int parallel) {
    DetectConfig dc = config;
    dc.solver.parallel = parallel;
    dc.solver.seed = spec.seed;
    std::vector<double> times;
    MetricRow row;
    for (int r = 0; r < repeats; ++r) {
      const auto result = detect(*problem, dc);
      times.push_back(result.total_seconds);
      row = score(*problem, result.supports);
    }
    row.wall_seconds = median(times);
    return row;
  };
  ParallelComparison out;
  out.serial = run(0);
  out.parallel = run(tau);
  out.speedup = out.parallel.wall_seconds > 0.0 ? out.serial.wall_seconds / out.parallel.wall_seconds
                                                : 0.0;
  return out;
}

std::string results_table(const std::vector<ExperimentRow>& rows) {
  std::ostringstream out;
  out << "dataset\tmu\tP_noise\tprecision\trecall\tf1\twall_s\tseed\n";
  for (const auto& r : rows) {
    out << r.dataset << '\t' << format_double(r.mu) << '\t' << format_double(r.noise_percent) << '\t'
        << format_double(r.metrics.precision) << '\t' << format_double(r.metrics.recall) << '\t'
        << format_double(r.metrics.f1) << '\t' << format_double(r.metrics.wall_seconds) << '\t'
        << r.seed << '\n';
  }
  return out.str();
}

std::vector<std::pair<std::string, std::string>> summary_entries(const ExperimentSummary& s) {
  return {{"runs", std::to_string(s.runs.size())},
          {"precision_mean", format_double(s.mean.precision)},
          {"precision_std", format_double(s.stddev.precision)},
          {"recall_mean", format_double(s.mean.recall)},
          {"recall_std", format_double(s.stddev.recall)},
          {"f1_mean", format_double(s.mean.f1)},
          {"f1_std", format_double(s.stddev.f1)},
          {"wall_s_mean", format_double(s.mean.wall_seconds)}};
}

}  // namespace gbgp
