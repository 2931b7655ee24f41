#include "gbgp/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <memory>
#include <set>
#include <sstream>

#include "gbgp/datagen.hpp"
#include "gbgp/error.hpp"
#include "gbgp/eval.hpp"
#include "gbgp/io.hpp"
#include "gbgp/rng.hpp"

namespace gbgp {

namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string out = "out";
  std::string config;
  int parallel = 0;
};

struct SynthOptions {
  std::string kind = "temporal";
  NodeId n = 0;
  int m = 4;
  int timestamps = 7;
  int size = 30;
  int size_last = 0;
  double overlap = 0.5;
  double mu = 5.0;
  int blocks = 8;
};

struct SolverOptions {
  int budget = 35;
  double lambda = 0.01;
  std::string form = "squared";
  bool normalize = false;
  double outer_tol = 1e-3;
  double inner_tol = 1e-6;
  int max_outer = 30;
  int max_inner = 200;
  std::string step = "backtracking";
  double fixed_step = 1.0;
  std::string head_capacity = "2s";
  std::string head_input = "projected";
  int components = 1;
};

struct InputOptions {
  std::string bundle;
  std::string objective;
  std::string graph;
  std::vector<std::string> signals;
  std::string partition;
  int blocks = 0;
};

struct EvalOptions {
  std::string detected;
  std::string truth;
  std::string dataset = "synthetic";
  double mu = 0.0;
  double noise = 0.0;
};

struct BenchOptions {
  std::vector<NodeId> sizes = {2500, 5000, 10000, 20000};
  int repeats = 3;
  int size = 50;
  double mu = 5.0;
  int tau = 0;
  NodeId parallel_n = 4000;
  int parallel_blocks = 8;
};

struct GridOptions {
  std::vector<int> budgets = {10, 20, 30, 40, 50, 60};
  std::vector<double> lambdas = {0.0005, 0.001, 0.005, 0.01, 0.05, 0.1};
};

void add_solver_options(CLI::App* cmd, SolverOptions& o, bool with_budget_and_lambda) {
  if (with_budget_and_lambda) {
    cmd->add_option("--budget", o.budget, "sparsity budget s per block")->capture_default_str();
    cmd->add_option("--lambda", o.lambda, "coupling trade-off")->capture_default_str();
  }
  cmd->add_option("--form", o.form, "EMS form")
      ->check(CLI::IsMember({"squared", "sqrt"}))
      ->capture_default_str();
  cmd->add_flag("--normalize", o.normalize, "min-max rescale the signal per block");
  cmd->add_option("--outer-tol", o.outer_tol)->capture_default_str();
  cmd->add_option("--inner-tol", o.inner_tol)->capture_default_str();
  cmd->add_option("--max-outer", o.max_outer)->capture_default_str();
  cmd->add_option("--max-inner", o.max_inner)->capture_default_str();
  cmd->add_option("--step", o.step)
      ->check(CLI::IsMember({"backtracking", "fixed"}))
      ->capture_default_str();
  cmd->add_option("--fixed-step", o.fixed_step)->capture_default_str();
  cmd->add_option("--head-capacity", o.head_capacity)
      ->check(CLI::IsMember({"s", "2s"}))
      ->capture_default_str();
  cmd->add_option("--head-input", o.head_input)
      ->check(CLI::IsMember({"projected", "raw"}))
      ->capture_default_str();
  cmd->add_option("--components", o.components, "trees per support (g)")->capture_default_str();
}

void add_input_options(CLI::App* cmd, InputOptions& o) {
  cmd->add_option("--bundle", o.bundle, "instance bundle directory (default <out>/instance)");
  cmd->add_option("--objective", o.objective, "temporal | non | ems (explicit inputs)")
      ->check(CLI::IsMember({"temporal", "non", "ems"}));
  cmd->add_option("--graph", o.graph, "edge list (explicit inputs)");
  cmd->add_option("--signal", o.signals, "signal file; repeat once per timestamp");
  cmd->add_option("--partition", o.partition, "block assignment file (non)");
  cmd->add_option("--blocks", o.blocks, "block count (non)");
}

DetectConfig make_detect_config(const SolverOptions& o, const GlobalOptions& g) {
  DetectConfig dc;
  dc.lambda = o.lambda;
  dc.form = o.form == "sqrt" ? EmsForm::Sqrt : EmsForm::Squared;
  dc.normalize = o.normalize;
  auto& s = dc.solver;
  s.budgets = {o.budget};
  s.outer_tol = o.outer_tol;
  s.inner_tol = o.inner_tol;
  s.max_outer_iters = o.max_outer;
  s.max_inner_iters = o.max_inner;
  s.step_mode = o.step == "fixed" ? StepMode::Fixed : StepMode::Backtracking;
  s.fixed_step = o.fixed_step;
  s.head_input = o.head_input == "raw" ? HeadInput::RawGradient : HeadInput::ProjectedGradient;
  s.projection.head_capacity = o.head_capacity == "s" ? CapacityMode::Budget : CapacityMode::TwiceBudget;
  if (o.components < 1) throw ValidationError("--components must be >= 1");
  s.projection.components = o.components;
  s.parallel = g.parallel;
  s.seed = g.seed;
  return dc;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_manifest(const fs::path& dir, std::vector<std::pair<std::string, std::string>> entries) {
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() != "manifest.txt") {
      files.push_back(e.path().filename().string());
    }
  }
  std::sort(files.begin(), files.end());
  std::string joined;
  for (const auto& f : files) joined += (joined.empty() ? "" : ",") + f;
  entries.emplace_back("files", joined);
  save_key_values(dir / "manifest.txt", entries);
}

void load_problem(const InputOptions& in, const fs::path& out_dir, Problem& problem) {
  if (in.graph.empty()) {
    const fs::path bundle = in.bundle.empty() ? out_dir / "instance" : fs::path(in.bundle);
    if (!fs::exists(bundle / "metadata.txt")) {
      throw IoError("no instance bundle at " + bundle.string());
    }
    load_bundle(bundle, problem);
    return;
  }
  if (in.objective.empty()) throw ValidationError("--objective is required with --graph");
  if (in.signals.empty()) throw ValidationError("--signal is required with --graph");
  const Graph graph = load_graph(in.graph);
  std::vector<std::vector<double>> signals;
  for (const auto& s : in.signals) signals.push_back(load_signal(s, graph.node_count()));
  if (in.objective == "temporal") {
    build_temporal_problem(problem, graph, signals, {});
  } else {
    if (signals.size() != 1) throw ValidationError("exactly one --signal expected");
    if (in.objective == "non") {
      if (in.partition.empty() || in.blocks < 1) {
        throw ValidationError("--partition and --blocks are required for --objective non");
      }
      const auto partition = load_partition(in.partition, graph, in.blocks);
      build_non_problem(problem, graph, partition.assignment(), in.blocks, signals[0], {});
    } else {
      build_single_problem(problem, graph, signals[0], {});
    }
  }
}

std::string objective_name(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::Temporal: return "temporal";
    case ObjectiveKind::NetworkOfNetworks: return "non";
    case ObjectiveKind::EmsOnly: return "ems";
  }
  return "ems";
}

int cmd_synth(const SynthOptions& o, const GlobalOptions& g, const fs::path& out_dir,
              std::ostream& out) {
  const fs::path dir = out_dir / "instance";
  ensure_dir(dir);
  if (o.kind == "temporal") {
    SyntheticSpec spec;
    spec.n = o.n;
    spec.m = o.m;
    spec.timestamps = o.timestamps;
    spec.subgraph_size = o.size;
    spec.subgraph_size_last = o.size_last;
    spec.overlap = o.overlap;
    spec.mu = o.mu;
    spec.seed = g.seed;
    write_temporal_bundle(dir, make_temporal_instance(spec));
  } else {
    NonSpec spec;
    spec.n = o.n;
    spec.m = o.m;
    spec.blocks = o.blocks;
    spec.subgraph_size = o.size;
    spec.mu = o.mu;
    spec.seed = g.seed;
    write_non_bundle(dir, make_non_instance(spec));
  }
  write_manifest(dir, {{"command", "synth"}, {"kind", o.kind}, {"seed", std::to_string(g.seed)}});
  out << dir.string() << '\n';
  return kExitOk;
}

int cmd_detect(const InputOptions& in, const SolverOptions& so, const GlobalOptions& g,
               const fs::path& out_dir, std::ostream& out) {
  auto problem = std::make_unique<Problem>();
  load_problem(in, out_dir, *problem);
  const auto config = make_detect_config(so, g);
  const auto result = detect(*problem, config);

  const fs::path dir = out_dir / "detect";
  ensure_dir(dir);
  save_labeled_nodes(dir / "support.tsv", supports_to_labeled(*problem, result.supports));
  std::ostringstream xs;
  const auto& p = problem->partition;
  for (int k = 0; k < p.block_count(); ++k) {
    for (NodeId v : p.block_nodes(k)) {
      const NodeId id = problem->kind == ObjectiveKind::Temporal
                            ? v - static_cast<NodeId>(k) * problem->base_nodes
                            : v;
      const int t = problem->kind == ObjectiveKind::Temporal ? k : 0;
      xs << t << '\t' << id << '\t' << format_double(result.x_final[v]) << '\n';
    }
  }
  write_text(dir / "x.tsv", xs.str());
  write_trace(dir / "trace.tsv", result.history);
  std::size_t detected = 0;
  for (const auto& s : result.supports) detected += s.nodes.size();
  write_manifest(dir, {{"command", "detect"},
                       {"objective", objective_name(problem->kind)},
                       {"budget", std::to_string(so.budget)},
                       {"lambda", format_double(so.lambda)},
                       {"parallel", std::to_string(g.parallel)},
                       {"seed", std::to_string(g.seed)},
                       {"converged", result.converged ? "true" : "false"},
                       {"outer_iters", std::to_string(result.outer_iters)},
                       {"detected_nodes", std::to_string(detected)}});
  out << "converged=" << (result.converged ? "true" : "false")
      << " outer_iters=" << result.outer_iters << " detected_nodes=" << detected << '\n';
  if (!problem->truth.empty() &&
      std::any_of(problem->truth.begin(), problem->truth.end(), [](const auto& t) { return !t.empty(); })) {
    const auto m = score(*problem, result.supports);
    out << "precision=" << format_double(m.precision) << " recall=" << format_double(m.recall)
        << " f1=" << format_double(m.f1) << '\n';
  }
  return result.converged ? kExitOk : kExitNotConverged;
}

int cmd_eval(const EvalOptions& o, const GlobalOptions& g, const fs::path& out_dir,
             std::ostream& out) {
  const fs::path detected = o.detected.empty() ? out_dir / "detect" / "support.tsv" : fs::path(o.detected);
  const fs::path truth = o.truth.empty() ? out_dir / "instance" / "truth.tsv" : fs::path(o.truth);
  const auto m = precision_recall_f1(load_labeled_nodes(detected), load_labeled_nodes(truth));
  ExperimentRow row;
  row.dataset = o.dataset;
  row.mu = o.mu;
  row.noise_percent = o.noise;
  row.metrics = m;
  row.seed = g.seed;
  const auto summary = summarize({row});
  const fs::path dir = out_dir / "eval";
  ensure_dir(dir);
  write_text(dir / "results.tsv", results_table(summary.runs));
  save_key_values(dir / "summary.txt", summary_entries(summary));
  write_manifest(dir, {{"command", "eval"}, {"seed", std::to_string(g.seed)}});
  out << "precision=" << format_double(m.precision) << " recall=" << format_double(m.recall)
      << " f1=" << format_double(m.f1) << '\n';
  return kExitOk;
}

int cmd_bench(const BenchOptions& o, const SolverOptions& so, const GlobalOptions& g,
              const fs::path& out_dir, std::ostream& out) {
  auto config = make_detect_config(so, g);
  config.solver.parallel = 0;
  ScalingSpec spec;
  spec.m = 3;
  spec.subgraph_size = o.size;
  spec.mu = o.mu;
  spec.repeats = o.repeats;
  spec.seed = g.seed;
  const auto rows = scaling_bench(o.sizes, spec, config);
  const fs::path dir = out_dir / "eval";
  ensure_dir(dir);
  std::ostringstream table;
  table << "n\tedges\twall_s\n";
  for (const auto& r : rows) {
    table << r.n << '\t' << r.edges << '\t' << format_double(r.wall_seconds) << '\n';
  }
  write_text(dir / "scaling.tsv", table.str());
  out << table.str();
  if (o.tau > 0) {
    NonSpec ns;
    ns.n = o.parallel_n;
    ns.m = 3;
    ns.blocks = o.parallel_blocks;
    ns.subgraph_size = o.size;
    ns.mu = o.mu;
    ns.seed = g.seed;
    const auto cmp = compare_parallel(ns, config, o.tau, o.repeats);
    std::ostringstream ptable;
    ptable << "mode\ttau\tprecision\trecall\tf1\twall_s\n"
           << "serial\t1\t" << format_double(cmp.serial.precision) << '\t'
           << format_double(cmp.serial.recall) << '\t' << format_double(cmp.serial.f1) << '\t'
           << format_double(cmp.serial.wall_seconds) << '\n'
           << "parallel\t" << o.tau << '\t' << format_double(cmp.parallel.precision) << '\t'
           << format_double(cmp.parallel.recall) << '\t' << format_double(cmp.parallel.f1) << '\t'
           << format_double(cmp.parallel.wall_seconds) << '\n';
    write_text(dir / "parallel.tsv", ptable.str());
    out << ptable.str() << "speedup=" << format_double(cmp.speedup) << '\n';
  }
  write_manifest(dir, {{"command", "bench"}, {"seed", std::to_string(g.seed)}});
  return kExitOk;
}

int cmd_gridsearch(const InputOptions& in, const GridOptions& grid, const SolverOptions& so,
                   const GlobalOptions& g, const fs::path& out_dir, std::ostream& out) {
  if (grid.budgets.empty() || grid.lambdas.empty()) throw ValidationError("empty parameter grid");
  auto problem = std::make_unique<Problem>();
  load_problem(in, out_dir, *problem);
  struct Cell {
    int budget;
    double lambda;
    MetricRow metrics;
  };
  std::vector<Cell> cells;
  for (int s : grid.budgets) {
    for (double lambda : grid.lambdas) {
      SolverOptions cell_opts = so;
      cell_opts.budget = s;
      cell_opts.lambda = lambda;
      const auto result = detect(*problem, make_detect_config(cell_opts, g));
      cells.push_back({s, lambda, score(*problem, result.supports)});
    }
  }
  std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    if (a.metrics.f1 != b.metrics.f1) return a.metrics.f1 > b.metrics.f1;
    if (a.budget != b.budget) return a.budget < b.budget;
    return a.lambda < b.lambda;
  });
  std::ostringstream table;
  table << "rank\tbudget\tlambda\tprecision\trecall\tf1\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    table << i + 1 << '\t' << c.budget << '\t' << format_double(c.lambda) << '\t'
          << format_double(c.metrics.precision) << '\t' << format_double(c.metrics.recall) << '\t'
          << format_double(c.metrics.f1) << '\n';
  }
  const fs::path dir = out_dir / "eval";
  ensure_dir(dir);
  write_text(dir / "gridsearch.tsv", table.str());
  write_manifest(dir, {{"command", "gridsearch"},
                       {"seed", std::to_string(g.seed)},
                       {"best_budget", std::to_string(cells[0].budget)},
                       {"best_lambda", format_double(cells[0].lambda)},
                       {"best_f1", format_double(cells[0].metrics.f1)}});
  out << table.str() << "best budget=" << cells[0].budget
      << " lambda=" << format_double(cells[0].lambda) << '\n';
  return kExitOk;
}

const std::set<std::string> kRootValueOptions = {"--seed", "--out", "--config", "--parallel"};

// Config entries become `--key=value` arguments placed right after the
// subcommand; keys also given on the command line are skipped (flags win).
std::vector<std::string> expand_config(const std::vector<std::string>& args,
                                       const std::set<std::string>& commands) {
  std::string config_path;
  std::size_t command_pos = args.size();
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (a.rfind("--config=", 0) == 0) config_path = a.substr(9);
    if (command_pos == args.size() && commands.count(a)) command_pos = i;
    if (kRootValueOptions.count(a)) ++i;
  }
  if (config_path.empty()) return args;
  if (command_pos == args.size()) return args;  // CLI11 reports the missing command

  std::set<std::string> given;
  for (const auto& a : args) {
    if (a.rfind("--", 0) == 0) given.insert(a.substr(0, a.find('=')));
  }
  std::vector<std::string> expanded(args.begin(), args.begin() + command_pos + 1);
  for (const auto& [key, value] : load_key_values(config_path)) {
    const std::string flag = "--" + key;
    if (key == "config") throw ValidationError("config files cannot include other config files");
    if (given.count(flag)) continue;
    expanded.push_back(flag + "=" + value);
  }
  expanded.insert(expanded.end(), args.begin() + command_pos + 1, args.end());
  return expanded;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Connected anomalous subgraph detection on interdependent networks", "gbgp"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--config", g.config, "key=value file of option defaults");
  app.add_option("--parallel", g.parallel, "worker count for the randomized parallel solver (0 = serial)")
      ->capture_default_str();

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic instance bundle");
  synth_cmd->add_option("--kind", synth.kind)
      ->check(CLI::IsMember({"temporal", "non"}))
      ->capture_default_str();
  synth_cmd->add_option("--n", synth.n, "node count")->required();
  synth_cmd->add_option("--m", synth.m, "attachment edges per node")->capture_default_str();
  synth_cmd->add_option("--T", synth.timestamps, "timestamps (temporal)")->capture_default_str();
  synth_cmd->add_option("--size", synth.size, "true subgraph size")->capture_default_str();
  synth_cmd->add_option("--size-last", synth.size_last, "final size of a linear size ramp");
  synth_cmd->add_option("--overlap", synth.overlap)->capture_default_str();
  synth_cmd->add_option("--mu", synth.mu)->capture_default_str();
  synth_cmd->add_option("--blocks", synth.blocks, "block count (non)")->capture_default_str();

  InputOptions detect_in;
  SolverOptions detect_solver;
  auto* detect_cmd = app.add_subcommand("detect", "run detection on an instance");
  add_input_options(detect_cmd, detect_in);
  add_solver_options(detect_cmd, detect_solver, true);

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "score a support file against ground truth");
  eval_cmd->add_option("--detected", eval.detected, "default <out>/detect/support.tsv");
  eval_cmd->add_option("--truth", eval.truth, "default <out>/instance/truth.tsv");
  eval_cmd->add_option("--dataset", eval.dataset)->capture_default_str();
  eval_cmd->add_option("--mu", eval.mu)->capture_default_str();
  eval_cmd->add_option("--noise", eval.noise, "flip-noise percent")->capture_default_str();

  BenchOptions bench;
  SolverOptions bench_solver;
  bench_solver.budget = 50;
  auto* bench_cmd = app.add_subcommand("bench", "runtime scaling benchmark");
  bench_cmd->add_option("--sizes", bench.sizes, "ascending node counts")->delimiter(',');
  bench_cmd->add_option("--repeats", bench.repeats)->capture_default_str();
  bench_cmd->add_option("--size", bench.size, "planted subgraph size")->capture_default_str();
  bench_cmd->add_option("--mu", bench.mu)->capture_default_str();
  bench_cmd->add_option("--tau", bench.tau, "also compare serial vs tau-parallel (0 = skip)");
  bench_cmd->add_option("--parallel-n", bench.parallel_n)->capture_default_str();
  bench_cmd->add_option("--parallel-blocks", bench.parallel_blocks)->capture_default_str();
  add_solver_options(bench_cmd, bench_solver, true);

  InputOptions grid_in;
  GridOptions grid;
  SolverOptions grid_solver;
  auto* grid_cmd = app.add_subcommand("gridsearch", "rank (budget, lambda) cells by F-measure");
  add_input_options(grid_cmd, grid_in);
  grid_cmd->add_option("--budgets", grid.budgets)->delimiter(',');
  grid_cmd->add_option("--lambdas", grid.lambdas)->delimiter(',');
  add_solver_options(grid_cmd, grid_solver, false);

  try {
    const std::set<std::string> commands = {"synth", "detect", "eval", "bench", "gridsearch"};
    auto args = expand_config(raw_args, commands);
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << '\n';
      return kExitValidation;
    }
    if (g.parallel < 0) throw ValidationError("--parallel must be >= 0");
    const fs::path out_dir = fs::absolute(g.out);

    if (*synth_cmd) return cmd_synth(synth, g, out_dir, out);
    if (*detect_cmd) return cmd_detect(detect_in, detect_solver, g, out_dir, out);
    if (*eval_cmd) return cmd_eval(eval, g, out_dir, out);
    if (*bench_cmd) return cmd_bench(bench, bench_solver, g, out_dir, out);
    if (*grid_cmd) return cmd_gridsearch(grid_in, grid, grid_solver, g, out_dir, out);
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const SolverError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNotConverged;
  }
}

}  // namespace gbgp
