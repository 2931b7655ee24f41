// Runs every acceptance criterion at its stated tolerance and prints one
// pass/fail line per criterion. Exit status is nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gbgp/cli.hpp"
#include "gbgp/eval.hpp"
#include "gbgp/io.hpp"
#include "gbgp/projections.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace gbgp;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---- criteria 1, 2, 6: the synthetic temporal table ----

constexpr int kTableBudget = 35;
constexpr double kTableLambda = 0.01;

DetectConfig table_config() {
  DetectConfig dc;
  dc.lambda = kTableLambda;
  dc.solver.budgets = {kTableBudget};
  return dc;
}

void temporal_factory(double mu, std::uint64_t seed, Problem& p) {
  SyntheticSpec spec;
  spec.mu = mu;
  spec.seed = seed;
  const auto inst = make_temporal_instance(spec);
  build_temporal_problem(p, inst.graph, inst.signals, inst.truth);
}

const std::vector<std::uint64_t> kTableSeeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

struct TableResult {
  ExperimentSummary mu3, mu4, mu5;
};

const TableResult& synthetic_table() {
  static const TableResult table = [] {
    TableResult t;
    auto run = [](double mu) {
      ExperimentConfig ec;
      ec.mu = mu;
      ec.detect = table_config();
      return run_experiment([mu](std::uint64_t s, Problem& p) { temporal_factory(mu, s, p); }, ec,
                            kTableSeeds);
    };
    t.mu3 = run(3.0);
    t.mu4 = run(4.0);
    t.mu5 = run(5.0);
    return t;
  }();
  return table;
}

Verdict noise_table() {
  const auto& t = synthetic_table();
  const double f3 = t.mu3.mean.f1, f4 = t.mu4.mean.f1, f5 = t.mu5.mean.f1;
  Verdict v;
  v.pass = f5 >= 0.90 && f4 >= 0.82 && f3 >= 0.65 && f3 < f4 && f4 < f5;
  v.detail = "F(mu=3)=" + fmt(f3) + " F(mu=4)=" + fmt(f4) + " F(mu=5)=" + fmt(f5) +
             " (need >=0.65, >=0.82, >=0.90, strictly increasing)";
  return v;
}

Verdict recall_dominant() {
  const auto& t = synthetic_table();
  Verdict v{true, ""};
  for (const auto* s : {&t.mu3, &t.mu4, &t.mu5}) {
    v.pass = v.pass && s->mean.recall >= s->mean.precision;
    v.detail += "R=" + fmt(s->mean.recall) + " P=" + fmt(s->mean.precision) + "; ";
  }
  v.detail += "(mu=3,4,5; need R >= P)";
  return v;
}

Verdict convergence_behavior() {
  int monotone = 0, monotone_from_third = 0, converged = 0;
  const int runs = static_cast<int>(kTableSeeds.size());
  for (const auto seed : kTableSeeds) {
    auto problem = std::make_unique<Problem>();
    temporal_factory(5.0, seed, *problem);
    auto dc = table_config();
    dc.solver.seed = seed;
    dc.solver.record_iterates = true;
    const auto result = detect(*problem, dc);
    converged += result.converged && result.outer_iters <= 30;

    std::vector<double> planted(problem->signal.size(), 0.0);
    for (const auto& block : problem->truth) {
      for (NodeId v : block) planted[v] = 1.0;
    }
    std::vector<double> residual;
    for (const auto& x : result.iterates) {
      double total = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) total += (x[i] - planted[i]) * (x[i] - planted[i]);
      residual.push_back(std::sqrt(total));
    }
    // residual[i - 1] belongs to outer iteration i. Iterates are only
    // resolved to the inner tolerance, so smaller rises count as ties.
    const double slack = dc.solver.inner_tol;
    bool ok = true;
    for (std::size_t i = 2; i < residual.size(); ++i) ok = ok && residual[i] <= residual[i - 1] + slack;
    monotone += ok;
    bool later = true;
    for (std::size_t i = 3; i < residual.size(); ++i) later = later && residual[i] <= residual[i - 1] + slack;
    monotone_from_third += later;
  }
  Verdict v;
  v.pass = monotone >= 0.9 * runs && converged >= 0.95 * runs;
  v.detail = "non-increasing residual in " + std::to_string(monotone) + "/" + std::to_string(runs) +
             ", converged in " + std::to_string(converged) + "/" + std::to_string(runs) +
             " (need >=90%, >=95%); comparing from iteration 3 on only: " +
             std::to_string(monotone_from_third) + "/" + std::to_string(runs);
  return v;
}

// ---- criterion 3: exact recovery on easy instances ----

Verdict exact_recovery() {
  std::mt19937_64 rng(3);
  int exact = 0;
  const int instances = 20;
  for (int i = 0; i < instances; ++i) {
    Graph g;
    if (i % 2 == 0) {
      g = oracle::path_graph(8 + static_cast<NodeId>(rng() % 13));
    } else {
      static const std::pair<NodeId, NodeId> shapes[] = {{2, 4}, {3, 3}, {3, 4}, {2, 6}, {3, 5},
                                                         {4, 4}, {2, 8}, {4, 5}, {3, 6}, {2, 10}};
      const auto [r, c] = shapes[rng() % 10];
      g = oracle::grid_graph(r, c);
    }
    const int size = 2 + static_cast<int>(rng() % 4);
    const auto truth = random_walk_subgraph(g, size, rng());
    std::vector<double> c(static_cast<std::size_t>(g.node_count()), 0.0);
    for (NodeId v : truth) c[v] = 1.0;

    auto problem = std::make_unique<Problem>();
    build_single_problem(*problem, g, c, truth);
    DetectConfig dc;
    dc.lambda = 0.0;
    dc.solver.budgets = {size};
    const auto result = detect(*problem, dc);
    const auto best = oracle::best_ems_subset(g, c, size);
    exact += result.supports[0].nodes == best;
  }
  return {exact == instances, std::to_string(exact) + "/" + std::to_string(instances) +
                                  " supports equal the brute-force optimum (need all)"};
}

// ---- criterion 4: projection oracle suite ----

Graph random_tree(std::mt19937_64& rng, NodeId n) {
  std::vector<Edge> edges;
  for (NodeId v = 1; v < n; ++v) edges.push_back({static_cast<NodeId>(rng() % v), v, 1.0});
  return Graph(n, edges);
}

Graph random_sparse(std::mt19937_64& rng, NodeId n) {
  std::vector<Edge> edges;
  std::bernoulli_distribution keep(2.5 / n);
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = a + 1; b < n; ++b) {
      if (keep(rng)) edges.push_back({a, b, 1.0});
    }
  }
  return Graph(n, edges);
}

double norm_on(const std::vector<double>& w, const std::vector<NodeId>& s) {
  double total = 0.0;
  for (NodeId v : s) total += w[v] * w[v];
  return std::sqrt(total);
}

Verdict projection_suite() {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  ProjectionOptions budget_head;
  budget_head.head_capacity = CapacityMode::Budget;
  int checks = 0, failures = 0;
  auto expect = [&](bool ok) {
    ++checks;
    failures += !ok;
  };
  const std::vector<std::string> families = {"path", "cycle", "star", "tree", "sparse"};
  for (const auto& family : families) {
    for (int draw = 0; draw < 20; ++draw) {
      const NodeId n = 4 + static_cast<NodeId>(rng() % 9);
      Graph g;
      if (family == "path") g = oracle::path_graph(n);
      if (family == "cycle") g = oracle::cycle_graph(n);
      if (family == "star") g = oracle::star_graph(n);
      if (family == "tree") g = random_tree(rng, n);
      if (family == "sparse") g = random_sparse(rng, n);
      std::vector<double> w(static_cast<std::size_t>(n));
      for (auto& v : w) v = normal(rng);
      const int s = 1 + static_cast<int>(rng() % std::min<NodeId>(n, 5));

      const auto head = head_project(w, g, s);
      expect(connected_components(g, head.support).size() == 1);
      expect(norm_on(w, head.support) >= 0.5 * oracle::best_head_norm(g, w, s) - 1e-12);
      const auto tail = tail_project(w, g, s);
      expect(static_cast<int>(tail.support.size()) <= s);
      expect(connected_components(g, tail.support).size() == 1);
      expect(std::sqrt(tail.residual_sq) <= 2.0 * oracle::best_tail_residual(g, w, s) + 1e-12);

      // Single-node budgets.
      const auto tail1 = tail_project(w, g, 1);
      expect(std::abs(std::sqrt(tail1.residual_sq) - oracle::best_tail_residual(g, w, 1)) <= 1e-9);
      const auto head1 = head_project(w, g, 1, budget_head);
      expect(std::abs(norm_on(w, head1.support) - oracle::best_head_norm(g, w, 1)) <= 1e-9);

      // Already-feasible input: a connected set of size <= s carries all the mass.
      const auto feasible_set = random_walk_subgraph(g, 1, rng());
      std::vector<NodeId> grown = feasible_set;
      std::vector<char> in(static_cast<std::size_t>(n), 0);
      in[grown[0]] = 1;
      for (std::size_t i = 0; i < grown.size() && static_cast<int>(grown.size()) < s; ++i) {
        for (NodeId nb : g.neighbors(grown[i])) {
          if (!in[nb] && static_cast<int>(grown.size()) < s) {
            in[nb] = 1;
            grown.push_back(nb);
          }
        }
      }
      std::vector<double> b(static_cast<std::size_t>(n), 0.0);
      for (NodeId v : grown) b[v] = 0.5 + std::abs(normal(rng));
      const auto tailf = tail_project(b, g, s);
      expect(tailf.residual_sq <= 1e-18);
      const auto headf = head_project(b, g, s, budget_head);
      double total = 0.0;
      for (double v : b) total += v * v;
      expect(std::abs(norm_on(b, headf.support) - std::sqrt(total)) <= 1e-9);
    }
  }
  return {failures == 0, std::to_string(checks - failures) + "/" + std::to_string(checks) +
                             " projection checks hold (100 graphs)"};
}

// ---- criterion 5: gradients ----

Verdict gradient_check() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> interior(0.05, 0.95);
  std::normal_distribution<double> signal(0.5, 1.5);
  double worst = 0.0;
  int points = 0;
  auto check = [&](const BlockObjective& f) {
    const auto n = static_cast<std::size_t>(f.partition().node_count());
    for (int i = 0; i < 100; ++i) {
      std::vector<double> x(n);
      for (auto& v : x) v = interior(rng);
      const auto analytic = f.full_gradient(x);
      const auto numeric =
          oracle::finite_difference([&](std::span<const double> y) { return f.value(y); }, x, 1e-5);
      worst = std::max(worst, oracle::relative_error(analytic, numeric));
      ++points;
    }
  };
  auto draw_signal = [&](std::size_t n) {
    std::vector<double> c(n);
    for (auto& v : c) v = signal(rng);
    return c;
  };

  const Graph base = oracle::grid_graph(3, 4);
  const Graph rep = replicate_graph(base, 4);
  const auto temporal_part = replicate_partition(rep, 12, 4);
  check(ScanObjective(rep, temporal_part,
                      ObjectiveSpec{ObjectiveKind::Temporal, 0.3, draw_signal(48)}));

  const Graph g = barabasi_albert(40, 2, 5);
  const auto non_part = partition_contiguous(g, 4);
  check(ScanObjective(g, non_part,
                      ObjectiveSpec{ObjectiveKind::NetworkOfNetworks, 0.7, draw_signal(40)}));

  const auto single = partition_contiguous(g, 1);
  check(ScanObjective(g, single, ObjectiveSpec{ObjectiveKind::EmsOnly, 0.0, draw_signal(40)}));

  return {worst <= 1e-5, "max relative error " + std::to_string(worst) + " over " +
                             std::to_string(points) + " points (need <= 1e-5)"};
}

// ---- criterion 7: scaling ----

Verdict scaling() {
  DetectConfig dc;
  dc.lambda = kTableLambda;
  dc.solver.budgets = {50};
  ScalingSpec spec;
  spec.m = 3;
  spec.subgraph_size = 50;
  spec.repeats = 3;
  spec.seed = 7;
  const std::vector<NodeId> sizes = {2500, 5000, 10000, 20000};
  const auto rows = scaling_bench(sizes, spec, dc);
  Verdict v{true, ""};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    v.detail += "n=" + std::to_string(rows[i].n) + ":" + fmt(rows[i].wall_seconds, 3) + "s ";
    if (i > 0) {
      const double ratio = rows[i].wall_seconds / rows[i - 1].wall_seconds;
      v.pass = v.pass && ratio <= 2.5;
      v.detail += "(x" + fmt(ratio, 2) + ") ";
    }
  }
  v.detail += "(need <= 2.5x per doubling)";
  return v;
}

// ---- criterion 8: serial vs parallel ----

Verdict parallel_agreement() {
  NonSpec spec;
  spec.seed = 8;
  DetectConfig dc;
  dc.lambda = kTableLambda;
  dc.solver.budgets = {50};
  const auto cmp = compare_parallel(spec, dc, 4, 3);
  const double gap = std::abs(cmp.serial.f1 - cmp.parallel.f1);
  Verdict v;
  v.pass = gap <= 0.02 && cmp.speedup >= 1.5;
  v.detail = "F serial=" + fmt(cmp.serial.f1) + " parallel=" + fmt(cmp.parallel.f1) +
             " gap=" + fmt(gap) + " speedup=" + fmt(cmp.speedup, 2) +
             "x (need gap <= 0.02, speedup >= 1.5x; hardware threads=" +
             std::to_string(std::thread::hardware_concurrency()) + ")";
  return v;
}

// ---- criterion 9: CLI determinism ----

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

// Drops wall_ms / wall_s columns (trace files: the last column) and
// speedup lines. Any row with a `wall_s` cell starts a new table.
std::string strip_timing(const std::string& name, const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  std::vector<bool> keep;
  const bool trace = name == "trace.tsv";
  while (std::getline(in, line)) {
    if (line.rfind("speedup=", 0) == 0 || line.rfind("wall_s", 0) == 0) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, '\t')) cells.push_back(cell);
    if (trace && !cells.empty()) cells.pop_back();
    if (std::find(cells.begin(), cells.end(), "wall_s") != cells.end()) {
      keep.assign(cells.size(), true);
      for (std::size_t i = 0; i < cells.size(); ++i) keep[i] = cells[i] != "wall_s";
    }
    const bool masked = keep.size() == cells.size();
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (masked && !keep[i]) continue;
      out << cells[i] << '\t';
    }
    out << '\n';
  }
  return out.str();
}

std::uint64_t hash_tree(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) {
    const auto rel = fs::relative(f, root).string();
    all += rel + "\n" + strip_timing(f.filename().string(), read_text(f));
  }
  return fnv1a(all);
}

Verdict cli_determinism() {
  const std::vector<std::vector<std::string>> commands = {
      {"synth", "--kind", "temporal", "--n", "200", "--T", "4", "--size", "20"},
      {"detect", "--budget", "20"},
      {"eval"},
      {"gridsearch", "--budgets", "15,20", "--lambdas", "0.01,0.1"},
      {"bench", "--sizes", "500,1000", "--repeats", "1", "--size", "20", "--tau", "2",
       "--parallel-n", "800", "--parallel-blocks", "4"},
  };
  auto run_all = [&](const fs::path& dir, int parallel, std::string& stdout_text) {
    fs::remove_all(dir);
    for (const auto& cmd : commands) {
      std::vector<std::string> args = {"gbgp",          "--seed", "11", "--out", dir.string(),
                                       "--parallel", std::to_string(parallel)};
      args.insert(args.end(), cmd.begin(), cmd.end());
      std::ostringstream out, err;
      const int code = run_cli(args, out, err);
      std::string text = out.str();
      for (auto pos = text.find(dir.string()); pos != std::string::npos; pos = text.find(dir.string())) {
        text.replace(pos, dir.string().size(), "<out>");
      }
      stdout_text += cmd[0] + ":" + std::to_string(code) + "\n" + strip_timing("stdout", text);
      if (code != kExitOk) stdout_text += err.str();
    }
    return hash_tree(dir) ^ (fnv1a(stdout_text) * 31);
  };
  const fs::path scratch = fs::temp_directory_path() / "gbgp_acceptance_determinism";
  Verdict v{true, ""};
  for (const int parallel : {0, 4}) {
    std::string out_a, out_b;
    const auto a = run_all(scratch / "a", parallel, out_a);
    const auto b = run_all(scratch / "b", parallel, out_b);
    const bool same = a == b;
    v.pass = v.pass && same;
    v.detail += "parallel=" + std::to_string(parallel) + (same ? " identical; " : " DIFFERS; ");
    if (out_a.find(":2\n") != std::string::npos || out_a.find(":3\n") != std::string::npos ||
        out_a.find(":4\n") != std::string::npos) {
      v.pass = false;
      v.detail += "a command failed: " + out_a + "; ";
    }
  }
  fs::remove_all(scratch);
  v.detail += "(5 commands, output files hashed with timing columns removed)";
  return v;
}

// ---- criterion 10: robustness ----

Verdict robustness_trend() {
  const Graph g = barabasi_albert(1000, 3, 10);
  const auto truth = random_walk_subgraph(g, 50, 11);
  DetectConfig dc;
  dc.lambda = 0.0;
  dc.solver.budgets = {50};
  const std::vector<double> levels = {0, 2, 4, 6, 8, 10};
  const auto rows = robustness_sweep(g, truth, levels, dc, 12);
  Verdict v{true, ""};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    v.detail += "P=" + fmt(rows[i].noise_percent, 0) + ":" + fmt(rows[i].metrics.f1) + " ";
    if (i > 0) v.pass = v.pass && rows[i].metrics.f1 <= rows[i - 1].metrics.f1 + 0.03;
  }
  v.pass = v.pass && rows.back().metrics.f1 <= rows.front().metrics.f1;
  v.detail += "(need non-increasing within 0.03 per step and F(10) <= F(0))";
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "synthetic noise table", noise_table},
      {2, "recall-dominant profile", recall_dominant},
      {3, "exact recovery on easy instances", exact_recovery},
      {4, "projection oracle suite", projection_suite},
      {5, "gradient correctness", gradient_check},
      {6, "convergence behavior", convergence_behavior},
      {7, "nearly-linear scaling", scaling},
      {8, "serial/parallel agreement", parallel_agreement},
      {9, "CLI determinism", cli_determinism},
      {10, "robustness trend", robustness_trend},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !v.pass;
    std::printf("[%s] %d %s: %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
