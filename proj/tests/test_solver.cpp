#include <doctest.h>

#include <cmath>
#include <random>

#include "gbgp/datagen.hpp"
#include "gbgp/error.hpp"
#include "gbgp/eval.hpp"
#include "gbgp/solver.hpp"
#include "oracles.hpp"

using namespace gbgp;

namespace {

// F(x) = 0.5 * scale * |x - target|^2, separable over nodes.
class Quadratic final : public BlockObjective {
 public:
  Quadratic(const BlockPartition& p, double target, double scale = 1.0)
      : p_(p), target_(target), scale_(scale) {}
  const BlockPartition& partition() const override { return p_; }
  double value(std::span<const double> x) const override {
    double total = 0.0;
    for (int k = 0; k < p_.block_count(); ++k) total += block_value(x, k);
    return total;
  }
  double block_value(std::span<const double> x, int k) const override {
    double total = 0.0;
    for (NodeId v : p_.block_nodes(k)) total += 0.5 * scale_ * (x[v] - target_) * (x[v] - target_);
    return total;
  }
  void block_gradient(std::span<const double> x, int k, std::span<double> out) const override {
    const auto nodes = p_.block_nodes(k);
    for (std::size_t i = 0; i < nodes.size(); ++i) out[i] = scale_ * (x[nodes[i]] - target_);
  }

 private:
  const BlockPartition& p_;
  double target_;
  double scale_;
};

// Reports a gradient that points the wrong way, so no step satisfies the
// sufficient-decrease test.
class Misleading final : public BlockObjective {
 public:
  explicit Misleading(const BlockPartition& p) : p_(p) {}
  const BlockPartition& partition() const override { return p_; }
  double value(std::span<const double> x) const override { return block_value(x, 0); }
  double block_value(std::span<const double> x, int) const override {
    double total = 0.0;
    for (double v : x) total += 10.0 * v;
    return total;
  }
  void block_gradient(std::span<const double>, int, std::span<double> out) const override {
    for (auto& g : out) g = -1.0;
  }

 private:
  const BlockPartition& p_;
};

LocalSupports everything(const BlockPartition& p) {
  LocalSupports omega(static_cast<std::size_t>(p.block_count()));
  for (int k = 0; k < p.block_count(); ++k) {
    for (NodeId i = 0; i < static_cast<NodeId>(p.block_nodes(k).size()); ++i) omega[k].push_back(i);
  }
  return omega;
}

}  // namespace

TEST_CASE("momentum and theta recurrences") {
  CHECK(next_rho(1.0) == doctest::Approx(1.6180339887).epsilon(1e-10));
  CHECK((1.0 - 1.0) / 1.0 == 0.0);  // omega_0 with rho_0 = 1
  CHECK(next_theta(0.5) == doctest::Approx(0.3904).epsilon(1e-3));
  double theta = 0.5;
  for (int i = 0; i < 20; ++i) {
    const double next = next_theta(theta);
    CHECK(next > 0.0);
    CHECK(next < theta);
    theta = next;
  }
}

TEST_CASE("proximal block update closed form") {
  const std::vector<char> in = {1};
  CHECK(proximal_block_update(std::vector<double>{0.5}, std::vector<double>{1.0}, 0.25, in) ==
        std::vector<double>{0.25});
  CHECK(proximal_block_update(std::vector<double>{0.7}, std::vector<double>{-1.0}, 1.0, in) ==
        std::vector<double>{1.0});
  const std::vector<char> mask = {1, 0, 1};
  CHECK(proximal_block_update(std::vector<double>{0.3, 0.6, 1.4}, std::vector<double>{0, 0, 0}, 1.0,
                              mask) == std::vector<double>{0.3, 0.0, 1.0});
}

TEST_CASE("step size estimation") {
  const Graph g = oracle::path_graph(4);
  const BlockPartition p(g, std::vector<int>(4, 0), 1);
  const std::vector<char> all(4, 1);
  const std::vector<double> x = {0.2, 0.4, 0.6, 0.8};
  SolverConfig config;

  const Quadratic unit(p, 0.0);
  CHECK(estimate_step_size(unit, 0, x, all, config) == 1.0);

  const Quadratic steep(p, 0.0, 40.0);
  const double alpha = estimate_step_size(steep, 0, x, all, config);
  CHECK(alpha < 1.0);
  // Re-check the sufficient-decrease inequality at the accepted step.
  std::vector<double> grad(4);
  steep.block_gradient(x, 0, grad);
  const auto next = proximal_block_update(x, grad, alpha, all);
  double linear = 0.0, sq = 0.0;
  for (int i = 0; i < 4; ++i) {
    linear += grad[i] * (next[i] - x[i]);
    sq += (next[i] - x[i]) * (next[i] - x[i]);
  }
  CHECK(steep.value(next) <= steep.value(x) + linear + sq / (2 * alpha) + 1e-12);

  config.step_mode = StepMode::Fixed;
  config.fixed_step = 0.125;
  CHECK(estimate_step_size(steep, 0, x, all, config) == 0.125);

  config.step_mode = StepMode::Backtracking;
  const Misleading bad(p);
  CHECK_THROWS_AS(estimate_step_size(bad, 0, x, all, config), SolverError);
}

TEST_CASE("block coordinate descent reaches the separable minimizer") {
  const Graph g = oracle::grid_graph(4, 5);
  const auto p = partition_contiguous(g, 3);
  const Quadratic f(p, 0.3);
  SolverConfig config;
  config.max_inner_iters = 200;
  const std::vector<double> x0(20, 0.9);
  const auto b = bcd_solve(f, everything(p), x0, config);
  for (double v : b) CHECK(std::abs(v - 0.3) <= 1e-6);
}

TEST_CASE("block coordinate descent keeps the support restriction") {
  const Graph g = oracle::path_graph(6);
  const BlockPartition p(g, {0, 0, 0, 1, 1, 1}, 2);
  const Quadratic f(p, 0.6);
  const LocalSupports omega = {{1}, {}};
  const auto b = bcd_solve(f, omega, std::vector<double>(6, 0.5), SolverConfig{});
  CHECK(b == std::vector<double>{0, 0.6, 0, 0, 0, 0});
}

TEST_CASE("inner objective is non-increasing under backtracking") {
  std::mt19937_64 rng(3);
  const Graph g = oracle::grid_graph(4, 6);
  const auto p = partition_contiguous(g, 4);
  std::normal_distribution<double> normal(0.0, 2.0);
  ObjectiveSpec spec{ObjectiveKind::NetworkOfNetworks, 0.5, {}};
  for (int i = 0; i < 24; ++i) spec.signal.push_back(normal(rng));
  const ScanObjective f(g, p, spec);
  const auto x0 = initial_point(p, spec.signal);
  double last = f.value(x0);
  for (int t = 1; t <= 30; ++t) {
    SolverConfig config;
    config.max_inner_iters = t;
    config.inner_tol = 1e-300;
    const double value = f.value(bcd_solve(f, everything(p), x0, config));
    CHECK(value <= last + 1e-12);
    last = value;
  }
}

TEST_CASE("step-size underflow aborts the inner solver") {
  const Graph g = oracle::path_graph(3);
  const BlockPartition p(g, std::vector<int>(3, 0), 1);
  const Misleading bad(p);
  CHECK_THROWS_AS(bcd_solve(bad, everything(p), std::vector<double>(3, 0.5), SolverConfig{}),
                  SolverError);
}

TEST_CASE("parallel solver with every block sampled converges deterministically") {
  const Graph g = oracle::grid_graph(4, 4);
  const auto p = partition_contiguous(g, 4);
  const Quadratic f(p, 0.3);
  SolverConfig config;
  config.parallel = 4;
  config.max_inner_iters = 500;
  config.inner_tol = 1e-9;
  const auto a = parallel_bcd_solve(f, everything(p), std::vector<double>(16, 0.9), config);
  const auto b = parallel_bcd_solve(f, everything(p), std::vector<double>(16, 0.9), config);
  CHECK(a == b);
  for (double v : a) CHECK(std::abs(v - 0.3) <= 1e-6);
}

TEST_CASE("parallel solver is reproducible for a fixed seed") {
  const Graph g = oracle::grid_graph(4, 6);
  const auto p = partition_contiguous(g, 6);
  const Quadratic f(p, 0.7);
  for (int tau : {1, 2}) {
    SolverConfig config;
    config.parallel = tau;
    config.seed = 99;
    config.max_inner_iters = 500;
    const auto a = parallel_bcd_solve(f, everything(p), std::vector<double>(24, 0.0), config);
    const auto b = parallel_bcd_solve(f, everything(p), std::vector<double>(24, 0.0), config);
    CHECK(a == b);
    for (double v : a) CHECK(std::abs(v - 0.7) <= 1e-4);
  }
}

TEST_CASE("planted block on a path is recovered exactly") {
  const Graph path = oracle::path_graph(8);
  const Graph& g = path;
  const BlockPartition p(g, std::vector<int>(8, 0), 1);
  ObjectiveSpec spec{ObjectiveKind::EmsOnly, 0.0, {0, 0, 1, 1, 1, 0, 0, 0}};
  const ScanObjective f(g, p, spec);
  SolverConfig config;
  config.budgets = {3};
  const auto result = gbgp_solve(f, config);
  REQUIRE(result.supports.size() == 1);
  CHECK(result.supports[0].nodes == std::vector<NodeId>{2, 3, 4});
  CHECK(result.supports[0].nodes == oracle::best_ems_subset(g, spec.signal, 3));
  CHECK(result.converged);
}

TEST_CASE("zero signal converges quickly to a near-zero singleton") {
  const Graph g = oracle::grid_graph(3, 3);
  const BlockPartition p(g, std::vector<int>(9, 0), 1);
  ObjectiveSpec spec{ObjectiveKind::EmsOnly, 0.0, std::vector<double>(9, 0.0)};
  const ScanObjective f(g, p, spec);
  SolverConfig config;
  config.budgets = {3};
  const auto result = gbgp_solve(f, config);
  CHECK(result.converged);
  CHECK(result.outer_iters <= 2);
  CHECK(result.supports[0].nodes.size() == 1);
  for (double v : result.x_final) CHECK(std::abs(v) <= 1e-6);
}

TEST_CASE("solver supports stay connected and within budget on a temporal instance") {
  SyntheticSpec spec;
  spec.n = 200;
  spec.timestamps = 4;
  spec.subgraph_size = 20;
  spec.mu = 4.0;
  spec.seed = 5;
  const auto inst = make_temporal_instance(spec);
  Problem problem;
  build_temporal_problem(problem, inst.graph, inst.signals, inst.truth);
  DetectConfig dc;
  dc.lambda = 0.01;
  dc.solver.budgets = {20};
  dc.solver.max_outer_iters = 10;
  const auto result = detect(problem, dc);
  CHECK(result.history.size() <= 10);
  CHECK(static_cast<int>(result.history.size()) == result.outer_iters);
  for (const auto& s : result.supports) {
    CHECK(s.nodes.size() <= 20);
    CHECK(connected_components(problem.graph, s.nodes).size() == 1);
    for (NodeId v : s.nodes) CHECK(problem.partition.block_of(v) == s.block_id);
  }
  // supp(x) lies inside the reported supports.
  for (NodeId v = 0; v < problem.graph.node_count(); ++v) {
    if (result.x_final[v] == 0.0) continue;
    const auto& nodes = result.supports[problem.partition.block_of(v)].nodes;
    CHECK(std::binary_search(nodes.begin(), nodes.end(), v));
  }
  const auto again = detect(problem, dc);
  CHECK(again.supports == result.supports);
  CHECK(again.x_final == result.x_final);
}

TEST_CASE("lambda zero on temporal data equals independent per-timestamp runs") {
  SyntheticSpec spec;
  spec.n = 120;
  spec.timestamps = 3;
  spec.subgraph_size = 12;
  spec.seed = 8;
  const auto inst = make_temporal_instance(spec);
  Problem joint;
  build_temporal_problem(joint, inst.graph, inst.signals, inst.truth);
  DetectConfig dc;
  dc.lambda = 0.0;
  dc.solver.budgets = {12};
  const auto together = detect(joint, dc);
  for (int t = 0; t < 3; ++t) {
    Problem alone;
    build_single_problem(alone, inst.graph, inst.signals[t], inst.truth[t]);
    const auto single = detect(alone, dc);
    std::vector<NodeId> shifted;
    for (NodeId v : single.supports[0].nodes) shifted.push_back(v + t * spec.n);
    CHECK(together.supports[t].nodes == shifted);
  }
}

TEST_CASE("solver validates budgets and config") {
  const Graph g = oracle::path_graph(4);
  const BlockPartition p(g, std::vector<int>(4, 0), 1);
  ObjectiveSpec spec{ObjectiveKind::EmsOnly, 0.0, {1, 0, 0, 0}};
  const ScanObjective f(g, p, spec);
  SolverConfig config;
  config.budgets = {5};
  CHECK_THROWS_AS(gbgp_solve(f, config), ValidationError);
  config.budgets = {0};
  CHECK_THROWS_AS(gbgp_solve(f, config), ValidationError);
  config.budgets = {1, 2};
  CHECK_THROWS_AS(gbgp_solve(f, config), ValidationError);
  config.budgets = {2};
  config.outer_tol = 0.0;
  CHECK_THROWS_AS(gbgp_solve(f, config), ValidationError);
}

TEST_CASE("trace file has one line per outer iteration") {
  const std::vector<OuterRecord> history = {{1, 0.5, -2.0, 1.5}, {2, 0.0, -2.5, 3.0}};
  const auto path = std::filesystem::temp_directory_path() / "gbgp_trace_test.tsv";
  write_trace(path, history);
  CHECK(read_text(path) == "1\t0.5\t-2\t1.5\n2\t0\t-2.5\t3\n");
}
