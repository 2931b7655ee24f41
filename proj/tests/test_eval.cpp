#include <doctest.h>

#include <random>

#include "gbgp/eval.hpp"
#include "oracles.hpp"

using namespace gbgp;

TEST_CASE("precision recall and F by hand") {
  const std::vector<NodeId> same = {1, 2, 3};
  auto m = precision_recall_f1(same, same);
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.f1 == 1.0);

  m = precision_recall_f1(std::vector<NodeId>{1, 2, 3}, std::vector<NodeId>{2, 3, 4});
  CHECK(m.precision == doctest::Approx(2.0 / 3));
  CHECK(m.recall == doctest::Approx(2.0 / 3));
  CHECK(m.f1 == doctest::Approx(2.0 / 3));

  m = precision_recall_f1(std::vector<NodeId>{}, std::vector<NodeId>{1});
  CHECK(m.precision == 0.0);
  CHECK(m.recall == 0.0);
  CHECK(m.f1 == 0.0);

  m = precision_recall_f1(std::vector<NodeId>{}, std::vector<NodeId>{});
  CHECK(m.recall == 1.0);
}

TEST_CASE("labeled metrics pool timestamp-node pairs") {
  const LabeledNodes truth = {{0, 1}, {1, 1}};
  const LabeledNodes detected = {{0, 1}, {1, 2}};
  const auto m = precision_recall_f1(detected, truth);
  CHECK(m.precision == 0.5);
  CHECK(m.recall == 0.5);
}

TEST_CASE("F is the harmonic mean on random set pairs") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    std::vector<NodeId> d, t;
    for (NodeId v = 0; v < 30; ++v) {
      if (rng() % 3 == 0) d.push_back(v);
      if (rng() % 4 == 0) t.push_back(v);
    }
    const auto m = precision_recall_f1(d, t);
    CHECK(m.precision >= 0.0);
    CHECK(m.precision <= 1.0);
    CHECK(m.recall >= 0.0);
    CHECK(m.recall <= 1.0);
    const double expected =
        m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    CHECK(m.f1 == expected);
  }
}

TEST_CASE("summary mean and sample deviation") {
  std::vector<ExperimentRow> rows(3);
  const double f[] = {0.5, 0.7, 0.9};
  for (int i = 0; i < 3; ++i) rows[i].metrics.f1 = f[i];
  const auto s = summarize(rows);
  CHECK(std::abs(s.mean.f1 - (0.5 + 0.7 + 0.9) / 3) <= 1e-12);
  CHECK(s.stddev.f1 == doctest::Approx(0.2));
  const auto one = summarize({rows[0]});
  CHECK(one.mean.f1 == 0.5);
  CHECK(one.stddev.f1 == 0.0);
}

TEST_CASE("experiment runs one detection per seed in order") {
  ExperimentConfig ec;
  ec.mu = 5.0;
  ec.detect.lambda = 0.01;
  ec.detect.solver.budgets = {15};
  const std::vector<std::uint64_t> seeds = {3, 1};
  const auto summary = run_experiment(
      [](std::uint64_t seed, Problem& p) {
        SyntheticSpec s;
        s.n = 150;
        s.timestamps = 2;
        s.subgraph_size = 15;
        s.seed = seed;
        const auto inst = make_temporal_instance(s);
        build_temporal_problem(p, inst.graph, inst.signals, inst.truth);
      },
      ec, seeds);
  REQUIRE(summary.runs.size() == 2);
  CHECK(summary.runs[0].seed == 3);
  CHECK(summary.runs[1].seed == 1);
  const double mean = (summary.runs[0].metrics.f1 + summary.runs[1].metrics.f1) / 2;
  CHECK(std::abs(summary.mean.f1 - mean) <= 1e-12);

  const std::vector<std::uint64_t> single = {3};
  const auto one = run_experiment(
      [](std::uint64_t seed, Problem& p) {
        SyntheticSpec s;
        s.n = 150;
        s.timestamps = 2;
        s.subgraph_size = 15;
        s.seed = seed;
        const auto inst = make_temporal_instance(s);
        build_temporal_problem(p, inst.graph, inst.signals, inst.truth);
      },
      ec, single);
  CHECK(one.mean.f1 == summary.runs[0].metrics.f1);
}

TEST_CASE("robustness sweep emits one row per noise level") {
  const Graph g = barabasi_albert(200, 3, 2);
  const auto truth = random_walk_subgraph(g, 20, 3);
  DetectConfig dc;
  dc.solver.budgets = {20};
  const std::vector<double> levels = {0, 2, 4};
  const auto rows = robustness_sweep(g, truth, levels, dc, 5);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].noise_percent == 2.0);

  // P = 0 equals a clean run.
  std::vector<double> clean(200, 0.0);
  for (NodeId v : truth) clean[v] = 1.0;
  Problem p;
  build_single_problem(p, g, clean, truth);
  const auto m = score(p, detect(p, dc).supports);
  CHECK(rows[0].metrics.f1 == m.f1);
}

TEST_CASE("scaling bench with one size gives one row") {
  DetectConfig dc;
  dc.solver.budgets = {20};
  ScalingSpec spec;
  spec.subgraph_size = 20;
  spec.repeats = 1;
  const std::vector<NodeId> sizes = {500};
  const auto rows = scaling_bench(sizes, spec, dc);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].edges == 3u * 497u);
  CHECK(rows[0].wall_seconds > 0.0);
}

TEST_CASE("supports convert to labeled nodes and back") {
  SyntheticSpec s;
  s.n = 100;
  s.timestamps = 3;
  s.subgraph_size = 10;
  const auto inst = make_temporal_instance(s);
  Problem p;
  build_temporal_problem(p, inst.graph, inst.signals, inst.truth);
  const auto labeled = truth_to_labeled(p);
  CHECK(labeled.size() == 30);
  for (const auto& [t, v] : labeled) CHECK(v < 100);
  const auto back = labeled_to_supports(p, labeled);
  for (int t = 0; t < 3; ++t) CHECK(back[t].nodes == p.truth[t]);
}

TEST_CASE("results table header") {
  ExperimentRow r;
  r.dataset = "synthetic";
  r.mu = 5;
  r.metrics = {1.0, 0.5, 2.0 / 3.0, 0.25};
  r.seed = 9;
  const auto table = results_table({r});
  CHECK(table.rfind("dataset\tmu\tP_noise\tprecision\trecall\tf1\twall_s\tseed\n", 0) == 0);
  CHECK(table.find("synthetic\t5\t0\t1\t0.5\t") != std::string::npos);
}
