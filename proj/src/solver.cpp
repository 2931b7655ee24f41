#include "gbgp/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <string>

#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include "gbgp/error.hpp"
#include "gbgp/io.hpp"
#include "gbgp/rng.hpp"

namespace gbgp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

void check_finite(double value, const char* what) {
  if (!std::isfinite(value)) throw SolverError(std::string("non-finite ") + what);
}

std::vector<int> expand_budgets(const SolverConfig& config, const BlockPartition& p) {
  const int blocks = p.block_count();
  std::vector<int> budgets;
  if (config.budgets.size() == 1) {
    budgets.assign(static_cast<std::size_t>(blocks), config.budgets[0]);
  } else if (static_cast<int>(config.budgets.size()) == blocks) {
    budgets = config.budgets;
  } else {
    throw ValidationError("expected 1 or " + std::to_string(blocks) + " budgets, got " +
                          std::to_string(config.budgets.size()));
  }
  for (int k = 0; k < blocks; ++k) {
    const auto size = static_cast<int>(p.block_nodes(k).size());
    if (budgets[k] < 1) throw ValidationError("sparsity budget must be >= 1");
    if (budgets[k] > size) {
      throw ValidationError("budget " + std::to_string(budgets[k]) + " exceeds size " +
                            std::to_string(size) + " of block " + std::to_string(k));
    }
  }
  return budgets;
}

void validate_config(const SolverConfig& config) {
  if (!(config.outer_tol > 0.0) || !(config.inner_tol > 0.0)) {
    throw ValidationError("tolerances must be > 0");
  }
  if (config.max_outer_iters < 1 || config.max_inner_iters < 1) {
    throw ValidationError("iteration limits must be >= 1");
  }
  if (config.step_mode == StepMode::Fixed && !(config.fixed_step > 0.0)) {
    throw ValidationError("fixed step must be > 0");
  }
  if (config.parallel < 0) throw ValidationError("parallel worker count must be >= 0");
}

std::vector<std::vector<char>> omega_masks(const BlockPartition& p, const LocalSupports& omega) {
  if (static_cast<int>(omega.size()) != p.block_count()) {
    throw ValidationError("one support restriction per block required");
  }
  std::vector<std::vector<char>> masks(omega.size());
  for (int k = 0; k < p.block_count(); ++k) {
    masks[k].assign(p.block_nodes(k).size(), 0);
    for (NodeId v : omega[k]) {
      if (v < 0 || v >= static_cast<NodeId>(masks[k].size())) {
        throw ValidationError("support index out of block range");
      }
      masks[k][v] = 1;
    }
  }
  return masks;
}

// x restricted to omega and clipped to the box.
std::vector<double> restrict_to(const BlockPartition& p, const std::vector<std::vector<char>>& masks,
                                std::span<const double> x) {
  std::vector<double> out(x.size(), 0.0);
  for (int k = 0; k < p.block_count(); ++k) {
    const auto nodes = p.block_nodes(k);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (masks[k][i]) out[nodes[i]] = clip01(x[nodes[i]]);
    }
  }
  return out;
}

void write_block(std::span<double> x, std::span<const NodeId> nodes, std::span<const double> local) {
  for (std::size_t i = 0; i < nodes.size(); ++i) x[nodes[i]] = local[i];
}

// Backtracking (or fixed) proximal step for block k. On entry block k of
// `work` holds y; on return it holds the accepted x+ (also in `trial`).
// Returns F_k(x+).
struct StepOutcome {
  double alpha = 0.0;
  double value = 0.0;
};

StepOutcome proximal_step(const BlockObjective& objective, int k, std::span<double> work,
                          std::span<const double> y, std::span<const char> mask,
                          const SolverConfig& config, std::vector<double>& grad,
                          std::vector<double>& trial) {
  const auto nodes = objective.partition().block_nodes(k);
  grad.resize(nodes.size());
  trial.resize(nodes.size());
  const double f_y = objective.block_value(work, k);
  check_finite(f_y, "objective value");
  objective.block_gradient(work, k, grad);

  double alpha = config.step_mode == StepMode::Fixed ? config.fixed_step : 1.0;
  while (true) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      trial[i] = mask[i] ? clip01(y[i] - alpha * grad[i]) : 0.0;
    }
    write_block(work, nodes, trial);
    const double f_t = objective.block_value(work, k);
    check_finite(f_t, "objective value");
    if (config.step_mode == StepMode::Fixed) return {alpha, f_t};
    double linear = 0.0;
    double sq = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double d = trial[i] - y[i];
      linear += grad[i] * d;
      sq += d * d;
    }
    const double model = f_y + linear + sq / (2.0 * alpha);
    if (f_t <= model + 1e-12 * (1.0 + std::abs(f_y))) return {alpha, f_t};
    alpha *= 0.5;
    if (alpha < 1e-12) {
      throw SolverError("step size underflow in backtracking on block " + std::to_string(k));
    }
  }
}

double block_distance(std::span<const double> a, std::span<const double> b,
                      std::span<const NodeId> nodes) {
  double sq = 0.0;
  for (NodeId v : nodes) {
    const double d = a[v] - b[v];
    sq += d * d;
  }
  return std::sqrt(sq);
}

}  // namespace

double next_rho(double rho) { return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * rho * rho)); }

double next_theta(double theta) {
  const double t2 = theta * theta;
  return 0.5 * (std::sqrt(t2 * t2 + 4.0 * t2) - t2);
}

std::vector<double> proximal_block_update(std::span<const double> y, std::span<const double> grad,
                                          double alpha, std::span<const char> in_omega) {
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    out[i] = in_omega[i] ? clip01(y[i] - alpha * grad[i]) : 0.0;
  }
  return out;
}

double estimate_step_size(const BlockObjective& objective, int k, std::span<const double> x,
                          std::span<const char> in_omega, const SolverConfig& config) {
  if (config.step_mode == StepMode::Fixed) return config.fixed_step;
  std::vector<double> work(x.begin(), x.end());
  const auto nodes = objective.partition().block_nodes(k);
  std::vector<double> y(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) y[i] = x[nodes[i]];
  std::vector<double> grad;
  std::vector<double> trial;
  return proximal_step(objective, k, work, y, in_omega, config, grad, trial).alpha;
}

std::vector<double> bcd_solve(const BlockObjective& objective, const LocalSupports& omega,
                              std::span<const double> x_init, const SolverConfig& config) {
  validate_config(config);
  const BlockPartition& p = objective.partition();
  const auto masks = omega_masks(p, omega);
  std::vector<double> work = restrict_to(p, masks, x_init);
  // x^{k,t-1} for the extrapolation, per block in local order.
  std::vector<std::vector<double>> previous(static_cast<std::size_t>(p.block_count()));
  for (int k = 0; k < p.block_count(); ++k) {
    const auto nodes = p.block_nodes(k);
    previous[k].resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) previous[k][i] = work[nodes[i]];
  }

  std::vector<double> current;
  std::vector<double> y;
  std::vector<double> grad;
  std::vector<double> trial;
  double rho = 1.0;
  for (int sweep = 0; sweep < config.max_inner_iters; ++sweep) {
    double change = 0.0;
    for (int k = 0; k < p.block_count(); ++k) {
      if (omega[k].empty()) continue;
      const auto nodes = p.block_nodes(k);
      const auto& mask = masks[k];
      current.resize(nodes.size());
      for (std::size_t i = 0; i < nodes.size(); ++i) current[i] = work[nodes[i]];
      const double f_current = objective.block_value(work, k);
      check_finite(f_current, "objective value");

      const double omega_t = (rho - 1.0) / rho;
      rho = next_rho(rho);

      auto attempt = [&](double w) {
        y.resize(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) {
          y[i] = mask[i] ? clip01(current[i] + w * (current[i] - previous[k][i])) : 0.0;
        }
        write_block(work, nodes, y);
        return proximal_step(objective, k, work, y, mask, config, grad, trial).value;
      };
      double f_new = attempt(omega_t);
      if (omega_t > 0.0 && f_new > f_current) {
        // Monotone restart: drop the momentum for this step and from here on.
        rho = 1.0;
        f_new = attempt(0.0);
      }
      if (f_new > f_current) {
        // Rounding in the backtracking test; keep the block where it was.
        write_block(work, nodes, current);
        trial = current;
      }

      double sq = 0.0;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double d = trial[i] - current[i];
        sq += d * d;
      }
      change += std::sqrt(sq);
      previous[k] = current;
    }
    if (change <= config.inner_tol) break;
  }
  return work;
}

std::vector<double> parallel_bcd_solve(const BlockObjective& objective, const LocalSupports& omega,
                                       std::span<const double> x_init, const SolverConfig& config) {
  validate_config(config);
  if (config.parallel < 1) throw ValidationError("parallel solver needs tau >= 1");
  const BlockPartition& p = objective.partition();
  const int n = p.block_count();
  const int tau = std::min(config.parallel, n);
  const auto masks = omega_masks(p, omega);

  std::vector<double> x = restrict_to(p, masks, x_init);
  std::vector<double> z = x;
  std::vector<double> y(x.size());
  std::vector<double> x_next(x.size());
  std::vector<double> z_next(x.size());
  const double theta0 = static_cast<double>(tau) / n;
  double theta = theta0;
  double f_x = objective.value(x);
  check_finite(f_x, "objective value");

  // Per-block curvature estimate 1/alpha_k, found by backtracking at the
  // first round that samples the block and reused afterwards.
  std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
  Rng rng(derive_seed(config.seed, "parallel-sampling"));
  tbb::task_arena arena(tau);

  const int epoch = (n + tau - 1) / tau;
  const long max_rounds = static_cast<long>(config.max_inner_iters) * epoch;
  // Stop once the summed change over a window is within tolerance. A window
  // spans at least one epoch and lasts until every active block was sampled.
  int active = 0;
  for (int k = 0; k < n; ++k) active += !omega[k].empty();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  int seen_count = 0;
  double window_change = 0.0;
  int window_rounds = 0;
  auto reset_window = [&] {
    window_change = 0.0;
    window_rounds = 0;
    std::fill(seen.begin(), seen.end(), 0);
    seen_count = 0;
  };
  std::vector<int> sampled;
  for (long round = 0; round < max_rounds; ++round) {
    sampled.clear();
    for (int k = 0; k < n; ++k) {
      const bool take = tau >= n || rng.uniform01() < theta0;
      if (take && !omega[k].empty()) sampled.push_back(k);
    }

    for (std::size_t v = 0; v < x.size(); ++v) y[v] = (1.0 - theta) * x[v] + theta * z[v];
    x_next = y;
    z_next = z;
    const double scale = static_cast<double>(n) / tau * theta;

    arena.execute([&] {
      tbb::parallel_for(std::size_t{0}, sampled.size(), [&](std::size_t idx) {
        const int k = sampled[idx];
        const auto nodes = p.block_nodes(k);
        if (alpha[k] == 0.0) alpha[k] = estimate_step_size(objective, k, y, masks[k], config);
        std::vector<double> grad(nodes.size());
        objective.block_gradient(y, k, grad);
        const double step = tau * alpha[k] / (n * theta);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
          const NodeId v = nodes[i];
          const double zn = masks[k][i] ? clip01(z[v] - step * grad[i]) : 0.0;
          z_next[v] = zn;
          x_next[v] = masks[k][i] ? clip01(y[v] + scale * (zn - z[v])) : 0.0;
        }
      });
    });

    const double f_next = objective.value(x_next);
    check_finite(f_next, "objective value");
    if (f_next > f_x) {
      // Adaptive restart: reject the round, re-anchor z at x, reset theta.
      z = x;
      theta = theta0;
      reset_window();
      continue;
    }
    double change = 0.0;
    for (int k = 0; k < n; ++k) change += block_distance(x_next, x, p.block_nodes(k));
    std::swap(x, x_next);
    std::swap(z, z_next);
    f_x = f_next;
    theta = next_theta(theta);

    for (int k : sampled) {
      if (!seen[k]) {
        seen[k] = 1;
        ++seen_count;
      }
    }
    window_change += change;
    if (++window_rounds >= epoch && seen_count == active) {
      if (window_change <= config.inner_tol) break;
      reset_window();
    }
  }
  return x;
}

DetectionResult gbgp_solve(const BlockObjective& objective, const SolverConfig& config,
                           std::span<const double> x_init) {
  validate_config(config);
  const auto start = Clock::now();
  const BlockPartition& p = objective.partition();
  const int blocks = p.block_count();
  const auto budgets = expand_budgets(config, p);
  if (static_cast<NodeId>(x_init.size()) != p.node_count()) {
    throw ValidationError("initial vector length does not match node count");
  }

  std::vector<double> x(x_init.size());
  for (std::size_t v = 0; v < x.size(); ++v) x[v] = clip01(x_init[v]);

  const int workers = std::max(1, config.parallel);
  tbb::task_arena arena(workers);
  auto for_each_block = [&](auto&& body) {
    if (workers == 1) {
      for (int k = 0; k < blocks; ++k) body(k);
    } else {
      arena.execute([&] { tbb::parallel_for(0, blocks, [&](int k) { body(k); }); });
    }
  };

  DetectionResult result;
  LocalSupports omega(static_cast<std::size_t>(blocks));
  LocalSupports tail_sets(static_cast<std::size_t>(blocks));
  for (int iter = 1; iter <= config.max_outer_iters; ++iter) {
    // Head step on the gradient at x^i.
    auto phase = Clock::now();
    const auto grad = objective.full_gradient(x);
    for_each_block([&](int k) {
      const auto nodes = p.block_nodes(k);
      std::vector<double> w(nodes.size());
      std::vector<NodeId> support;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double g = grad[nodes[i]];
        const double xv = x[nodes[i]];
        if (xv != 0.0) support.push_back(static_cast<NodeId>(i));
        if (config.head_input == HeadInput::RawGradient) {
          w[i] = g;
        } else {
          const bool usable = (g < 0.0 && xv < 1.0) || (g > 0.0 && xv > 0.0);
          w[i] = usable ? std::abs(g) : 0.0;
        }
      }
      const auto head = head_project(w, p.block_graph(k), budgets[k], config.projection);
      std::vector<NodeId> merged;
      std::set_union(head.support.begin(), head.support.end(), support.begin(), support.end(),
                     std::back_inserter(merged));
      omega[k] = std::move(merged);
    });
    if (config.check_invariants) {
      for (int k = 0; k < blocks; ++k) {
        const auto nodes = p.block_nodes(k);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
          if (x[nodes[i]] != 0.0 &&
              !std::binary_search(omega[k].begin(), omega[k].end(), static_cast<NodeId>(i))) {
            throw SolverError("Omega does not contain supp(x) in block " + std::to_string(k));
          }
        }
      }
    }
    result.head_seconds += seconds_since(phase);

    phase = Clock::now();
    const auto b = config.parallel >= 1 ? parallel_bcd_solve(objective, omega, x, config)
                                        : bcd_solve(objective, omega, x, config);
    result.inner_seconds += seconds_since(phase);

    phase = Clock::now();
    std::vector<double> x_next(x.size(), 0.0);
    for_each_block([&](int k) {
      const auto nodes = p.block_nodes(k);
      std::vector<double> local(nodes.size());
      for (std::size_t i = 0; i < nodes.size(); ++i) local[i] = b[nodes[i]];
      auto tail = tail_project(local, p.block_graph(k), budgets[k], config.projection);
      for (NodeId i : tail.support) x_next[nodes[i]] = local[i];
      tail_sets[k] = std::move(tail.support);
    });
    if (config.check_invariants) {
      for (int k = 0; k < blocks; ++k) {
        const auto comps = connected_components(p.block_graph(k), tail_sets[k]);
        if (static_cast<int>(comps.size()) > config.projection.components) {
          throw SolverError("tail support of block " + std::to_string(k) + " has " +
                            std::to_string(comps.size()) + " components");
        }
      }
    }
    result.tail_seconds += seconds_since(phase);

    double delta = 0.0;
    for (int k = 0; k < blocks; ++k) delta += block_distance(x_next, x, p.block_nodes(k));
    x = std::move(x_next);
    const double value = objective.value(x);
    check_finite(value, "objective value");
    result.history.push_back({iter, delta, value, seconds_since(start) * 1e3});
    if (config.record_iterates) result.iterates.push_back(x);
    result.outer_iters = iter;
    if (delta <= config.outer_tol) {
      result.converged = true;
      break;
    }
  }

  result.supports.resize(static_cast<std::size_t>(blocks));
  for (int k = 0; k < blocks; ++k) {
    const auto nodes = p.block_nodes(k);
    result.supports[k].block_id = k;
    for (NodeId i : tail_sets[k]) result.supports[k].nodes.push_back(nodes[i]);
  }
  result.x_final = std::move(x);
  result.total_seconds = seconds_since(start);
  return result;
}

DetectionResult gbgp_solve(const ScanObjective& objective, const SolverConfig& config) {
  const auto x0 = initial_point(objective.partition(), objective.spec().signal);
  return gbgp_solve(objective, config, x0);
}

void write_trace(const std::filesystem::path& path, const std::vector<OuterRecord>& history) {
  std::ostringstream out;
  for (const auto& r : history) {
    out << r.iteration << '\t' << format_double(r.delta) << '\t' << format_double(r.objective)
        << '\t' << format_double(r.wall_ms) << '\n';
  }
  write_text(path, out.str());
}

}  // namespace gbgp
