#pragma once

#include <span>
#include <vector>

#include "gbgp/graph.hpp"

namespace gbgp {

enum class ObjectiveKind { Temporal, NetworkOfNetworks, EmsOnly };

// Squared: -(c'x)^2 / (1'x) + 0.5|x|^2.   Sqrt: -(c'x) / sqrt(1'x) + 0.5|x|^2.
enum class EmsForm { Squared, Sqrt };

inline constexpr double kDefaultDenominatorEpsilon = 1e-6;

// Relaxed negative elevated-mean-scan value of one block. The denominator
// 1'x is clamped to at least `epsilon`.
double ems_block_value(std::span<const double> c, std::span<const double> x,
                       EmsForm form = EmsForm::Squared,
                       double epsilon = kDefaultDenominatorEpsilon);

// Analytic gradient of ems_block_value, written into `out`. While the clamp
// is engaged the denominator is constant.
void ems_block_gradient(std::span<const double> c, std::span<const double> x,
                        std::span<double> out, EmsForm form = EmsForm::Squared,
                        double epsilon = kDefaultDenominatorEpsilon);

// Block-structured objective F(x) = sum_k f_k(x^k) + coupling(x) on a global
// node-indexed vector x. Gradients are returned per block in local order.
class BlockObjective {
 public:
  virtual ~BlockObjective() = default;

  virtual const BlockPartition& partition() const = 0;
  virtual double value(std::span<const double> x) const = 0;
  // Every term of value() that depends on x^k. For x, x' differing only in
  // block k: value(x') - value(x) == block_value(x', k) - block_value(x, k).
  virtual double block_value(std::span<const double> x, int k) const = 0;
  virtual void block_gradient(std::span<const double> x, int k, std::span<double> out) const = 0;

  // Concatenation of block gradients scattered back to global node order.
  std::vector<double> full_gradient(std::span<const double> x) const;
};

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::EmsOnly;
  double lambda = 0.0;
  std::vector<double> signal;  // global, length N
  EmsForm form = EmsForm::Squared;
  double epsilon_denominator = kDefaultDenominatorEpsilon;
};

// Relaxed EMS per block plus temporal-consistency or cut-edge coupling.
//
// Temporal: blocks are timestamps over the same node set; local index i of
// block k corresponds to local index i of every other block, and the coupling
// is lambda * sum_{k>=1} |x^k - x^{k-1}|^2.
// Network of networks: lambda * sum over cut edges (i,j) of (x_i - x_j)^2.
class ScanObjective final : public BlockObjective {
 public:
  ScanObjective(const Graph& graph, const BlockPartition& partition, ObjectiveSpec spec);

  const BlockPartition& partition() const override { return partition_; }
  const ObjectiveSpec& spec() const { return spec_; }
  double value(std::span<const double> x) const override;
  double block_value(std::span<const double> x, int k) const override;
  void block_gradient(std::span<const double> x, int k, std::span<double> out) const override;

  // Sum of per-block EMS terms only.
  double ems_value(std::span<const double> x) const;
  double coupling_value(std::span<const double> x) const;

 private:
  double block_ems(std::span<const double> x, int k) const;

  const Graph& graph_;
  const BlockPartition& partition_;
  ObjectiveSpec spec_;
  // Cut-edge adjacency (network of networks).
  std::vector<std::int64_t> cut_offsets_;
  std::vector<NodeId> cut_neighbors_;
};

// Convenience entry points that check the objective kind.
double temporal_value(const ScanObjective& objective, std::span<const double> x);
void temporal_block_gradient(const ScanObjective& objective, std::span<const double> x, int k,
                             std::span<double> out);
double non_value(const ScanObjective& objective, std::span<const double> x);
void non_block_gradient(const ScanObjective& objective, std::span<const double> x, int k,
                        std::span<double> out);

// Per block, the node with the largest |c| (lowest id on ties) set to 1.
std::vector<double> initial_point(const BlockPartition& partition, std::span<const double> signal);

// Min-max rescaling of the signal to [0, 1] inside each block; constant
// blocks map to 0.
std::vector<double> normalize_per_block(const BlockPartition& partition,
                                        std::span<const double> signal);

}  // namespace gbgp
