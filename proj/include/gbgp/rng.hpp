#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gbgp {

// Seeded generator with a fixed, portable output stream: the engine is
// std::mt19937_64 (fully specified by the standard) and the conversions to
// uniform reals, integers and normals are done here rather than through the
// implementation-defined std distributions.
class Rng {
 public:
  static constexpr std::string_view kName = "mt19937_64/v1";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform integer in [0, n), unbiased (rejection sampling). n > 0.
  std::uint64_t below(std::uint64_t n);
  // Standard normal via Box-Muller; the second variate is cached.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Independent child seed for a named component (e.g. "graph", "truth").
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

}  // namespace gbgp
