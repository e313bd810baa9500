#pragma once

#include "dpgd/core.hpp"

#include <cstdint>
#include <optional>
#include <random>

namespace dpgd {

/**
 * Seedable 64-bit generator (mt19937_64) with Box-Muller Gaussians.
 *
 * The Gaussian transform is spelled out here rather than delegated to
 * std::normal_distribution, whose output stream is implementation-defined,
 * so instances generated from a seed match across standard libraries.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double gaussian();

  Vec gaussian_vector(Eigen::Index n);

  /// Uniformly distributed direction on the unit sphere.
  Vec unit_vector(Eigen::Index n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace dpgd
