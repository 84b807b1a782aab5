#pragma once

#include <cstddef>
#include <cstdint>

#include "rgan/core/matrix.hpp"

namespace rgan::core {

/// Counter-based generator: output k is splitmix64(seed + k * golden-gamma).
/// The stream depends only on (seed, counter), so it is identical on every platform.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Standard normal via Box-Muller; consumes exactly two uniforms.
  double normal();
  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Independent sub-seed for a named phase of a run.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// n x dim standard normal draws, row by row.
Matrix gaussian_noise(std::size_t n, std::size_t dim, SeededRng& rng);

}  // namespace rgan::core
