#include "rgan/core/rng.hpp"

#include <cmath>
#include <numbers>

#include "rgan/core/error.hpp"

namespace rgan::core {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) + (stream + 1) * kGamma);
}

std::uint64_t SeededRng::next_u64() {
  ++counter_;
  return splitmix64(seed_ + counter_ * kGamma);
}

double SeededRng::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double SeededRng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t SeededRng::below(std::size_t n) {
  if (n == 0) throw ContractError("SeededRng::below requires n > 0");
  const auto idx = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return idx < n ? idx : n - 1;
}

Matrix gaussian_noise(std::size_t n, std::size_t dim, SeededRng& rng) {
  Matrix out(n, dim);
  for (double& v : out.values()) v = rng.normal();
  return out;
}

}  // namespace rgan::core
