#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rgan/data/dataset.hpp"

namespace rgan::data {

/// Closed-form benchmark problems standing in for unavailable plant simulators.
///
///   friedman-like   d = 10, x ~ U[0,1]^10,
///                   y = 10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5  (x6..x10 inert)
///   sinusoid-2d     d = 2,  x ~ U[0,1]^2,
///                   y = sin(2 pi x1) + 0.5 x2
///   piecewise-plant d = 4,  x ~ U[0,1]^4,
///                   y = 2 x1 + x2         if x3 < 0.5
///                       3 - 2 x1 + 0.5 x4 otherwise
///
/// Labels are the closed form plus N(0, noise_sd^2) noise.
struct SyntheticProblem {
  std::string name;
  std::size_t dim;
  std::function<double(std::span<const double>)> truth;
};

const std::vector<std::string>& synthetic_names();
/// Throws CatalogError for an unknown name.
const SyntheticProblem& synthetic_problem(const std::string& name);

TabularDataset synth_make(const std::string& name, std::size_t n, double noise_sd,
                          std::uint64_t seed);

}  // namespace rgan::data
