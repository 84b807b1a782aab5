#include "rgan/data/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "rgan/core/error.hpp"
#include "rgan/core/rng.hpp"

namespace rgan::data {

namespace {

constexpr double pi = std::numbers::pi;

const std::vector<SyntheticProblem>& catalog() {
  static const std::vector<SyntheticProblem> problems = {
      {"friedman-like", 10,
       [](std::span<const double> x) {
         return 10.0 * std::sin(pi * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) +
                10.0 * x[3] + 5.0 * x[4];
       }},
      {"sinusoid-2d", 2,
       [](std::span<const double> x) { return std::sin(2.0 * pi * x[0]) + 0.5 * x[1]; }},
      {"piecewise-plant", 4,
       [](std::span<const double> x) {
         return x[2] < 0.5 ? 2.0 * x[0] + x[1] : 3.0 - 2.0 * x[0] + 0.5 * x[3];
       }},
  };
  return problems;
}

}  // namespace

const std::vector<std::string>& synthetic_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& p : catalog()) n.push_back(p.name);
    return n;
  }();
  return names;
}

const SyntheticProblem& synthetic_problem(const std::string& name) {
  for (const auto& p : catalog())
    if (p.name == name) return p;
  std::string known;
  for (const auto& n : synthetic_names()) known += (known.empty() ? "" : ", ") + n;
  throw CatalogError("unknown synthetic dataset '" + name + "' (known: " + known + ")");
}

TabularDataset synth_make(const std::string& name, std::size_t n, double noise_sd,
                          std::uint64_t seed) {
  const auto& problem = synthetic_problem(name);
  if (noise_sd < 0.0) throw ConfigError("noise sd must be non-negative");
  core::SeededRng rng(seed);
  TabularDataset ds;
  ds.features = Matrix(n, problem.dim);
  ds.labels.resize(n);
  for (std::size_t c = 0; c < problem.dim; ++c) ds.feature_names.push_back("x" + std::to_string(c + 1));
  ds.label_name = "y";
  for (std::size_t r = 0; r < n; ++r) {
    auto row = ds.features.row(r);
    for (double& v : row) v = rng.uniform();
    ds.labels[r] = problem.truth(row);
    // Always draw so the feature stream does not depend on the noise level.
    const double e = rng.normal();
    if (noise_sd > 0.0) ds.labels[r] += noise_sd * e;
  }
  return ds;
}

}  // namespace rgan::data
