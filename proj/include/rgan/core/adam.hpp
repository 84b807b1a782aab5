#pragma once

#include <cstddef>

#include "rgan/core/mlp.hpp"

namespace rgan::core {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment estimates for one MLP.
struct AdamState {
  AdamConfig config;
  MlpParams first_moment;
  MlpParams second_moment;
  std::size_t step = 0;

  AdamState() = default;
  AdamState(const MlpParams& like, AdamConfig config);
};

/// Bias-corrected Adam update in place. A non-finite gradient leaves the
/// parameters untouched and throws DivergenceError with the step index.
void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state);

}  // namespace rgan::core
