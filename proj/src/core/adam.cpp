#include "rgan/core/adam.hpp"

#include <cmath>
#include <string>

#include "rgan/core/error.hpp"

namespace rgan::core {

AdamState::AdamState(const MlpParams& like, AdamConfig cfg)
    : config(cfg), first_moment(zeros_like(like)), second_moment(zeros_like(like)) {}

namespace {

void update(Matrix& p, const Matrix& g, Matrix& m, Matrix& v, const AdamConfig& c, double corr1,
            double corr2) {
  auto pv = p.values();
  auto gv = g.values();
  auto mv = m.values();
  auto vv = v.values();
  for (std::size_t i = 0; i < pv.size(); ++i) {
    mv[i] = c.beta1 * mv[i] + (1.0 - c.beta1) * gv[i];
    vv[i] = c.beta2 * vv[i] + (1.0 - c.beta2) * gv[i] * gv[i];
    pv[i] -= c.learning_rate * (mv[i] / corr1) / (std::sqrt(vv[i] / corr2) + c.epsilon);
  }
}

}  // namespace

void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state) {
  if (grads.layers.size() != params.layers.size() ||
      state.first_moment.layers.size() != params.layers.size())
    throw ShapeError("adam_step: layer count mismatch");
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    if (!same_shape(params.layers[i].weight, grads.layers[i].weight) ||
        !same_shape(params.layers[i].bias, grads.layers[i].bias) ||
        !same_shape(params.layers[i].weight, state.first_moment.layers[i].weight))
      throw ShapeError("adam_step: layer " + std::to_string(i) + " shape mismatch");
    if (!all_finite(grads.layers[i].weight) || !all_finite(grads.layers[i].bias))
      throw DivergenceError("non-finite gradient at optimizer step " +
                                std::to_string(state.step + 1) + ", layer " + std::to_string(i),
                            state.step + 1);
  }
  ++state.step;
  const auto t = static_cast<double>(state.step);
  const double corr1 = 1.0 - std::pow(state.config.beta1, t);
  const double corr2 = 1.0 - std::pow(state.config.beta2, t);
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    auto& l = params.layers[i];
    update(l.weight, grads.layers[i].weight, state.first_moment.layers[i].weight,
           state.second_moment.layers[i].weight, state.config, corr1, corr2);
    update(l.bias, grads.layers[i].bias, state.first_moment.layers[i].bias,
           state.second_moment.layers[i].bias, state.config, corr1, corr2);
  }
}

}  // namespace rgan::core
