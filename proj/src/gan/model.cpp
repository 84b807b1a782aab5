#include "rgan/gan/model.hpp"

#include <string>

#include "rgan/core/error.hpp"
#include "rgan/core/rng.hpp"

namespace rgan::gan {

void GanConfig::validate() const {
  if (noise_dim == 0) throw ConfigError("noise dimension must be >= 1");
  if (n_critic == 0) throw ConfigError("n_critic must be >= 1");
  if (batch == 0) throw ConfigError("batch must be >= 1");
  if (gp_weight < 0.0) throw ConfigError("gradient-penalty weight (beta) must be >= 0");
  if (generator_regression_weight < 0.0)
    throw ConfigError("generator regression weight (alpha) must be >= 0");
  if (critic_regression_weight < 0.0)
    throw ConfigError("critic regression weight (gamma) must be >= 0");
  if (learning_rate <= 0.0 || pretrain_learning_rate <= 0.0)
    throw ConfigError("learning rates must be > 0");
  if (slope < 0.0 || slope >= 1.0) throw ConfigError("leaky-relu slope must be in [0, 1)");
}

GanConfig wgan_gp_mode(GanConfig base) {
  base.share_trunk = false;
  base.generator_regression = false;
  base.critic_regression = false;
  return base;
}

RganModel init_model(std::size_t feature_dim, const GanConfig& config) {
  return init_model(feature_dim, config, kHidden, kRegressorHidden);
}

RganModel init_model(std::size_t feature_dim, const GanConfig& config, std::size_t hidden,
                     std::size_t regressor_hidden) {
  config.validate();
  if (hidden == 0 || regressor_hidden == 0) throw ShapeError("hidden widths must be >= 1");
  if (feature_dim == 0) throw ShapeError("feature dimension must be >= 1");
  core::SeededRng rng(core::derive_seed(config.seed, 1));
  using core::OutputActivation;
  RganModel m;
  m.feature_dim = feature_dim;
  m.noise_dim = config.noise_dim;
  m.shared = config.share_trunk;
  const std::size_t gen[] = {config.noise_dim, hidden, hidden, feature_dim + 1};
  const std::size_t trunk[] = {feature_dim, hidden};
  const std::size_t critic[] = {hidden + 1, hidden, 1};
  const std::size_t reg[] = {hidden, regressor_hidden, 1};
  m.generator = core::init_mlp(gen, rng, config.slope, OutputActivation::sigmoid);
  m.critic_trunk = core::init_mlp(trunk, rng, config.slope, OutputActivation::leaky_relu);
  m.critic_head = core::init_mlp(critic, rng, config.slope);
  m.regressor_head = core::init_mlp(reg, rng, config.slope);
  if (!m.shared)
    m.regressor_trunk_own = core::init_mlp(trunk, rng, config.slope, OutputActivation::leaky_relu);
  return m;
}

Matrix critic_scores(const RganModel& model, const Matrix& joint) {
  if (joint.cols() != model.feature_dim + 1)
    throw ShapeError("critic expects " + std::to_string(model.feature_dim + 1) + " joint columns");
  const Matrix x = core::slice_cols(joint, 0, model.feature_dim);
  const Matrix y = core::slice_cols(joint, model.feature_dim, 1);
  return core::forward_mlp(model.critic_head, core::hconcat(core::forward_mlp(model.critic_trunk, x), y));
}

Matrix regress(const RganModel& model, const Matrix& features) {
  return core::forward_mlp(model.regressor_head, core::forward_mlp(model.regressor_trunk(), features));
}

Matrix generate_joint(const RganModel& model, const Matrix& noise) {
  return core::forward_mlp(model.generator, noise);
}

data::TabularDataset generate(const RganModel& model, std::size_t n, std::uint64_t seed) {
  core::SeededRng rng(seed);
  const Matrix noise = core::gaussian_noise(n, model.noise_dim, rng);
  const Matrix joint = n == 0 ? Matrix(0, model.feature_dim + 1) : generate_joint(model, noise);
  return data::TabularDataset::from_joint(joint, {}, "y", data::Provenance::generated);
}

}  // namespace rgan::gan
