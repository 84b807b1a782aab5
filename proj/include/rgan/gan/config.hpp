#pragma once

#include <cstddef>
#include <cstdint>

namespace rgan::gan {

/// Training settings. Weight names follow the loss terms they scale:
/// `gp_weight` the gradient penalty, `generator_regression_weight` the
/// regression term of the generator loss, `critic_regression_weight` the
/// regression term of the joint critic/regressor loss.
struct GanConfig {
  std::size_t noise_dim = 8;
  std::size_t n_critic = 5;
  double gp_weight = 0.5;
  double generator_regression_weight = 1.0;
  double critic_regression_weight = 1.0;
  double learning_rate = 1e-4;
  std::size_t batch = 32;
  std::size_t iterations = 10000;

  bool share_trunk = true;
  bool generator_regression = true;
  bool critic_regression = true;

  std::size_t pretrain_epochs = 200;
  double pretrain_learning_rate = 1e-3;
  double slope = 0.01;
  std::uint64_t seed = 0;

  /// Throws ConfigError.
  void validate() const;

  /// Plain WGAN-GP: unshared trunks and both regression terms off.
  bool is_wgan_gp() const { return !share_trunk && !generator_regression && !critic_regression; }
};

/// Copy of `base` switched to plain WGAN-GP.
GanConfig wgan_gp_mode(GanConfig base);

}  // namespace rgan::gan
