#pragma once

#include <cstddef>
#include <cstdint>

#include "rgan/core/mlp.hpp"
#include "rgan/data/dataset.hpp"
#include "rgan/gan/config.hpp"

namespace rgan::gan {

using core::Matrix;
using core::MlpParams;

inline constexpr std::size_t kHidden = 32;
inline constexpr std::size_t kRegressorHidden = 8;

/// Generator plus critic and regressor sharing a first hidden layer (the trunk).
///
///   generator       noise -> 32 -> 32 -> d+1, sigmoid output in [0,1]
///   critic trunk    x -> 32 (leaky-relu)
///   critic head     [trunk(x), y] -> 32 -> 1
///   regressor head  trunk(x) -> 8 -> 1
///
/// With `shared` off the regressor owns a separate trunk of the same shape.
struct RganModel {
  std::size_t feature_dim = 0;
  std::size_t noise_dim = 0;
  bool shared = true;
  MlpParams generator;
  MlpParams critic_trunk;
  MlpParams critic_head;
  MlpParams regressor_head;
  MlpParams regressor_trunk_own;  // empty unless !shared

  const MlpParams& regressor_trunk() const { return shared ? critic_trunk : regressor_trunk_own; }
  MlpParams& regressor_trunk() { return shared ? critic_trunk : regressor_trunk_own; }
};

/// Weights drawn from derive_seed(config.seed, 1).
RganModel init_model(std::size_t feature_dim, const GanConfig& config);
/// Same layout with other widths (toy models in tests).
RganModel init_model(std::size_t feature_dim, const GanConfig& config, std::size_t hidden,
                     std::size_t regressor_hidden);

/// Critic score per joint row [x, y].
Matrix critic_scores(const RganModel& model, const Matrix& joint);
/// Regressor prediction per feature row.
Matrix regress(const RganModel& model, const Matrix& features);
/// Generator output for a noise batch, rows in [0,1]^{d+1}.
Matrix generate_joint(const RganModel& model, const Matrix& noise);

/// n generated rows in normalized space. Row i depends only on (seed, i), so
/// a shorter request is a prefix of a longer one under the same seed.
data::TabularDataset generate(const RganModel& model, std::size_t n, std::uint64_t seed);

}  // namespace rgan::gan
