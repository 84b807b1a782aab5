#pragma once

#include <span>

#include "rgan/core/graph.hpp"
#include "rgan/core/mlp.hpp"
#include "rgan/gan/config.hpp"
#include "rgan/gan/model.hpp"

namespace rgan::gan {

using core::Graph;
using core::NodeId;

/// Which sub-networks are recorded as trainable variables.
struct Trainable {
  bool generator = false;
  bool critic = false;     // critic trunk + critic head
  bool regressor = false;  // regressor head (+ own trunk when unshared)
};

/// Model parameters recorded into one graph. When the model is shared the
/// regressor trunk nodes are the critic trunk nodes, so gradients from both
/// heads accumulate on the same parameters.
struct BoundModel {
  std::size_t feature_dim = 0;
  core::BoundMlp generator;
  core::BoundMlp critic_trunk;
  core::BoundMlp critic_head;
  core::BoundMlp regressor_trunk;
  core::BoundMlp regressor_head;
};

BoundModel bind_model(Graph& graph, const RganModel& model, Trainable trainable);

/// Critic score per row of a joint [x, y] node.
NodeId critic_node(Graph& graph, const BoundModel& bound, NodeId joint);
/// Regressor prediction per row of a feature node.
NodeId regressor_node(Graph& graph, const BoundModel& bound, NodeId features);

/// Loss graph plus the pieces the trainer logs.
struct LossGraph {
  Graph graph;
  BoundModel bound;
  NodeId loss = 0;
  double wasserstein = 0.0;  // mean D(real) - mean D(fake)
  double penalty = 0.0;      // mean (|grad D(interp)| - 1)^2, before weighting
  double regression = 0.0;   // mean (yhat' - y')^2 + mean (yhat - y)^2, before weighting
};

/// Joint critic/regressor objective:
///   -mean D(real) + mean D(fake) + beta * mean (|grad D(interp)|_2 - 1)^2
///   + gamma * [mean (yhat' - y')^2 + mean (yhat - y)^2]
/// with interp = mu * real + (1 - mu) * fake per row. The regression term is
/// dropped when `critic_regression` is off. Real and fake are joint rows.
LossGraph critic_regressor_loss(const RganModel& model, const Matrix& real, const Matrix& fake,
                                std::span<const double> mu, const GanConfig& config,
                                Trainable trainable);
LossGraph critic_regressor_loss(const RganModel& model, const Matrix& real, const Matrix& fake,
                                std::span<const double> mu, const GanConfig& config);

/// Generator objective:
///   -mean D(G(z)) + alpha * [mean (yhat' - y')^2 + mean (yhat - y)^2]
/// where (x', y') = G(z) and the second residual uses the concurrent real
/// batch. Only generator parameters are trainable.
LossGraph generator_loss(const RganModel& model, const Matrix& noise, const Matrix& real,
                         const GanConfig& config);

/// Regression objective alone: mean (yhat' - y')^2 + mean (yhat - y)^2 with
/// the regressor trunk and head trainable.
LossGraph regressor_loss(const RganModel& model, const Matrix& real, const Matrix& fake);

/// Trainable set the critic step uses under `config`.
Trainable critic_step_trainable(const GanConfig& config);

}  // namespace rgan::gan
