#include "rgan/gan/losses.hpp"

#include <string>

#include "rgan/core/error.hpp"

namespace rgan::gan {

BoundModel bind_model(Graph& graph, const RganModel& model, Trainable t) {
  BoundModel b;
  b.feature_dim = model.feature_dim;
  b.generator = core::bind(graph, model.generator, t.generator);
  b.critic_trunk = core::bind(graph, model.critic_trunk, t.critic);
  b.critic_head = core::bind(graph, model.critic_head, t.critic);
  b.regressor_trunk = model.shared ? b.critic_trunk : core::bind(graph, model.regressor_trunk_own, t.regressor);
  b.regressor_head = core::bind(graph, model.regressor_head, t.regressor);
  return b;
}

NodeId critic_node(Graph& graph, const BoundModel& bound, NodeId joint) {
  const std::size_t d = bound.feature_dim;
  const NodeId x = graph.slice_cols(joint, 0, d);
  const NodeId y = graph.slice_cols(joint, d, 1);
  const NodeId h = core::forward(graph, bound.critic_trunk, x);
  return core::forward(graph, bound.critic_head, graph.concat_cols(h, y));
}

NodeId regressor_node(Graph& graph, const BoundModel& bound, NodeId features) {
  return core::forward(graph, bound.regressor_head, core::forward(graph, bound.regressor_trunk, features));
}

namespace {

void check_batches(const RganModel& model, const Matrix& real, const Matrix& fake) {
  const std::size_t w = model.feature_dim + 1;
  if (real.cols() != w || fake.cols() != w)
    throw ShapeError("batches must have " + std::to_string(w) + " joint columns");
  if (real.rows() == 0 || fake.rows() == 0) throw ContractError("empty training batch");
}

// mean (R(x) - y)^2 over the rows of a joint node.
NodeId residual_term(Graph& g, const BoundModel& b, NodeId joint) {
  const std::size_t d = b.feature_dim;
  const NodeId pred = regressor_node(g, b, g.slice_cols(joint, 0, d));
  return g.mean(g.square(g.sub(pred, g.slice_cols(joint, d, 1))));
}

}  // namespace

Trainable critic_step_trainable(const GanConfig& config) {
  // Unshared mode freezes the regressor after pretraining.
  return {false, true, config.share_trunk && config.critic_regression};
}

LossGraph critic_regressor_loss(const RganModel& model, const Matrix& real, const Matrix& fake,
                                std::span<const double> mu, const GanConfig& config,
                                Trainable trainable) {
  check_batches(model, real, fake);
  if (config.gp_weight < 0.0) throw ConfigError("gradient-penalty weight (beta) must be >= 0");
  if (config.critic_regression_weight < 0.0)
    throw ConfigError("critic regression weight (gamma) must be >= 0");
  if (mu.size() != real.rows() || real.rows() != fake.rows())
    throw ShapeError("critic loss needs one mu per row and equal batch sizes");

  LossGraph lg;
  Graph& g = lg.graph;
  lg.bound = bind_model(g, model, trainable);
  const NodeId r = g.constant(real);
  const NodeId f = g.constant(fake);
  const NodeId d_real = g.mean(critic_node(g, lg.bound, r));
  const NodeId d_fake = g.mean(critic_node(g, lg.bound, f));
  NodeId loss = g.sub(d_fake, d_real);
  lg.wasserstein = g.scalar(d_real) - g.scalar(d_fake);

  if (config.gp_weight > 0.0) {
    Matrix interp(real.rows(), real.cols());
    for (std::size_t i = 0; i < real.rows(); ++i)
      for (std::size_t c = 0; c < real.cols(); ++c)
        interp(i, c) = mu[i] * real(i, c) + (1.0 - mu[i]) * fake(i, c);
    const NodeId in = g.constant(std::move(interp));
    const NodeId grad = core::grad_wrt_input_as_node(g, critic_node(g, lg.bound, in), in);
    const NodeId pen = g.mean(g.square(g.add_scalar(g.row_norm(grad), -1.0)));
    lg.penalty = g.scalar(pen);
    loss = g.add(loss, g.scale(pen, config.gp_weight));
  }

  const NodeId reg = g.add(residual_term(g, lg.bound, f), residual_term(g, lg.bound, r));
  lg.regression = g.scalar(reg);
  if (config.critic_regression && config.critic_regression_weight > 0.0)
    loss = g.add(loss, g.scale(reg, config.critic_regression_weight));
  lg.loss = loss;
  return lg;
}

LossGraph critic_regressor_loss(const RganModel& model, const Matrix& real, const Matrix& fake,
                                std::span<const double> mu, const GanConfig& config) {
  return critic_regressor_loss(model, real, fake, mu, config, critic_step_trainable(config));
}

LossGraph regressor_loss(const RganModel& model, const Matrix& real, const Matrix& fake) {
  check_batches(model, real, fake);
  LossGraph lg;
  Graph& g = lg.graph;
  // In shared mode the regressor trunk is the critic trunk, so it is bound as critic.
  lg.bound = bind_model(g, model, {false, model.shared, true});
  lg.loss = g.add(residual_term(g, lg.bound, g.constant(fake)), residual_term(g, lg.bound, g.constant(real)));
  lg.regression = g.scalar(lg.loss);
  return lg;
}

LossGraph generator_loss(const RganModel& model, const Matrix& noise, const Matrix& real,
                         const GanConfig& config) {
  if (config.generator_regression_weight < 0.0)
    throw ConfigError("generator regression weight (alpha) must be >= 0");
  if (noise.cols() != model.noise_dim) throw ShapeError("noise width does not match the generator");
  if (real.cols() != model.feature_dim + 1) throw ShapeError("real batch has the wrong joint width");

  LossGraph lg;
  Graph& g = lg.graph;
  lg.bound = bind_model(g, model, {true, false, false});
  const NodeId fake = core::forward(g, lg.bound.generator, g.constant(noise));
  const NodeId d_fake = g.mean(critic_node(g, lg.bound, fake));
  NodeId loss = g.scale(d_fake, -1.0);

  const NodeId reg = g.add(residual_term(g, lg.bound, fake), residual_term(g, lg.bound, g.constant(real)));
  lg.regression = g.scalar(reg);
  if (config.generator_regression && config.generator_regression_weight > 0.0)
    loss = g.add(loss, g.scale(reg, config.generator_regression_weight));
  lg.loss = loss;
  return lg;
}

}  // namespace rgan::gan
