#include "rgan/gan/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "rgan/core/adam.hpp"
#include "rgan/core/rng.hpp"
#include "rgan/gan/losses.hpp"

namespace rgan::gan {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Matrix sample_rows(const Matrix& joint, std::size_t n, core::SeededRng& rng) {
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = rng.below(joint.rows());
  return core::select_rows(joint, idx);
}

}  // namespace

double regressor_mse(const RganModel& model, const data::TabularDataset& train) {
  const Matrix pred = regress(model, train.features);
  double s = 0.0;
  for (std::size_t i = 0; i < train.rows(); ++i) {
    const double r = pred(i, 0) - train.labels[i];
    s += r * r;
  }
  return train.rows() == 0 ? 0.0 : s / static_cast<double>(train.rows());
}

std::pair<double, double> pretrain_regressor(RganModel& model, const data::TabularDataset& train,
                                             const GanConfig& config) {
  train.validate();
  if (train.dim() != model.feature_dim) throw ShapeError("training data width does not match the model");
  const double initial = regressor_mse(model, train);
  if (config.pretrain_epochs == 0 || train.rows() == 0) return {initial, initial};

  core::SeededRng rng(core::derive_seed(config.seed, 5));
  const core::AdamConfig adam_cfg{config.pretrain_learning_rate};
  core::AdamState trunk_state(model.regressor_trunk(), adam_cfg);
  core::AdamState head_state(model.regressor_head, adam_cfg);
  const Matrix labels = Matrix::column(train.labels);
  std::vector<std::size_t> order(train.rows());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < config.pretrain_epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t start = 0; start < order.size(); start += config.batch) {
      const std::size_t end = std::min(order.size(), start + config.batch);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      core::Graph g;
      const auto trunk = core::bind(g, model.regressor_trunk(), true);
      const auto head = core::bind(g, model.regressor_head, true);
      const auto x = g.constant(core::select_rows(train.features, idx));
      const auto y = g.constant(core::select_rows(labels, idx));
      const auto pred = core::forward(g, head, core::forward(g, trunk, x));
      const auto loss = g.mean(g.square(g.sub(pred, y)));
      if (!std::isfinite(g.scalar(loss)))
        throw DivergenceError("pretraining loss is not finite at epoch " + std::to_string(epoch), epoch);
      const core::BoundMlp* bound[] = {&trunk, &head};
      const core::MlpParams* shapes[] = {&model.regressor_trunk(), &model.regressor_head};
      auto grads = core::grad_wrt_params(g, loss, bound, shapes);
      core::adam_step(model.regressor_trunk(), grads[0], trunk_state);
      core::adam_step(model.regressor_head, grads[1], head_state);
    }
  }
  return {initial, regressor_mse(model, train)};
}

TrainResult train(const data::TabularDataset& train_ds, const GanConfig& config) {
  config.validate();
  train_ds.validate();
  if (train_ds.rows() == 0) throw ContractError("cannot train on an empty dataset");

  TrainResult res;
  RganModel& model = res.model;
  TrainTrace& trace = res.trace;
  model = init_model(train_ds.dim(), config);

  const auto t_pre = Clock::now();
  std::tie(trace.pretrain_initial_mse, trace.pretrain_final_mse) = pretrain_regressor(model, train_ds, config);
  trace.pretrain_seconds = seconds_since(t_pre);

  const Matrix joint = train_ds.joint();
  core::SeededRng batch_rng(core::derive_seed(config.seed, 2));
  core::SeededRng noise_rng(core::derive_seed(config.seed, 3));
  core::SeededRng mu_rng(core::derive_seed(config.seed, 4));

  const core::AdamConfig adam_cfg{config.learning_rate};
  core::AdamState gen_state(model.generator, adam_cfg);
  core::AdamState trunk_state(model.critic_trunk, adam_cfg);
  core::AdamState head_state(model.critic_head, adam_cfg);
  core::AdamState reg_state(model.regressor_head, adam_cfg);
  const Trainable critic_trainable = critic_step_trainable(config);

  const auto t0 = Clock::now();
  trace.records.reserve(config.iterations);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    TraceRecord rec;
    rec.iteration = it;
    auto diverged = [&](const std::string& what) {
      trace.train_seconds = seconds_since(t0);
      return TrainingDiverged(what + " at iteration " + std::to_string(it), it, trace);
    };
    try {
      for (std::size_t c = 0; c < config.n_critic; ++c) {
        const Matrix real = sample_rows(joint, config.batch, batch_rng);
        const Matrix fake = generate_joint(model, core::gaussian_noise(config.batch, model.noise_dim, noise_rng));
        std::vector<double> mu(config.batch);
        for (double& m : mu) m = mu_rng.uniform();

        auto lg = critic_regressor_loss(model, real, fake, mu, config, critic_trainable);
        rec.critic_loss = lg.graph.scalar(lg.loss);
        rec.wasserstein += lg.wasserstein / static_cast<double>(config.n_critic);
        rec.regression_loss = lg.regression;
        if (!std::isfinite(rec.critic_loss)) throw diverged("critic loss is not finite");

        std::vector<const core::BoundMlp*> bound{&lg.bound.critic_trunk, &lg.bound.critic_head};
        std::vector<const MlpParams*> shapes{&model.critic_trunk, &model.critic_head};
        if (critic_trainable.regressor) {
          bound.push_back(&lg.bound.regressor_head);
          shapes.push_back(&model.regressor_head);
        }
        auto grads = core::grad_wrt_params(lg.graph, lg.loss, bound, shapes);
        core::adam_step(model.critic_trunk, grads[0], trunk_state);
        core::adam_step(model.critic_head, grads[1], head_state);
        if (critic_trainable.regressor) core::adam_step(model.regressor_head, grads[2], reg_state);
      }

      const Matrix noise = core::gaussian_noise(config.batch, model.noise_dim, noise_rng);
      const Matrix real = sample_rows(joint, config.batch, batch_rng);
      auto lg = generator_loss(model, noise, real, config);
      rec.generator_loss = lg.graph.scalar(lg.loss);
      if (!std::isfinite(rec.generator_loss)) throw diverged("generator loss is not finite");
      core::adam_step(model.generator, core::grad_wrt_params(lg.graph, lg.loss, lg.bound.generator, model.generator),
                      gen_state);
    } catch (const TrainingDiverged&) {
      throw;
    } catch (const DivergenceError& e) {
      throw diverged(e.what());
    }
    rec.wall_seconds = seconds_since(t0);
    trace.records.push_back(rec);
  }
  trace.train_seconds = seconds_since(t0);
  return res;
}

}  // namespace rgan::gan
