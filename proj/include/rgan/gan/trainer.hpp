#pragma once

#include <cstddef>
#include <vector>

#include "rgan/core/error.hpp"
#include "rgan/data/dataset.hpp"
#include "rgan/gan/config.hpp"
#include "rgan/gan/model.hpp"

namespace rgan::gan {

struct TraceRecord {
  std::size_t iteration = 0;
  double critic_loss = 0.0;
  double generator_loss = 0.0;
  double regression_loss = 0.0;
  double wasserstein = 0.0;  // mean D(real) - mean D(fake), averaged over the critic steps
  double wall_seconds = 0.0; // since the start of adversarial training
};

struct TrainTrace {
  std::vector<TraceRecord> records;
  double pretrain_initial_mse = 0.0;
  double pretrain_final_mse = 0.0;
  double pretrain_seconds = 0.0;
  double train_seconds = 0.0;
};

/// Thrown when a loss turns non-finite; carries the trace recorded so far.
struct TrainingDiverged : DivergenceError {
  TrainingDiverged(const std::string& what, std::size_t iteration, TrainTrace trace)
      : DivergenceError(what, iteration), trace(std::move(trace)) {}
  TrainTrace trace;
};

/// Regressor-only MSE on real rows.
double regressor_mse(const RganModel& model, const data::TabularDataset& train);

/// Trains regressor trunk + head on real rows for `pretrain_epochs` epochs of
/// shuffled minibatches. Returns (initial, final) training MSE.
std::pair<double, double> pretrain_regressor(RganModel& model, const data::TabularDataset& train,
                                             const GanConfig& config);

struct TrainResult {
  RganModel model;
  TrainTrace trace;
};

/// Initialise, pretrain, then alternate n_critic critic/regressor updates
/// with one generator update per iteration. Batches are drawn uniformly with
/// replacement from `train` (normalized). Deterministic under config.seed.
TrainResult train(const data::TabularDataset& train, const GanConfig& config);

}  // namespace rgan::gan
