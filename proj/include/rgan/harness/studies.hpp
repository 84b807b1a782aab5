#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "rgan/harness/config.hpp"
#include "rgan/harness/report.hpp"

namespace rgan::harness {

/// Calls task(i) for i in [0, n) on up to `workers` threads. Exceptions are
/// collected per index; the first (by index) is rethrown after all finish.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& task);

struct AblationVariant {
  std::string name;
  ExperimentConfig config;
};

/// full, w/o shallow sharing, w/o dual data evaluation, w/o DDE(train),
/// w/o DDE(generated). Outputs land in out_dir/ablation/<index>-<slug>.
std::vector<AblationVariant> ablation_variants(const ExperimentConfig& base);

/// variant,case,regressor,mae,rmse; writes out_dir/ablation.csv.
ReportTable run_ablation(const ExperimentConfig& config);

/// One trained GAN, one row per (amount, regressor). Amount 0 reproduces the
/// real-only baseline. amount,regressor,mae,rmse,status
ReportTable sweep_amount(const ExperimentConfig& config);

/// One-at-a-time sweep over alpha/beta/gamma with the other two at 1.
/// Divergence becomes a row with status "diverged".
/// parameter,value,regressor,mae,rmse,status
ReportTable sweep_hyper(const ExperimentConfig& config);

/// Config of one hyper-sweep point.
ExperimentConfig hyper_point(const ExperimentConfig& base, const std::string& parameter, double value);

/// GAN wall-clock (pretraining plus adversarial training) for plain WGAN-GP
/// and the full model on the same data and seed.
/// variant,iterations,pretrain_seconds,train_seconds,total_seconds,ratio
/// where ratio is total / WGAN-GP total.
ReportTable time_variants(const ExperimentConfig& config);

}  // namespace rgan::harness
