#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rgan/core/matrix.hpp"
#include "rgan/core/mlp.hpp"
#include "rgan/data/dataset.hpp"

namespace rgan::regress {

using core::Matrix;
using data::TabularDataset;

enum class Kind { kernel_ridge, mlp };

struct KernelRidgeSpec {
  double bandwidth = 0.0;  // <= 0 selects the median heuristic on the training features
  double ridge = 1e-3;
};

struct MlpRegressorSpec {
  std::vector<std::size_t> hidden = {32, 16};
  std::size_t epochs = 500;
  double learning_rate = 1e-3;
  std::size_t batch = 32;
  std::uint64_t seed = 0;
};

/// Downstream soft-sensor model. Kernel ridge stands in for SVR.
struct RegressorSpec {
  Kind kind = Kind::kernel_ridge;
  KernelRidgeSpec kernel_ridge;
  MlpRegressorSpec mlp;

  /// Report label, e.g. "kernel-ridge (SVR stand-in)".
  std::string label() const;
  /// Short identifier used in config files: "kernel-ridge" or "mlp".
  std::string id() const;
  void validate() const;
};

RegressorSpec parse_regressor(const std::string& id);

class Regressor {
 public:
  virtual ~Regressor() = default;
  virtual std::vector<double> predict(const Matrix& features) const = 0;
};

class KernelRidge final : public Regressor {
 public:
  KernelRidge(Matrix train_features, std::vector<double> coefficients, double bandwidth);
  std::vector<double> predict(const Matrix& features) const override;
  std::span<const double> coefficients() const { return coefficients_; }
  double bandwidth() const { return bandwidth_; }

 private:
  Matrix train_;
  std::vector<double> coefficients_;
  double bandwidth_;
};

class MlpRegressor final : public Regressor {
 public:
  explicit MlpRegressor(core::MlpParams params) : params_(std::move(params)) {}
  std::vector<double> predict(const Matrix& features) const override;
  const core::MlpParams& params() const { return params_; }

 private:
  core::MlpParams params_;
};

/// Solves (K + ridge I) c = y by Cholesky. Throws ConditioningError when the
/// system is numerically singular (e.g. ridge 0 with duplicate rows).
std::unique_ptr<KernelRidge> fit_kernel_ridge(const KernelRidgeSpec& spec, const TabularDataset& train);
std::unique_ptr<MlpRegressor> fit_mlp(const MlpRegressorSpec& spec, const TabularDataset& train);
std::unique_ptr<Regressor> fit(const RegressorSpec& spec, const TabularDataset& train);

using RegressorFactory = std::function<std::unique_ptr<Regressor>(const TabularDataset&)>;
RegressorFactory make_factory(const RegressorSpec& spec);

struct Metrics {
  double mae = 0.0;
  double rmse = 0.0;
};

Metrics metrics(std::span<const double> predictions, std::span<const double> labels);
Metrics evaluate(const Regressor& model, const TabularDataset& test);

}  // namespace rgan::regress
