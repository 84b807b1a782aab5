#include "rgan/regress/regressor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "rgan/core/adam.hpp"
#include "rgan/core/error.hpp"
#include "rgan/core/rng.hpp"
#include "rgan/regress/kernel.hpp"

namespace rgan::regress {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double rbf(std::span<const double> a, std::span<const double> b, double sigma) {
  return std::exp(-squared_distance(a, b) / (2.0 * sigma * sigma));
}

double median_heuristic(const Matrix& rows) {
  const std::size_t n = rows.rows();
  if (n < 2) return 1.0;
  std::vector<double> d;
  d.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d.push_back(std::sqrt(squared_distance(rows.row(i), rows.row(j))));
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
  double med = d[mid];
  if (d.size() % 2 == 0) {
    const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
    med = 0.5 * (med + lower);
  }
  return med > 0.0 ? med : 1.0;
}

std::string RegressorSpec::label() const {
  return kind == Kind::kernel_ridge ? "kernel-ridge (SVR stand-in)" : "mlp";
}

std::string RegressorSpec::id() const { return kind == Kind::kernel_ridge ? "kernel-ridge" : "mlp"; }

void RegressorSpec::validate() const {
  if (kernel_ridge.ridge < 0.0) throw ConfigError("ridge strength must be >= 0");
  if (mlp.hidden.empty()) throw ConfigError("mlp regressor needs at least one hidden layer");
  if (mlp.batch == 0) throw ConfigError("mlp batch must be >= 1");
  if (mlp.learning_rate <= 0.0) throw ConfigError("mlp learning rate must be > 0");
}

RegressorSpec parse_regressor(const std::string& id) {
  RegressorSpec s;
  if (id == "kernel-ridge" || id == "svr")
    s.kind = Kind::kernel_ridge;
  else if (id == "mlp" || id == "dnn")
    s.kind = Kind::mlp;
  else
    throw ConfigError("unknown regressor '" + id + "' (expected kernel-ridge or mlp)");
  return s;
}

KernelRidge::KernelRidge(Matrix train_features, std::vector<double> coefficients, double bandwidth)
    : train_(std::move(train_features)), coefficients_(std::move(coefficients)), bandwidth_(bandwidth) {}

std::vector<double> KernelRidge::predict(const Matrix& features) const {
  if (features.cols() != train_.cols()) throw ShapeError("kernel ridge: feature width mismatch");
  std::vector<double> out(features.rows(), 0.0);
  for (std::size_t r = 0; r < features.rows(); ++r) {
    double s = 0.0;
    for (std::size_t i = 0; i < train_.rows(); ++i)
      s += coefficients_[i] * rbf(features.row(r), train_.row(i), bandwidth_);
    out[r] = s;
  }
  return out;
}

std::unique_ptr<KernelRidge> fit_kernel_ridge(const KernelRidgeSpec& spec, const TabularDataset& train) {
  train.validate();
  const std::size_t n = train.rows();
  if (n == 0) throw ContractError("kernel ridge needs at least one training row");
  if (spec.ridge < 0.0) throw ConfigError("ridge strength must be >= 0");
  const double sigma = spec.bandwidth > 0.0 ? spec.bandwidth : median_heuristic(train.features);

  Eigen::MatrixXd k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    k(i, i) = 1.0 + spec.ridge;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = rbf(train.features.row(i), train.features.row(j), sigma);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    const auto diag = llt.matrixLLT().diagonal();
    const double floor = 1e-7 * std::sqrt(1.0 + spec.ridge);
    ok = (diag.array() > floor).all();
  }
  if (!ok)
    throw ConditioningError(
        "kernel ridge system is numerically singular (duplicate rows?); use ridge > 0");
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(train.labels.data(), static_cast<Eigen::Index>(n));
  const Eigen::VectorXd c = llt.solve(y);
  return std::make_unique<KernelRidge>(train.features, std::vector<double>(c.data(), c.data() + n), sigma);
}

std::vector<double> MlpRegressor::predict(const Matrix& features) const {
  const Matrix out = core::forward_mlp(params_, features);
  return std::vector<double>(out.values().begin(), out.values().end());
}

std::unique_ptr<MlpRegressor> fit_mlp(const MlpRegressorSpec& spec, const TabularDataset& train) {
  train.validate();
  const std::size_t n = train.rows();
  if (n == 0) throw ContractError("mlp regressor needs at least one training row");
  core::SeededRng rng(spec.seed);
  std::vector<std::size_t> sizes{train.dim()};
  sizes.insert(sizes.end(), spec.hidden.begin(), spec.hidden.end());
  sizes.push_back(1);
  core::MlpParams params = core::init_mlp(sizes, rng);
  core::AdamState adam(params, {spec.learning_rate});

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const Matrix labels = Matrix::column(train.labels);
  for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t start = 0; start < n; start += spec.batch) {
      const std::size_t end = std::min(n, start + spec.batch);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      core::Graph g;
      const auto x = g.constant(core::select_rows(train.features, idx));
      const auto y = g.constant(core::select_rows(labels, idx));
      const auto bound = core::bind(g, params, true);
      const auto loss = g.mean(g.square(g.sub(core::forward(g, bound, x), y)));
      if (!std::isfinite(g.scalar(loss)))
        throw DivergenceError("mlp regressor loss is not finite at epoch " + std::to_string(epoch), epoch);
      core::adam_step(params, core::grad_wrt_params(g, loss, bound, params), adam);
    }
  }
  return std::make_unique<MlpRegressor>(std::move(params));
}

std::unique_ptr<Regressor> fit(const RegressorSpec& spec, const TabularDataset& train) {
  spec.validate();
  if (train.rows() < 2) throw ContractError("fitting a regressor needs at least 2 rows");
  if (spec.kind == Kind::kernel_ridge) return fit_kernel_ridge(spec.kernel_ridge, train);
  return fit_mlp(spec.mlp, train);
}

RegressorFactory make_factory(const RegressorSpec& spec) {
  return [spec](const TabularDataset& train) { return fit(spec, train); };
}

Metrics metrics(std::span<const double> predictions, std::span<const double> labels) {
  if (predictions.size() != labels.size()) throw ShapeError("prediction/label length mismatch");
  if (labels.empty()) throw ContractError("metrics need at least one row");
  double abs_sum = 0.0, sq_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double r = predictions[i] - labels[i];
    abs_sum += std::abs(r);
    sq_sum += r * r;
  }
  const auto n = static_cast<double>(labels.size());
  return {abs_sum / n, std::sqrt(sq_sum / n)};
}

Metrics evaluate(const Regressor& model, const TabularDataset& test) {
  test.validate();
  return metrics(model.predict(test.features), test.labels);
}

}  // namespace rgan::regress
