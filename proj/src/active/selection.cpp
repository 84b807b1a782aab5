#include "rgan/active/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rgan/core/error.hpp"
#include "rgan/regress/kernel.hpp"

namespace rgan::active {

ScoreTerms igs_score(const Matrix& pool, std::span<const std::size_t> labeled,
                     std::span<const double> labeled_y, std::span<const std::size_t> unlabeled,
                     std::span<const double> predicted_unlabeled) {
  if (labeled.empty()) throw ContractError("igs_score needs at least one labeled point");
  if (labeled.size() != labeled_y.size() || unlabeled.size() != predicted_unlabeled.size())
    throw ShapeError("igs_score: index/value length mismatch");
  ScoreTerms t;
  const std::size_t u = unlabeled.size();
  t.d_x.resize(u);
  t.d_y.resize(u);
  t.r.resize(u);
  t.score.resize(u);
  for (std::size_t j = 0; j < u; ++j) {
    const auto xn = pool.row(unlabeled[j]);
    double dx = std::numeric_limits<double>::infinity();
    double dy = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < labeled.size(); ++m) {
      dx = std::min(dx, std::sqrt(regress::squared_distance(xn, pool.row(labeled[m]))));
      dy = std::min(dy, std::abs(predicted_unlabeled[j] - labeled_y[m]));
    }
    double r = 0.0;
    for (std::size_t i = 0; i < pool.rows(); ++i)
      r += std::sqrt(regress::squared_distance(xn, pool.row(i)));
    t.d_x[j] = dx;
    t.d_y[j] = dy;
    t.r[j] = r;
    t.score[j] = r > 0.0 ? dx * dy / r : 0.0;
  }
  return t;
}

regress::RegressorFactory default_selection_model() {
  return regress::make_factory(regress::RegressorSpec{});
}

SelectionResult run_active_selection(const Matrix& pool, const LabelOracle& oracle,
                                     const LabelBudget& budget, std::uint64_t seed,
                                     const regress::RegressorFactory& model) {
  const std::size_t n = pool.rows();
  if (budget.max > n)
    throw BudgetError("label budget " + std::to_string(budget.max) + " exceeds pool size " +
                      std::to_string(n));
  if (budget.initial > budget.max)
    throw BudgetError("initial label count exceeds the label budget");
  if (budget.max < 2 || (budget.initial != 0 && budget.initial < 2))
    throw BudgetError("label budget needs at least 2 initial and total labels");

  SelectionResult res;
  auto take = [&](std::size_t idx, AcquisitionStep step) {
    res.labeled.push_back(idx);
    res.labels.push_back(oracle(idx));
    step.step = res.log.size();
    step.index = idx;
    res.log.push_back(step);
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();

  if (budget.max == n) {
    for (std::size_t i = 0; i < n; ++i) take(i, {0, 0, nan, nan, nan, nan});
    return res;
  }

  std::size_t k = budget.initial;
  if (k == 0) {
    const auto [lo, hi] = default_k_range(n);
    k = std::min(choose_k(pool, lo, std::max(lo, hi), seed), budget.max);
  }
  res.clusters = kmeans(pool, k, seed);
  for (std::size_t idx : init_select(pool, res.clusters)) take(idx, {0, 0, nan, nan, nan, nan});

  std::vector<char> is_labeled(n, 0);
  for (std::size_t i : res.labeled) is_labeled[i] = 1;

  while (res.labeled.size() < budget.max) {
    data::TabularDataset train;
    train.features = core::select_rows(pool, res.labeled);
    train.labels = res.labels;
    const auto f = model(train);

    std::vector<std::size_t> unlabeled;
    for (std::size_t i = 0; i < n; ++i)
      if (!is_labeled[i]) unlabeled.push_back(i);
    const auto preds = f->predict(core::select_rows(pool, unlabeled));
    const auto terms = igs_score(pool, res.labeled, res.labels, unlabeled, preds);

    std::size_t best = 0;
    for (std::size_t j = 1; j < unlabeled.size(); ++j)
      if (terms.score[j] > terms.score[best]) best = j;
    is_labeled[unlabeled[best]] = 1;
    take(unlabeled[best], {0, 0, terms.d_x[best], terms.d_y[best], terms.r[best], terms.score[best]});
  }
  return res;
}

}  // namespace rgan::active
