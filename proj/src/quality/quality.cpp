#include "rgan/quality/quality.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <numeric>
#include <thread>

#include "rgan/core/error.hpp"
#include "rgan/core/rng.hpp"
#include "rgan/data/csv.hpp"
#include "rgan/regress/kernel.hpp"

namespace rgan::quality {

void KernelSpec::validate() const {
  if (!median_heuristic && !(sigma > 0.0 && std::isfinite(sigma)))
    throw ConfigError("fixed kernel bandwidth must be a positive finite number");
}

double KernelSpec::bandwidth(const Matrix& a, const Matrix& b) const {
  if (!median_heuristic) return sigma;
  return regress::median_heuristic(core::vconcat(a, b));
}

double mmd2(const Matrix& a, const Matrix& b, const KernelSpec& kernel) {
  if (a.rows() == 0 || b.rows() == 0) throw ContractError("mmd2 needs two nonempty sample sets");
  if (a.cols() != b.cols()) throw ShapeError("mmd2: sample sets have different widths");
  kernel.validate();
  const double sigma = kernel.bandwidth(a, b);

  auto block = [sigma](const Matrix& p, const Matrix& q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i)
      for (std::size_t j = 0; j < q.rows(); ++j) s += regress::rbf(p.row(i), q.row(j), sigma);
    return s;
  };
  const double n = static_cast<double>(a.rows());
  const double m = static_cast<double>(b.rows());
  const double v = block(a, a) / (n * n) - 2.0 * block(a, b) / (n * m) + block(b, b) / (m * m);
  return std::max(v, 0.0);
}

double mmd2(const TabularDataset& a, const TabularDataset& b, const KernelSpec& kernel) {
  return mmd2(a.joint(), b.joint(), kernel);
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t rows, std::size_t k, std::uint64_t seed) {
  if (k == 0 || rows < k) throw ContractError("cannot cut " + std::to_string(rows) + " rows into " +
                                              std::to_string(k) + " folds");
  std::vector<std::size_t> perm(rows);
  std::iota(perm.begin(), perm.end(), 0);
  core::SeededRng rng(seed);
  for (std::size_t i = rows; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);

  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t len = rows / k + (f < rows % k ? 1 : 0);
    folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                    perm.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return folds;
}

namespace {

std::vector<std::size_t> all_but(const std::vector<std::vector<std::size_t>>& folds, std::size_t skip) {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < folds.size(); ++f)
    if (f != skip) out.insert(out.end(), folds[f].begin(), folds[f].end());
  return out;
}

double fold_mae_sum(const TabularDataset& train_src, const std::vector<std::vector<std::size_t>>& train_folds,
                    const TabularDataset& test_src, const std::vector<std::vector<std::size_t>>& test_folds,
                    const regress::RegressorFactory& factory) {
  double total = 0.0;
  for (std::size_t f = 0; f < train_folds.size(); ++f) {
    const auto rows = all_but(train_folds, f);
    const auto model = factory(train_src.subset(rows));
    total += regress::evaluate(*model, test_src.subset(test_folds[f])).mae;
  }
  return total;
}

}  // namespace

double diversity_score(const TabularDataset& real, const TabularDataset& generated, std::size_t k,
                       const regress::RegressorFactory& factory, std::uint64_t seed) {
  if (k < 2) throw ContractError("diversity score needs K >= 2 folds");
  if (real.rows() < k || generated.rows() < k)
    throw ContractError("diversity score needs at least K rows in both datasets");
  if (real.dim() != generated.dim()) throw ShapeError("diversity score: datasets have different widths");

  const auto real_folds = make_folds(real.rows(), k, seed);
  const auto gen_folds = make_folds(generated.rows(), k, seed);
  const double gen_to_real = fold_mae_sum(generated, gen_folds, real, real_folds, factory);
  const double real_to_gen = fold_mae_sum(real, real_folds, generated, gen_folds, factory);
  return 2.0 / static_cast<double>(k) * (gen_to_real + real_to_gen);
}

regress::RegressorFactory default_ds_model() {
  regress::RegressorSpec spec;
  spec.kind = regress::Kind::kernel_ridge;
  return regress::make_factory(spec);
}

BatchSelection rank_batches(std::span<const double> mmd, std::span<const double> ds) {
  if (mmd.empty()) throw ContractError("batch selection needs at least one batch");
  if (mmd.size() != ds.size()) throw ShapeError("batch selection: score lists differ in length");
  const std::size_t k = mmd.size();

  auto ranks = [k](std::span<const double> v) {
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<std::size_t> r(k);
    for (std::size_t pos = 0; pos < k; ++pos) r[order[pos]] = pos + 1;
    return r;
  };
  auto normalized = [k](std::span<const double> v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    std::vector<double> out(k, 0.0);
    if (*hi > *lo)
      for (std::size_t i = 0; i < k; ++i) out[i] = (v[i] - *lo) / (*hi - *lo);
    return out;
  };

  const auto mr = ranks(mmd);
  const auto dr = ranks(ds);
  const auto mn = normalized(mmd);
  const auto dn = normalized(ds);

  BatchSelection sel;
  sel.batches.resize(k);
  for (std::size_t i = 0; i < k; ++i) sel.batches[i] = {i, mmd[i], ds[i], mr[i], dr[i], mn[i] + dn[i], false};
  for (std::size_t i = 1; i < k; ++i) {
    const auto& c = sel.batches[i];
    const auto& best = sel.batches[sel.index];
    if (c.combined < best.combined || (c.combined == best.combined && c.mmd2 < best.mmd2)) sel.index = i;
  }
  sel.batches[sel.index].selected = true;
  return sel;
}

BatchSelection select_best_batch(const TabularDataset& real, std::span<const TabularDataset> batches,
                                 const QualitySettings& settings, const regress::RegressorFactory& factory) {
  if (batches.empty()) throw ContractError("batch selection needs at least one batch");
  const std::size_t k = batches.size();
  std::vector<double> mmd(k), ds(k);
  std::vector<std::exception_ptr> errors(k);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < k; i = next++) {
      try {
        mmd[i] = mmd2(real, batches[i], settings.kernel);
        ds[i] = diversity_score(real, batches[i], settings.folds, factory, settings.seed);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(settings.workers, 1, k);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rank_batches(mmd, ds);
}

void write_quality_csv(const BatchSelection& selection, const std::filesystem::path& path) {
  data::CsvWriter csv(path, {"batch", "mmd2", "ds", "mmd_rank", "ds_rank", "combined", "selected"});
  for (const auto& b : selection.batches)
    csv.row(b.batch, b.mmd2, b.ds, b.mmd_rank, b.ds_rank, b.combined, b.selected ? 1 : 0);
}

}  // namespace rgan::quality
