#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rgan/data/dataset.hpp"
#include "rgan/regress/regressor.hpp"

namespace rgan::quality {

using core::Matrix;
using data::TabularDataset;

/// RBF kernel. With `fixed_bandwidth` unset, sigma is the median pairwise
/// distance of the pooled rows being compared.
struct KernelSpec {
  bool median_heuristic = true;
  double sigma = 1.0;

  static KernelSpec median() { return {}; }
  static KernelSpec fixed(double sigma) { return {false, sigma}; }
  void validate() const;
  double bandwidth(const Matrix& a, const Matrix& b) const;
};

/// Biased (V-statistic) squared MMD with the same-index terms kept:
///   1/n^2 sum k(a_i,a_j) - 2/(nm) sum k(a_i,b_j) + 1/m^2 sum k(b_i,b_j)
/// Small negatives from rounding are clamped to 0.
double mmd2(const Matrix& a, const Matrix& b, const KernelSpec& kernel);
/// Operates on the joint rows [x, y].
double mmd2(const TabularDataset& a, const TabularDataset& b, const KernelSpec& kernel);

/// Fold membership used by diversity_score: a seeded permutation cut into
/// K contiguous parts whose sizes differ by at most one.
std::vector<std::vector<std::size_t>> make_folds(std::size_t rows, std::size_t k, std::uint64_t seed);

/// Cross-validated MAE in both directions (fit on K-1 generated folds, test
/// on the held-out real fold, and vice versa):
///   S = (2/K) * (sum_i MAE_gen->real(i) + sum_i MAE_real->gen(i))
/// Lower is better. Both datasets are folded with the same seed, so
/// swapping the arguments gives the same value.
double diversity_score(const TabularDataset& real, const TabularDataset& generated, std::size_t k,
                       const regress::RegressorFactory& factory, std::uint64_t seed);

/// Kernel ridge with fixed settings; the default DS model.
regress::RegressorFactory default_ds_model();

struct BatchQuality {
  std::size_t batch = 0;
  double mmd2 = 0.0;
  double ds = 0.0;
  std::size_t mmd_rank = 0;  // 1 = lowest mmd2
  std::size_t ds_rank = 0;
  double combined = 0.0;     // min-max normalized mmd2 + ds
  bool selected = false;
};

struct BatchSelection {
  std::size_t index = 0;
  std::vector<BatchQuality> batches;
};

/// Ranking and selection from precomputed scores. Argmin of the combined
/// score; ties go to the lower mmd2, then the lower index.
BatchSelection rank_batches(std::span<const double> mmd2, std::span<const double> ds);

struct QualitySettings {
  KernelSpec kernel;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  std::size_t workers = 1;  // batches scored concurrently
};

BatchSelection select_best_batch(const TabularDataset& real, std::span<const TabularDataset> batches,
                                 const QualitySettings& settings,
                                 const regress::RegressorFactory& factory = default_ds_model());

/// Columns: batch,mmd2,ds,mmd_rank,ds_rank,combined,selected
void write_quality_csv(const BatchSelection& selection, const std::filesystem::path& path);

}  // namespace rgan::quality
