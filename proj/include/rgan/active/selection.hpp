#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rgan/active/kmeans.hpp"
#include "rgan/regress/regressor.hpp"

namespace rgan::active {

/// initial == 0 picks the initial count by silhouette over default_k_range.
struct LabelBudget {
  std::size_t initial = 0;
  std::size_t max = 50;
};

/// Score components for each unlabeled candidate, aligned with the candidate list.
struct ScoreTerms {
  std::vector<double> d_x;
  std::vector<double> d_y;
  std::vector<double> r;
  std::vector<double> score;
};

/// Greedy-sampling score over unlabeled pool rows:
///   d_x = min_m |x_n - x_m|, d_y = min_m |f(x_n) - y_m| over labeled m,
///   R   = sum over the whole pool of |x_n - x_i|,
///   score = d_x d_y / R (0 when R = 0).
ScoreTerms igs_score(const Matrix& pool, std::span<const std::size_t> labeled,
                     std::span<const double> labeled_y, std::span<const std::size_t> unlabeled,
                     std::span<const double> predicted_unlabeled);

/// One row of the acquisition log. Initial (cluster-centre) picks carry NaN scores.
struct AcquisitionStep {
  std::size_t step = 0;
  std::size_t index = 0;
  double d_x = 0.0;
  double d_y = 0.0;
  double r = 0.0;
  double score = 0.0;
};

struct SelectionResult {
  std::vector<std::size_t> labeled;  // acquisition order
  std::vector<double> labels;        // aligned with `labeled`
  std::vector<AcquisitionStep> log;
  ClusterResult clusters;
};

using LabelOracle = std::function<double(std::size_t)>;

/// Kernel ridge with default settings; refit after every acquisition.
regress::RegressorFactory default_selection_model();

/// Cluster, label the centre-nearest points, then greedily label the argmax
/// score until `budget.max` rows are labeled. Ties go to the lowest pool index.
SelectionResult run_active_selection(const Matrix& pool, const LabelOracle& oracle,
                                     const LabelBudget& budget, std::uint64_t seed,
                                     const regress::RegressorFactory& model = default_selection_model());

}  // namespace rgan::active
