#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rgan/core/matrix.hpp"

namespace rgan::data {

using core::Matrix;

enum class Provenance { real, generated, mixed };

std::string to_string(Provenance p);

/// Feature matrix plus label vector. Row i of `features` pairs with labels[i].
struct TabularDataset {
  Matrix features;
  std::vector<double> labels;
  std::vector<std::string> feature_names;
  std::string label_name = "y";
  Provenance provenance = Provenance::real;

  std::size_t rows() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return features.cols(); }

  /// Rows as [x, y]; the layout the GAN and MMD operate on.
  Matrix joint() const;
  static TabularDataset from_joint(const Matrix& joint, std::vector<std::string> feature_names,
                                   std::string label_name, Provenance provenance);

  TabularDataset subset(std::span<const std::size_t> rows) const;
  /// Throws ShapeError on a row-count mismatch.
  void validate() const;
};

/// Reads a header-row CSV. Lines starting with '#' are comments.
TabularDataset load_csv(const std::filesystem::path& path, const std::string& label_column);

/// Writes features then label; an optional '# ...' comment line precedes the header.
void write_csv(const TabularDataset& ds, const std::filesystem::path& path,
               const std::string& comment = {});

/// Per-column min/max for features and label.
struct NormalizationSpec {
  std::vector<double> feature_min;
  std::vector<double> feature_max;
  double label_min = 0.0;
  double label_max = 1.0;

  /// Columns whose range is zero; they map to the constant 0.5.
  std::vector<bool> feature_degenerate() const;
  bool label_degenerate() const { return label_max == label_min; }
};

/// Fit on the real training split only.
NormalizationSpec fit_normalizer(const TabularDataset& ds);
TabularDataset apply(const TabularDataset& ds, const NormalizationSpec& spec);
TabularDataset invert(const TabularDataset& ds, const NormalizationSpec& spec);
double apply_label(double y, const NormalizationSpec& spec);
double invert_label(double y, const NormalizationSpec& spec);

struct SplitSpec {
  std::size_t train = 50;
  std::size_t test = 200;
  std::uint64_t seed = 0;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::vector<std::size_t> rest;  // rows in neither split, in permutation order
};

/// Seeded Fisher-Yates permutation; the first `train` rows go to train, the next `test` to test.
SplitIndices split_indices(std::size_t rows, const SplitSpec& spec);
std::pair<TabularDataset, TabularDataset> split(const TabularDataset& ds, const SplitSpec& spec);

/// Real rows followed by generated rows.
TabularDataset concat(const TabularDataset& real, const TabularDataset& generated);

}  // namespace rgan::data
