#include "rgan/data/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rgan/core/error.hpp"
#include "rgan/core/rng.hpp"
#include "rgan/data/csv.hpp"

namespace rgan::data {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::real: return "real";
    case Provenance::generated: return "generated";
    case Provenance::mixed: return "mixed";
  }
  return "real";
}

Matrix TabularDataset::joint() const {
  validate();
  Matrix out(rows(), dim() + 1);
  for (std::size_t r = 0; r < rows(); ++r) {
    auto src = features.row(r);
    auto dst = out.row(r);
    std::copy(src.begin(), src.end(), dst.begin());
    dst[dim()] = labels[r];
  }
  return out;
}

TabularDataset TabularDataset::from_joint(const Matrix& joint, std::vector<std::string> names,
                                          std::string label_name, Provenance provenance) {
  if (joint.cols() == 0) throw ShapeError("joint matrix needs at least the label column");
  const std::size_t d = joint.cols() - 1;
  TabularDataset ds;
  ds.features = core::slice_cols(joint, 0, d);
  ds.labels.resize(joint.rows());
  for (std::size_t r = 0; r < joint.rows(); ++r) ds.labels[r] = joint(r, d);
  if (names.size() != d) {
    names.clear();
    for (std::size_t c = 0; c < d; ++c) names.push_back("x" + std::to_string(c + 1));
  }
  ds.feature_names = std::move(names);
  ds.label_name = std::move(label_name);
  ds.provenance = provenance;
  return ds;
}

TabularDataset TabularDataset::subset(std::span<const std::size_t> idx) const {
  TabularDataset out;
  out.features = core::select_rows(features, idx);
  out.labels.reserve(idx.size());
  for (std::size_t i : idx) out.labels.push_back(labels.at(i));
  out.feature_names = feature_names;
  out.label_name = label_name;
  out.provenance = provenance;
  return out;
}

void TabularDataset::validate() const {
  if (features.rows() != labels.size())
    throw ShapeError("feature rows (" + std::to_string(features.rows()) +
                     ") do not match label count (" + std::to_string(labels.size()) + ")");
}

TabularDataset load_csv(const std::filesystem::path& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  std::string line;
  std::vector<std::string> header;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line.empty() || line[0] == '#') continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty()) throw SchemaError(path.string() + ": missing header row");
  const auto it = std::find(header.begin(), header.end(), label_column);
  if (it == header.end())
    throw SchemaError(path.string() + ": label column '" + label_column + "' not found");
  const auto label_idx = static_cast<std::size_t>(it - header.begin());

  TabularDataset ds;
  ds.label_name = label_column;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != label_idx) ds.feature_names.push_back(header[c]);
  const std::size_t d = header.size() - 1;

  std::vector<double> feats;
  std::size_t data_row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    ++data_row;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ParseError(path.string() + ": row " + std::to_string(data_row) + " has " +
                           std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(header.size()),
                       data_row, cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string& cell = cells[c];
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size() ||
          !std::isfinite(v))
        throw ParseError(path.string() + ": cannot parse cell at row " + std::to_string(data_row) +
                             ", column '" + header[c] + "' (" + std::to_string(c + 1) + "): '" +
                             cell + "'",
                         data_row, c + 1);
      if (c == label_idx)
        ds.labels.push_back(v);
      else
        feats.push_back(v);
    }
  }
  ds.features = Matrix(ds.labels.size(), d, std::move(feats));
  return ds;
}

void write_csv(const TabularDataset& ds, const std::filesystem::path& path,
               const std::string& comment) {
  ds.validate();
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write " + path.string());
  if (!comment.empty()) out << "# " << comment << '\n';
  for (std::size_t c = 0; c < ds.dim(); ++c)
    out << (c < ds.feature_names.size() ? ds.feature_names[c] : "x" + std::to_string(c + 1))
        << ',';
  out << ds.label_name << '\n';
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    for (double v : ds.features.row(r)) out << format_double(v) << ',';
    out << format_double(ds.labels[r]) << '\n';
  }
}

std::vector<bool> NormalizationSpec::feature_degenerate() const {
  std::vector<bool> out(feature_min.size());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = feature_max[c] == feature_min[c];
  return out;
}

NormalizationSpec fit_normalizer(const TabularDataset& ds) {
  ds.validate();
  if (ds.rows() == 0) throw ContractError("cannot fit a normalizer on an empty dataset");
  NormalizationSpec s;
  s.feature_min.assign(ds.dim(), INFINITY);
  s.feature_max.assign(ds.dim(), -INFINITY);
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    auto row = ds.features.row(r);
    for (std::size_t c = 0; c < ds.dim(); ++c) {
      s.feature_min[c] = std::min(s.feature_min[c], row[c]);
      s.feature_max[c] = std::max(s.feature_max[c], row[c]);
    }
  }
  const auto [lo, hi] = std::minmax_element(ds.labels.begin(), ds.labels.end());
  s.label_min = *lo;
  s.label_max = *hi;
  return s;
}

namespace {

double scale_to_unit(double v, double lo, double hi) {
  return hi == lo ? 0.5 : (v - lo) / (hi - lo);
}

double scale_from_unit(double v, double lo, double hi) {
  return hi == lo ? lo : lo + v * (hi - lo);
}

void check_spec(const TabularDataset& ds, const NormalizationSpec& spec) {
  ds.validate();
  if (spec.feature_min.size() != ds.dim() || spec.feature_max.size() != ds.dim())
    throw ShapeError("normalization spec has " + std::to_string(spec.feature_min.size()) +
                     " feature columns, dataset has " + std::to_string(ds.dim()));
}

}  // namespace

double apply_label(double y, const NormalizationSpec& spec) {
  return scale_to_unit(y, spec.label_min, spec.label_max);
}

double invert_label(double y, const NormalizationSpec& spec) {
  return scale_from_unit(y, spec.label_min, spec.label_max);
}

TabularDataset apply(const TabularDataset& ds, const NormalizationSpec& spec) {
  check_spec(ds, spec);
  TabularDataset out = ds;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.features.row(r);
    for (std::size_t c = 0; c < out.dim(); ++c)
      row[c] = scale_to_unit(row[c], spec.feature_min[c], spec.feature_max[c]);
    out.labels[r] = apply_label(out.labels[r], spec);
  }
  return out;
}

TabularDataset invert(const TabularDataset& ds, const NormalizationSpec& spec) {
  check_spec(ds, spec);
  TabularDataset out = ds;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.features.row(r);
    for (std::size_t c = 0; c < out.dim(); ++c)
      row[c] = scale_from_unit(row[c], spec.feature_min[c], spec.feature_max[c]);
    out.labels[r] = invert_label(out.labels[r], spec);
  }
  return out;
}

SplitIndices split_indices(std::size_t rows, const SplitSpec& spec) {
  if (spec.train + spec.test > rows)
    throw BudgetError("split asks for " + std::to_string(spec.train) + " train + " +
                      std::to_string(spec.test) + " test rows but dataset has " +
                      std::to_string(rows));
  std::vector<std::size_t> perm(rows);
  std::iota(perm.begin(), perm.end(), 0);
  core::SeededRng rng(spec.seed);
  for (std::size_t i = rows; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  SplitIndices s;
  s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(spec.train));
  s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(spec.train),
                perm.begin() + static_cast<std::ptrdiff_t>(spec.train + spec.test));
  s.rest.assign(perm.begin() + static_cast<std::ptrdiff_t>(spec.train + spec.test), perm.end());
  return s;
}

std::pair<TabularDataset, TabularDataset> split(const TabularDataset& ds, const SplitSpec& spec) {
  ds.validate();
  const auto idx = split_indices(ds.rows(), spec);
  return {ds.subset(idx.train), ds.subset(idx.test)};
}

TabularDataset concat(const TabularDataset& real, const TabularDataset& generated) {
  real.validate();
  generated.validate();
  if (generated.rows() == 0) return real;
  if (real.rows() == 0) return generated;
  if (real.dim() != generated.dim())
    throw ShapeError("concat: feature dimensions " + std::to_string(real.dim()) + " and " +
                     std::to_string(generated.dim()) + " differ");
  TabularDataset out = real;
  out.features = core::vconcat(real.features, generated.features);
  out.labels.insert(out.labels.end(), generated.labels.begin(), generated.labels.end());
  out.provenance = Provenance::mixed;
  return out;
}

}  // namespace rgan::data
