#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rgan/active/selection.hpp"
#include "rgan/data/dataset.hpp"
#include "rgan/gan/config.hpp"
#include "rgan/quality/quality.hpp"
#include "rgan/regress/regressor.hpp"

namespace rgan::harness {

inline constexpr const char* kToolkitVersion = "0.3.1";

/// Either a CSV file or a named synthetic problem.
struct DataSource {
  std::filesystem::path csv;
  std::string label = "y";
  std::string synthetic = "sinusoid-2d";  // used when csv is empty
  std::size_t synthetic_rows = 1000;
  double noise_sd = 0.05;

  std::string name() const;
};

struct ExperimentConfig {
  DataSource source;
  /// With active learning on, every non-test row forms the unlabeled pool and
  /// split.train rows get labeled; otherwise the seeded split's train rows are used.
  data::SplitSpec split;  // split.seed is derived from `seed`, not read from the file
  gan::GanConfig gan;     // likewise gan.seed
  bool active_learning = true;
  std::size_t initial_labels = 0;  // 0 = pick by silhouette; the final count is split.train
  std::size_t candidates = 5;
  std::size_t generated_rows = 500;
  bool batch_selection = true;  // off: the first candidate is taken
  quality::KernelSpec kernel;
  std::size_t folds = 5;
  std::vector<regress::RegressorSpec> regressors;
  bool original_units = false;  // report metrics after inverting the label scaling
  std::vector<std::size_t> amounts = {100, 200, 300, 400, 500, 1000};
  std::vector<std::string> hyper_parameters = {"alpha", "beta", "gamma"};
  std::vector<double> hyper_values = {0.01, 0.1, 1, 10, 100};
  std::filesystem::path out_dir = "rgan-out";
  std::uint64_t seed = 0;
  /// GAN noise stream. 0 for a plain run; ablation arms use 1.. so they share
  /// data splits but not generator noise.
  std::uint64_t arm = 0;
  std::size_t workers = 1;

  ExperimentConfig();
  /// Throws ConfigError naming the offending key.
  void validate() const;
  active::LabelBudget budget() const { return {initial_labels, split.train}; }
};

/// Flat view of a config: "section.key" -> value text, top-level keys bare.
using ConfigMap = std::map<std::string, std::string>;

/// INI-style text:
///
///   # comment
///   seed = 7
///   [gan]
///   iterations = 2000
///
/// Keys before the first section header are top-level. Duplicate keys and
/// lines that are neither comments, headers nor `key = value` are errors.
ConfigMap parse_ini(const std::string& text);

/// Unknown keys and malformed values are errors.
ExperimentConfig config_from_map(const ConfigMap& map);
ConfigMap config_to_map(const ExperimentConfig& config);
std::string to_ini(const ExperimentConfig& config);

/// Reads an INI config, or a run manifest (JSON, detected by a leading '{'),
/// whose "config" object then supplies the settings.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Sub-seeds of a run, each derived from the master seed by a fixed stream id.
struct DerivedSeeds {
  std::uint64_t data = 0;
  std::uint64_t split = 0;
  std::uint64_t selection = 0;
  std::uint64_t gan = 0;
  std::uint64_t generation = 0;  // batch i uses derive_seed(generation, i)
  std::uint64_t quality = 0;
  std::uint64_t downstream = 0;
};
DerivedSeeds derive_seeds(std::uint64_t master, std::uint64_t arm = 0);

}  // namespace rgan::harness
