#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rgan/active/selection.hpp"
#include "rgan/gan/trainer.hpp"
#include "rgan/harness/config.hpp"
#include "rgan/harness/report.hpp"
#include "rgan/quality/quality.hpp"

namespace rgan::harness {

struct PhaseTime {
  std::string name;
  double seconds = 0.0;
};

struct DownstreamResult {
  std::string regressor;  // RegressorSpec::label()
  std::string condition;  // "real-only" or "real+generated"
  regress::Metrics metrics;
};

struct ErrorRecord {
  std::string phase;
  std::string category;  // config | data | numeric | contract | internal
  std::string message;
};

/// Everything a run produced. The config echo plus the master seed is
/// enough to repeat the run bit for bit.
struct RunManifest {
  ExperimentConfig config;
  DerivedSeeds seeds;
  std::vector<std::size_t> train_rows;  // dataset rows used as real training data
  std::vector<active::AcquisitionStep> acquisition;
  std::size_t initial_clusters = 0;
  data::NormalizationSpec normalization;
  gan::TrainTrace trace;
  std::vector<quality::BatchQuality> quality;
  std::optional<std::size_t> selected_batch;
  std::vector<DownstreamResult> downstream;
  std::vector<PhaseTime> phases;
  std::optional<ErrorRecord> error;

  nlohmann::json to_json() const;
};

/// Real data after the optional active selection, min-max scaled with a
/// normalizer fitted on the training rows.
struct PreparedData {
  std::string name;
  data::TabularDataset train;
  data::TabularDataset test;
  data::NormalizationSpec normalization;
};

PreparedData prepare_data(const ExperimentConfig& config, RunManifest& manifest);
gan::TrainResult train_gan(const PreparedData& data, const ExperimentConfig& config, RunManifest& manifest);

/// Batch i is generated under derive_seed(seed, i).
std::vector<data::TabularDataset> generate_candidates(const gan::RganModel& model, const PreparedData& data,
                                                      std::size_t count, std::size_t rows, std::uint64_t seed);

/// Scores the candidates (when selection is on) and returns the chosen index.
std::size_t choose_batch(const PreparedData& data, std::span<const data::TabularDataset> batches,
                         const ExperimentConfig& config, RunManifest& manifest);

/// Fits every configured regressor on real-only and on real+generated data.
std::vector<DownstreamResult> evaluate_downstream(const PreparedData& data, const data::TabularDataset& generated,
                                                  const ExperimentConfig& config, const DerivedSeeds& seeds);

/// Selection, training, candidate generation, batch choice, downstream
/// evaluation. With a non-empty out_dir it writes manifest.json, trace.csv,
/// acquisition.csv, quality.csv, report.csv, generated.csv and model.ckpt.
/// A failing phase still writes the manifest (with an error record) before
/// the exception propagates.
RunManifest run_pipeline(const ExperimentConfig& config);

/// method,case,regressor,mae,rmse
ReportTable downstream_table(const RunManifest& manifest, const std::string& case_name);

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

/// Checkpoint metadata: config echo, normalization, column names.
std::string checkpoint_metadata(const ExperimentConfig& config, const PreparedData& data);

}  // namespace rgan::harness
