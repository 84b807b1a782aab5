// rgan: command-line front end for the augmentation toolkit.
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 numeric divergence,
// 1 anything else.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rgan/core/error.hpp"
#include "rgan/data/csv.hpp"
#include "rgan/gan/checkpoint.hpp"
#include "rgan/harness/config.hpp"
#include "rgan/harness/pipeline.hpp"
#include "rgan/harness/studies.hpp"
#include "rgan/quality/quality.hpp"

namespace fs = std::filesystem;
using namespace rgan;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  std::size_t workers = 0;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "INI config or a manifest.json from an earlier run");
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&c](std::uint64_t s) { c.seed = s; c.seed_set = true; }, "master seed");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--workers", c.workers, "concurrent arms / batch scorers");
  cmd->add_option("--set", c.overrides, "override a config key, e.g. --set gan.iterations=500");
}

harness::ExperimentConfig resolve(const Common& c) {
  harness::ExperimentConfig cfg = c.config.empty() ? harness::ExperimentConfig{} : harness::load_config(c.config);
  if (!c.overrides.empty()) {
    auto map = harness::config_to_map(cfg);
    for (const auto& o : c.overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + o + "'");
      const std::string key = o.substr(0, eq);
      if (key == "data.csv") map.erase("data.synthetic");
      if (key == "data.synthetic") map.erase("data.csv");
      map[key] = o.substr(eq + 1);
    }
    cfg = harness::config_from_map(map);
  }
  if (c.seed_set) cfg.seed = c.seed;
  if (!c.out.empty()) cfg.out_dir = c.out;
  if (c.workers > 0) cfg.workers = c.workers;
  cfg.validate();
  return cfg;
}

void print(const harness::ReportTable& t) {
  for (std::size_t i = 0; i < t.header.size(); ++i) std::cout << (i ? "," : "") << t.header[i];
  std::cout << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) std::cout << (i ? "," : "") << r[i];
    std::cout << '\n';
  }
}

int cmd_select(const Common& c) {
  auto cfg = resolve(c);
  cfg.active_learning = true;
  fs::create_directories(cfg.out_dir);
  harness::RunManifest m;
  m.config = cfg;
  m.seeds = harness::derive_seeds(cfg.seed, cfg.arm);
  const auto data = harness::prepare_data(cfg, m);
  harness::write_acquisition_csv(m.acquisition, cfg.out_dir / "acquisition.csv");
  data::write_csv(data::invert(data.train, data.normalization), cfg.out_dir / "train.csv",
                  "provenance=real selected=" + std::to_string(data.train.rows()));
  harness::write_manifest(m, cfg.out_dir / "manifest.json");
  std::cout << "labeled " << data.train.rows() << " rows (" << m.initial_clusters << " initial clusters)\n";
  return 0;
}

int cmd_train(const Common& c) {
  const auto cfg = resolve(c);
  fs::create_directories(cfg.out_dir);
  harness::RunManifest m;
  m.config = cfg;
  m.seeds = harness::derive_seeds(cfg.seed, cfg.arm);
  const auto data = harness::prepare_data(cfg, m);
  if (!m.acquisition.empty()) harness::write_acquisition_csv(m.acquisition, cfg.out_dir / "acquisition.csv");
  try {
    const auto res = harness::train_gan(data, cfg, m);
    gan::save_checkpoint(cfg.out_dir / "model.ckpt", res.model, harness::checkpoint_metadata(cfg, data));
  } catch (const DivergenceError& e) {
    m.error = harness::ErrorRecord{"train", "numeric", e.what()};
    harness::write_trace_csv(m.trace, cfg.out_dir / "trace.csv");
    harness::write_manifest(m, cfg.out_dir / "manifest.json");
    throw;
  }
  harness::write_trace_csv(m.trace, cfg.out_dir / "trace.csv");
  harness::write_manifest(m, cfg.out_dir / "manifest.json");
  std::cout << "trained " << m.trace.records.size() << " iterations; pretrain mse " << m.trace.pretrain_initial_mse
            << " -> " << m.trace.pretrain_final_mse << '\n';
  return 0;
}

int cmd_generate(const Common& c, const std::string& checkpoint, std::size_t rows, const std::string& output) {
  const auto ck = gan::load_checkpoint(checkpoint);
  const auto meta = nlohmann::json::parse(ck.metadata);
  data::NormalizationSpec norm;
  norm.feature_min = meta.at("normalization").at("feature_min").get<std::vector<double>>();
  norm.feature_max = meta.at("normalization").at("feature_max").get<std::vector<double>>();
  norm.label_min = meta.at("normalization").at("label_min").get<double>();
  norm.label_max = meta.at("normalization").at("label_max").get<double>();

  auto ds = gan::generate(ck.model, rows, c.seed);
  ds.feature_names = meta.at("feature_names").get<std::vector<std::string>>();
  ds.label_name = meta.at("label_name").get<std::string>();
  fs::path path = output;
  if (path.empty()) {
    const fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
    fs::create_directories(dir);
    path = dir / "generated.csv";
  }
  data::write_csv(data::invert(ds, norm), path, "provenance=generated seed=" + std::to_string(c.seed));
  std::cout << "wrote " << rows << " rows to " << path.string() << '\n';
  return 0;
}

int cmd_score(const Common& c, const std::string& real_path, const std::vector<std::string>& batch_paths,
              const std::string& label) {
  auto cfg = c.config.empty() && c.overrides.empty() ? harness::ExperimentConfig{} : resolve(c);
  if (c.workers > 0) cfg.workers = c.workers;
  const fs::path out = c.out.empty() ? cfg.out_dir : fs::path(c.out);
  const auto real_raw = data::load_csv(real_path, label);
  const auto norm = data::fit_normalizer(real_raw);
  const auto real = data::apply(real_raw, norm);
  std::vector<data::TabularDataset> batches;
  for (const auto& p : batch_paths) batches.push_back(data::apply(data::load_csv(p, label), norm));
  quality::QualitySettings qs{cfg.kernel, cfg.folds, c.seed_set ? c.seed : harness::derive_seeds(cfg.seed).quality,
                              cfg.workers};
  const auto sel = quality::select_best_batch(real, batches, qs);
  fs::create_directories(out);
  quality::write_quality_csv(sel, out / "quality.csv");
  std::cout << "selected batch " << sel.index << " (" << batch_paths[sel.index] << ")\n";
  return 0;
}

int exit_code(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::data: return 3;
    case ErrorCategory::numeric: return 4;
    case ErrorCategory::contract: return 1;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regression-aware GAN data augmentation for small tabular datasets"};
  app.require_subcommand(1);
  Common common;

  auto* select = app.add_subcommand("select", "label training rows by active learning");
  auto* train = app.add_subcommand("train", "train the GAN and write a checkpoint");
  auto* generate = app.add_subcommand("generate", "sample rows from a checkpoint");
  auto* score = app.add_subcommand("score", "score candidate batches against real data");
  auto* pipeline = app.add_subcommand("pipeline", "selection, training, batch choice and downstream evaluation");
  auto* ablate = app.add_subcommand("ablate", "five-variant ablation study");
  auto* amount = app.add_subcommand("sweep-amount", "downstream error against generated-row count");
  auto* hyper = app.add_subcommand("sweep-hyper", "one-at-a-time loss-weight sweep");
  auto* timing = app.add_subcommand("time", "GAN wall-clock, plain WGAN-GP against the full model");
  for (auto* cmd : {select, train, generate, score, pipeline, ablate, amount, hyper, timing}) add_common(cmd, common);

  std::string checkpoint, output;
  std::size_t rows = 500;
  generate->add_option("--checkpoint", checkpoint, "model.ckpt written by train or pipeline")->required();
  generate->add_option("--rows", rows, "rows to generate");
  generate->add_option("--output", output, "CSV path (default <out>/generated.csv)");

  std::string real_path, label = "y";
  std::vector<std::string> batch_paths;
  score->add_option("--real", real_path, "real data CSV")->required();
  score->add_option("--batch", batch_paths, "candidate batch CSV (repeatable)")->required();
  score->add_option("--label", label, "label column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*select) return cmd_select(common);
    if (*train) return cmd_train(common);
    if (*generate) return cmd_generate(common, checkpoint, rows, output);
    if (*score) return cmd_score(common, real_path, batch_paths, label);
    if (*pipeline) {
      const auto cfg = resolve(common);
      const auto m = harness::run_pipeline(cfg);
      print(harness::downstream_table(m, cfg.source.name()));
      return 0;
    }
    if (*ablate) return print(harness::run_ablation(resolve(common))), 0;
    if (*amount) return print(harness::sweep_amount(resolve(common))), 0;
    if (*hyper) return print(harness::sweep_hyper(resolve(common))), 0;
    if (*timing) return print(harness::time_variants(resolve(common))), 0;
  } catch (const Error& e) {
    std::cerr << "rgan: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "rgan: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
