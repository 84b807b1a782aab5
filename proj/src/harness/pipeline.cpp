#include "rgan/harness/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "rgan/core/error.hpp"
#include "rgan/core/rng.hpp"
#include "rgan/data/csv.hpp"
#include "rgan/data/synthetic.hpp"
#include "rgan/gan/checkpoint.hpp"

namespace rgan::harness {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

std::string category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::data: return "data";
    case ErrorCategory::numeric: return "numeric";
    case ErrorCategory::contract: return "contract";
  }
  return "internal";
}

// JSON has no NaN; initial acquisitions carry NaN scores.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json config_json(const ExperimentConfig& config) {
  json j = json::object();
  for (const auto& [key, v] : config_to_map(config)) {
    const auto dot = key.find('.');
    if (dot == std::string::npos)
      j[key] = v;
    else
      j[key.substr(0, dot)][key.substr(dot + 1)] = v;
  }
  return j;
}

json normalization_json(const data::NormalizationSpec& n) {
  return {{"feature_min", n.feature_min},
          {"feature_max", n.feature_max},
          {"label_min", n.label_min},
          {"label_max", n.label_max}};
}

data::TabularDataset load_source(const ExperimentConfig& config, const DerivedSeeds& seeds) {
  const auto& src = config.source;
  if (!src.csv.empty()) return data::load_csv(src.csv, src.label);
  return data::synth_make(src.synthetic, src.synthetic_rows, src.noise_sd, seeds.data);
}

template <typename F>
auto timed(RunManifest& m, const char* phase, F&& f) {
  const auto t0 = Clock::now();
  struct Record {
    RunManifest& m;
    const char* phase;
    Clock::time_point t0;
    ~Record() { m.phases.push_back({phase, std::chrono::duration<double>(Clock::now() - t0).count()}); }
  } rec{m, phase, t0};
  return f();
}

}  // namespace

json RunManifest::to_json() const {
  json j;
  j["toolkit"] = {{"name", "rgan"}, {"version", kToolkitVersion}};
  j["config"] = config_json(config);
  j["seeds"] = {{"data", seeds.data},       {"split", seeds.split},           {"selection", seeds.selection},
                {"gan", seeds.gan},         {"generation", seeds.generation}, {"quality", seeds.quality},
                {"downstream", seeds.downstream}};
  j["train_rows"] = train_rows;
  j["initial_clusters"] = initial_clusters;
  json acq = json::array();
  for (const auto& s : acquisition)
    acq.push_back({{"step", s.step}, {"index", s.index}, {"d_x", number(s.d_x)}, {"d_y", number(s.d_y)},
                   {"r", number(s.r)}, {"score", number(s.score)}});
  j["acquisition"] = acq;
  j["normalization"] = normalization_json(normalization);

  json records = json::array();
  for (const auto& r : trace.records)
    records.push_back({r.iteration, number(r.critic_loss), number(r.generator_loss), number(r.regression_loss),
                       number(r.wasserstein)});
  j["train"] = {{"pretrain_initial_mse", number(trace.pretrain_initial_mse)},
                {"pretrain_final_mse", number(trace.pretrain_final_mse)},
                {"trace_columns", {"iteration", "critic_loss", "generator_loss", "regression_loss", "wasserstein"}},
                {"trace", records}};

  json q = json::array();
  for (const auto& b : quality)
    q.push_back({{"batch", b.batch}, {"mmd2", b.mmd2}, {"ds", b.ds}, {"mmd_rank", b.mmd_rank},
                 {"ds_rank", b.ds_rank}, {"combined", b.combined}, {"selected", b.selected}});
  j["quality"] = q;
  j["selected_batch"] = selected_batch ? json(*selected_batch) : json(nullptr);

  json ds = json::array();
  for (const auto& d : downstream)
    ds.push_back({{"regressor", d.regressor}, {"condition", d.condition}, {"mae", number(d.metrics.mae)},
                  {"rmse", number(d.metrics.rmse)}});
  j["downstream"] = ds;

  json wall = json::object();
  for (const auto& p : phases) wall[p.name] = p.seconds;
  wall["pretrain"] = trace.pretrain_seconds;
  wall["adversarial"] = trace.train_seconds;
  j["wall_seconds"] = wall;
  j["error"] = error ? json{{"phase", error->phase}, {"category", error->category}, {"message", error->message}}
                     : json(nullptr);
  return j;
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write " + path.string());
  out << manifest.to_json().dump(2) << '\n';
}

PreparedData prepare_data(const ExperimentConfig& config, RunManifest& manifest) {
  const auto& seeds = manifest.seeds;
  PreparedData out;
  out.name = config.source.name();
  const auto all = timed(manifest, "load", [&] { return load_source(config, seeds); });
  const auto idx = data::split_indices(all.rows(), {config.split.train, config.split.test, seeds.split});

  if (config.active_learning) {
    timed(manifest, "select", [&] {
      std::vector<std::size_t> pool_rows = idx.train;
      pool_rows.insert(pool_rows.end(), idx.rest.begin(), idx.rest.end());
      const auto pool = all.subset(pool_rows);
      const core::Matrix scaled = data::apply(pool, data::fit_normalizer(pool)).features;
      const auto result = active::run_active_selection(
          scaled, [&](std::size_t i) { return pool.labels[i]; }, config.budget(), seeds.selection);
      manifest.train_rows.clear();
      for (std::size_t i : result.labeled) manifest.train_rows.push_back(pool_rows[i]);
      manifest.acquisition = result.log;
      for (auto& s : manifest.acquisition) s.index = pool_rows[s.index];
      manifest.initial_clusters = result.clusters.k;
      return 0;
    });
  } else {
    manifest.train_rows = idx.train;
  }

  const auto train_raw = all.subset(manifest.train_rows);
  out.normalization = data::fit_normalizer(train_raw);
  manifest.normalization = out.normalization;
  out.train = data::apply(train_raw, out.normalization);
  out.test = data::apply(all.subset(idx.test), out.normalization);
  return out;
}

gan::TrainResult train_gan(const PreparedData& data, const ExperimentConfig& config, RunManifest& manifest) {
  gan::GanConfig g = config.gan;
  g.seed = manifest.seeds.gan;
  return timed(manifest, "train", [&] {
    try {
      auto res = gan::train(data.train, g);
      manifest.trace = res.trace;
      return res;
    } catch (const gan::TrainingDiverged& e) {
      manifest.trace = e.trace;
      throw;
    }
  });
}

std::vector<data::TabularDataset> generate_candidates(const gan::RganModel& model, const PreparedData& data,
                                                      std::size_t count, std::size_t rows, std::uint64_t seed) {
  std::vector<data::TabularDataset> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto b = gan::generate(model, rows, core::derive_seed(seed, i));
    b.feature_names = data.train.feature_names;
    b.label_name = data.train.label_name;
    out.push_back(std::move(b));
  }
  return out;
}

std::size_t choose_batch(const PreparedData& data, std::span<const data::TabularDataset> batches,
                         const ExperimentConfig& config, RunManifest& manifest) {
  if (batches.empty()) throw ContractError("no candidate batches to choose from");
  if (!config.batch_selection) return 0;
  quality::QualitySettings qs{config.kernel, config.folds, manifest.seeds.quality, config.workers};
  const auto sel = quality::select_best_batch(data.train, batches, qs);
  manifest.quality = sel.batches;
  return sel.index;
}

std::vector<DownstreamResult> evaluate_downstream(const PreparedData& data, const data::TabularDataset& generated,
                                                  const ExperimentConfig& config, const DerivedSeeds& seeds) {
  const auto augmented = data::concat(data.train, generated);
  auto score = [&](const regress::Regressor& model) {
    if (!config.original_units) return regress::evaluate(model, data.test);
    auto pred = model.predict(data.test.features);
    std::vector<double> truth(data.test.labels);
    for (double& p : pred) p = data::invert_label(p, data.normalization);
    for (double& t : truth) t = data::invert_label(t, data.normalization);
    return regress::metrics(pred, truth);
  };
  std::vector<DownstreamResult> out;
  for (auto spec : config.regressors) {
    spec.mlp.seed = seeds.downstream;
    out.push_back({spec.label(), "real-only", score(*regress::fit(spec, data.train))});
    out.push_back({spec.label(), "real+generated", score(*regress::fit(spec, augmented))});
  }
  return out;
}

std::string checkpoint_metadata(const ExperimentConfig& config, const PreparedData& data) {
  json j;
  j["config"] = config_json(config);
  j["normalization"] = normalization_json(data.normalization);
  j["feature_names"] = data.train.feature_names;
  j["label_name"] = data.train.label_name;
  return j.dump();
}

ReportTable downstream_table(const RunManifest& manifest, const std::string& case_name) {
  ReportTable t;
  t.header = {"method", "case", "regressor", "mae", "rmse"};
  for (const auto& d : manifest.downstream)
    t.rows.push_back({d.condition == "real-only" ? "real-only" : "rgan-dde", case_name, d.regressor,
                      data::format_double(d.metrics.mae), data::format_double(d.metrics.rmse)});
  return t;
}

RunManifest run_pipeline(const ExperimentConfig& config) {
  config.validate();
  RunManifest m;
  m.config = config;
  m.seeds = derive_seeds(config.seed, config.arm);
  const auto& out = config.out_dir;
  const bool write = !out.empty();
  if (write) std::filesystem::create_directories(out);

  std::string phase = "prepare";
  try {
    const auto data = prepare_data(config, m);
    if (write && !m.acquisition.empty()) write_acquisition_csv(m.acquisition, out / "acquisition.csv");

    phase = "train";
    gan::TrainResult trained;
    try {
      trained = train_gan(data, config, m);
    } catch (const gan::TrainingDiverged&) {
      if (write) write_trace_csv(m.trace, out / "trace.csv");
      throw;
    }
    if (write) {
      write_trace_csv(m.trace, out / "trace.csv");
      gan::save_checkpoint(out / "model.ckpt", trained.model, checkpoint_metadata(config, data));
    }

    phase = "generate";
    const auto batches = timed(m, "generate", [&] {
      return generate_candidates(trained.model, data, config.candidates, config.generated_rows, m.seeds.generation);
    });

    phase = "quality";
    const std::size_t chosen = timed(m, "quality", [&] { return choose_batch(data, batches, config, m); });
    m.selected_batch = chosen;
    if (write) {
      if (!m.quality.empty()) {
        quality::BatchSelection sel{chosen, m.quality};
        quality::write_quality_csv(sel, out / "quality.csv");
      }
      data::write_csv(data::invert(batches[chosen], data.normalization), out / "generated.csv",
                      "provenance=generated batch=" + std::to_string(chosen));
    }

    phase = "downstream";
    m.downstream = timed(m, "downstream", [&] { return evaluate_downstream(data, batches[chosen], config, m.seeds); });
    if (write) {
      auto table = downstream_table(m, data.name);
      table.comment = std::string("metrics in ") + (config.original_units ? "original" : "normalized") +
                      " label units; kernel-ridge stands in for SVR";
      write_table(table, out / "report.csv");
      write_manifest(m, out / "manifest.json");
    }
    return m;
  } catch (const Error& e) {
    // Timed sub-phases of prepare (load, select) log themselves while unwinding.
    if (phase == "prepare" && !m.phases.empty()) phase = m.phases.back().name;
    m.error = ErrorRecord{phase, category_name(e.category()), e.what()};
    if (write) write_manifest(m, out / "manifest.json");
    throw;
  } catch (const std::exception& e) {
    m.error = ErrorRecord{phase, "internal", e.what()};
    if (write) write_manifest(m, out / "manifest.json");
    throw;
  }
}

}  // namespace rgan::harness
