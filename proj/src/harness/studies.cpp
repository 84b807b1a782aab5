#include "rgan/harness/studies.hpp"

#include <atomic>
#include <cctype>
#include <exception>
#include <thread>

#include "rgan/core/error.hpp"
#include "rgan/data/csv.hpp"
#include "rgan/harness/pipeline.hpp"

namespace rgan::harness {

namespace {

using data::format_double;

std::string slug(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    else if (!out.empty() && out.back() != '-')
      out += '-';
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out;
}

std::filesystem::path subdir(const ExperimentConfig& base, const std::string& study, const std::string& arm) {
  return base.out_dir.empty() ? std::filesystem::path{} : base.out_dir / study / arm;
}

void save(const ReportTable& t, const ExperimentConfig& config, const char* file) {
  if (config.out_dir.empty()) return;
  std::filesystem::create_directories(config.out_dir);
  write_table(t, config.out_dir / file);
}

std::string status_of(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const DivergenceError&) {
    return "diverged";
  } catch (const ConditioningError&) {
    return "ill-conditioned";
  } catch (const std::exception& ex) {
    return std::string("failed: ") + ex.what();
  }
}

}  // namespace

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(workers, 1), std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(run);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<AblationVariant> ablation_variants(const ExperimentConfig& base) {
  std::vector<AblationVariant> v;
  v.push_back({"RGAN-DDE", base});

  auto no_share = base;
  no_share.gan.share_trunk = false;
  v.push_back({"w/o shallow sharing", no_share});

  auto no_dde = base;
  no_dde.active_learning = false;
  no_dde.batch_selection = false;
  v.push_back({"w/o dual data evaluation", no_dde});

  auto no_train = base;
  no_train.active_learning = false;
  v.push_back({"w/o DDE(train)", no_train});

  auto no_gen = base;
  no_gen.batch_selection = false;
  v.push_back({"w/o DDE(generated)", no_gen});

  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i].config.arm = base.arm + i;
    v[i].config.workers = 1;
    v[i].config.out_dir = subdir(base, "ablation", std::to_string(i) + "-" + slug(v[i].name));
  }
  return v;
}

ReportTable run_ablation(const ExperimentConfig& config) {
  config.validate();
  const auto variants = ablation_variants(config);
  std::vector<RunManifest> runs(variants.size());
  parallel_for(variants.size(), config.workers, [&](std::size_t i) { runs[i] = run_pipeline(variants[i].config); });

  ReportTable t;
  t.header = {"variant", "case", "regressor", "mae", "rmse"};
  for (std::size_t i = 0; i < variants.size(); ++i)
    for (const auto& d : runs[i].downstream)
      if (d.condition != "real-only")
        t.rows.push_back({variants[i].name, config.source.name(), d.regressor, format_double(d.metrics.mae),
                          format_double(d.metrics.rmse)});
  save(t, config, "ablation.csv");
  return t;
}

ReportTable sweep_amount(const ExperimentConfig& config) {
  config.validate();
  RunManifest m;
  m.config = config;
  m.seeds = derive_seeds(config.seed, config.arm);
  const auto data = prepare_data(config, m);
  const auto trained = train_gan(data, config, m);

  struct Point {
    std::vector<DownstreamResult> results;
    std::exception_ptr error;
  };
  std::vector<Point> points(config.amounts.size());
  parallel_for(points.size(), config.workers, [&](std::size_t i) {
    const std::size_t amount = config.amounts[i];
    RunManifest pm = m;
    pm.quality.clear();
    try {
      data::TabularDataset chosen;
      if (amount > 0) {
        const auto batches = generate_candidates(trained.model, data, config.candidates, amount, m.seeds.generation);
        auto cfg = config;
        cfg.workers = 1;
        chosen = batches[choose_batch(data, batches, cfg, pm)];
      } else {
        chosen.features = core::Matrix(0, data.train.dim());
      }
      points[i].results = evaluate_downstream(data, chosen, config, m.seeds);
    } catch (...) {
      points[i].error = std::current_exception();
    }
  });

  ReportTable t;
  t.header = {"amount", "regressor", "mae", "rmse", "status"};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::string amount = std::to_string(config.amounts[i]);
    if (points[i].error) {
      const auto status = status_of(points[i].error);
      for (const auto& r : config.regressors) t.rows.push_back({amount, r.label(), "nan", "nan", status});
      continue;
    }
    for (const auto& d : points[i].results)
      if (d.condition != "real-only")
        t.rows.push_back({amount, d.regressor, format_double(d.metrics.mae), format_double(d.metrics.rmse), "ok"});
  }
  save(t, config, "amount.csv");
  return t;
}

ExperimentConfig hyper_point(const ExperimentConfig& base, const std::string& parameter, double value) {
  auto c = base;
  c.gan.generator_regression_weight = parameter == "alpha" ? value : 1.0;
  c.gan.gp_weight = parameter == "beta" ? value : 1.0;
  c.gan.critic_regression_weight = parameter == "gamma" ? value : 1.0;
  if (parameter != "alpha" && parameter != "beta" && parameter != "gamma")
    throw ConfigError("unknown sweep parameter '" + parameter + "'");
  c.workers = 1;
  c.out_dir = subdir(base, "hyper", parameter + "=" + format_double(value));
  return c;
}

ReportTable sweep_hyper(const ExperimentConfig& config) {
  config.validate();
  std::vector<std::pair<std::string, double>> grid;
  for (const auto& p : config.hyper_parameters)
    for (double v : config.hyper_values) grid.emplace_back(p, v);

  std::vector<RunManifest> runs(grid.size());
  std::vector<std::exception_ptr> errors(grid.size());
  parallel_for(grid.size(), config.workers, [&](std::size_t i) {
    try {
      runs[i] = run_pipeline(hyper_point(config, grid[i].first, grid[i].second));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });

  ReportTable t;
  t.header = {"parameter", "value", "regressor", "mae", "rmse", "status"};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& [p, v] = grid[i];
    if (errors[i]) {
      const auto status = status_of(errors[i]);
      for (const auto& r : config.regressors) t.rows.push_back({p, format_double(v), r.label(), "nan", "nan", status});
      continue;
    }
    for (const auto& d : runs[i].downstream)
      if (d.condition != "real-only")
        t.rows.push_back({p, format_double(v), d.regressor, format_double(d.metrics.mae),
                          format_double(d.metrics.rmse), "ok"});
  }
  save(t, config, "hyper.csv");
  return t;
}

ReportTable time_variants(const ExperimentConfig& config) {
  config.validate();
  RunManifest m;
  m.config = config;
  m.seeds = derive_seeds(config.seed, config.arm);
  const auto data = prepare_data(config, m);

  // Sequential on purpose: concurrent arms would share the core being timed.
  auto wgan = config;
  wgan.gan = gan::wgan_gp_mode(config.gan);
  RunManifest wm = m;
  const auto w = train_gan(data, wgan, wm).trace;
  RunManifest fm = m;
  const auto f = train_gan(data, config, fm).trace;

  const double w_total = w.pretrain_seconds + w.train_seconds;
  const double f_total = f.pretrain_seconds + f.train_seconds;
  ReportTable t;
  t.header = {"variant", "iterations", "pretrain_seconds", "train_seconds", "total_seconds", "ratio"};
  auto row = [&](const char* name, const gan::TrainTrace& tr, double total) {
    t.rows.push_back({name, std::to_string(config.gan.iterations), format_double(tr.pretrain_seconds),
                      format_double(tr.train_seconds), format_double(total),
                      format_double(w_total > 0.0 ? total / w_total : 1.0)});
  };
  row("wgan-gp", w, w_total);
  row("rgan-dde", f, f_total);
  save(t, config, "time.csv");
  return t;
}

}  // namespace rgan::harness
