#include "rgan/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rgan/core/error.hpp"
#include "rgan/core/rng.hpp"
#include "rgan/data/csv.hpp"
#include "rgan/data/synthetic.hpp"

namespace rgan::harness {

std::string DataSource::name() const {
  return csv.empty() ? synthetic : csv.filename().string();
}

ExperimentConfig::ExperimentConfig() {
  regressors.push_back(regress::parse_regressor("kernel-ridge"));
  regressors.push_back(regress::parse_regressor("mlp"));
}

void ExperimentConfig::validate() const {
  if (source.csv.empty()) {
    if (source.synthetic.empty()) throw ConfigError("data: set either csv or synthetic");
    data::synthetic_problem(source.synthetic);
    if (source.noise_sd < 0.0) throw ConfigError("data.noise must be >= 0");
  }
  if (split.train < 2) throw ConfigError("data.train must be >= 2");
  if (split.test < 1) throw ConfigError("data.test must be >= 1");
  if (active_learning && initial_labels != 0 && (initial_labels < 2 || initial_labels > split.train))
    throw ConfigError("active.initial must be 0 (automatic) or within [2, data.train]");
  gan.validate();
  if (candidates < 1) throw ConfigError("generate.candidates must be >= 1");
  kernel.validate();
  if (folds < 2) throw ConfigError("quality.folds must be >= 2");
  if (batch_selection && generated_rows > 0 && (generated_rows < folds || split.train < folds))
    throw ConfigError("quality.folds exceeds the rows available for the diversity score");
  if (regressors.empty()) throw ConfigError("regress.models must list at least one model");
  for (const auto& r : regressors) r.validate();
  if (amounts.empty()) throw ConfigError("sweep.amounts must not be empty");
  for (const auto& p : hyper_parameters)
    if (p != "alpha" && p != "beta" && p != "gamma")
      throw ConfigError("sweep.parameters: unknown parameter '" + p + "' (expected alpha, beta, gamma)");
  for (double v : hyper_values)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("sweep.values must be finite and >= 0");
  if (workers < 1) throw ConfigError("workers must be >= 1");
}

ConfigMap parse_ini(const std::string& text) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string{};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": missing key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (!out.emplace(full, trim(line.substr(eq + 1))).second)
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + full + "'");
  }
  return out;
}

namespace {

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return x;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  return static_cast<std::size_t>(to_u64(key, v));
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(x))
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "off" || v == "no" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<std::string> to_list(const std::string& v) {
  std::vector<std::string> out;
  for (auto& s : data::split_csv_line(v))
    if (!s.empty()) out.push_back(s);
  return out;
}

std::string from_bool(bool b) { return b ? "true" : "false"; }

template <typename T, typename F>
std::string join(const std::vector<T>& v, F f) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + f(v[i]);
  return s;
}

quality::KernelSpec to_kernel(const std::string& key, const std::string& v) {
  if (v == "median") return quality::KernelSpec::median();
  const double sigma = to_double(key, v);
  if (sigma <= 0.0) throw ConfigError(key + ": bandwidth must be > 0 or 'median'");
  return quality::KernelSpec::fixed(sigma);
}

}  // namespace

ExperimentConfig config_from_map(const ConfigMap& map) {
  ExperimentConfig c;
  regress::RegressorSpec reg_defaults;
  std::vector<std::string> models;
  bool models_set = false;

  for (const auto& [key, v] : map) {
    if (key == "seed") c.seed = to_u64(key, v);
    else if (key == "arm") c.arm = to_u64(key, v);
    else if (key == "out") c.out_dir = v;
    else if (key == "workers") c.workers = to_size(key, v);
    else if (key == "data.csv") c.source.csv = v;
    else if (key == "data.label") c.source.label = v;
    else if (key == "data.synthetic") c.source.synthetic = v;
    else if (key == "data.rows") c.source.synthetic_rows = to_size(key, v);
    else if (key == "data.noise") c.source.noise_sd = to_double(key, v);
    else if (key == "data.train") c.split.train = to_size(key, v);
    else if (key == "data.test") c.split.test = to_size(key, v);
    else if (key == "active.enabled") c.active_learning = to_bool(key, v);
    else if (key == "active.initial") c.initial_labels = to_size(key, v);
    else if (key == "gan.noise_dim") c.gan.noise_dim = to_size(key, v);
    else if (key == "gan.n_critic") c.gan.n_critic = to_size(key, v);
    else if (key == "gan.gp_weight" || key == "gan.beta") c.gan.gp_weight = to_double(key, v);
    else if (key == "gan.generator_regression_weight" || key == "gan.alpha")
      c.gan.generator_regression_weight = to_double(key, v);
    else if (key == "gan.critic_regression_weight" || key == "gan.gamma")
      c.gan.critic_regression_weight = to_double(key, v);
    else if (key == "gan.learning_rate") c.gan.learning_rate = to_double(key, v);
    else if (key == "gan.batch") c.gan.batch = to_size(key, v);
    else if (key == "gan.iterations") c.gan.iterations = to_size(key, v);
    else if (key == "gan.share_trunk") c.gan.share_trunk = to_bool(key, v);
    else if (key == "gan.generator_regression") c.gan.generator_regression = to_bool(key, v);
    else if (key == "gan.critic_regression") c.gan.critic_regression = to_bool(key, v);
    else if (key == "gan.pretrain_epochs") c.gan.pretrain_epochs = to_size(key, v);
    else if (key == "gan.pretrain_learning_rate") c.gan.pretrain_learning_rate = to_double(key, v);
    else if (key == "gan.slope") c.gan.slope = to_double(key, v);
    else if (key == "generate.candidates") c.candidates = to_size(key, v);
    else if (key == "generate.rows") c.generated_rows = to_size(key, v);
    else if (key == "quality.bandwidth") c.kernel = to_kernel(key, v);
    else if (key == "quality.folds") c.folds = to_size(key, v);
    else if (key == "quality.selection") c.batch_selection = to_bool(key, v);
    else if (key == "regress.models") { models = to_list(v); models_set = true; }
    else if (key == "regress.ridge") reg_defaults.kernel_ridge.ridge = to_double(key, v);
    else if (key == "regress.bandwidth") {
      const auto k = to_kernel(key, v);
      reg_defaults.kernel_ridge.bandwidth = k.median_heuristic ? 0.0 : k.sigma;
    }
    else if (key == "regress.mlp_hidden") {
      reg_defaults.mlp.hidden.clear();
      for (const auto& s : to_list(v)) reg_defaults.mlp.hidden.push_back(to_size(key, s));
    }
    else if (key == "regress.mlp_epochs") reg_defaults.mlp.epochs = to_size(key, v);
    else if (key == "regress.mlp_learning_rate") reg_defaults.mlp.learning_rate = to_double(key, v);
    else if (key == "regress.mlp_batch") reg_defaults.mlp.batch = to_size(key, v);
    else if (key == "regress.original_units") c.original_units = to_bool(key, v);
    else if (key == "sweep.amounts") {
      c.amounts.clear();
      for (const auto& s : to_list(v)) c.amounts.push_back(to_size(key, s));
    }
    else if (key == "sweep.parameters") c.hyper_parameters = to_list(v);
    else if (key == "sweep.values") {
      c.hyper_values.clear();
      for (const auto& s : to_list(v)) c.hyper_values.push_back(to_double(key, s));
    }
    else throw ConfigError("unknown config key '" + key + "'");
  }
  if (map.contains("data.csv") && map.contains("data.synthetic"))
    throw ConfigError("data: csv and synthetic are mutually exclusive");
  if (!c.source.csv.empty()) c.source.synthetic.clear();

  if (!models_set) models = {"kernel-ridge", "mlp"};
  c.regressors.clear();
  for (const auto& id : models) {
    auto spec = regress::parse_regressor(id);
    spec.kernel_ridge = reg_defaults.kernel_ridge;
    spec.mlp = reg_defaults.mlp;
    c.regressors.push_back(spec);
  }
  c.validate();
  return c;
}

ConfigMap config_to_map(const ExperimentConfig& c) {
  using data::format_double;
  auto num = [](std::size_t v) { return std::to_string(v); };
  ConfigMap m;
  m["seed"] = std::to_string(c.seed);
  m["arm"] = std::to_string(c.arm);
  m["out"] = c.out_dir.string();
  m["workers"] = num(c.workers);
  if (!c.source.csv.empty()) {
    m["data.csv"] = c.source.csv.string();
    m["data.label"] = c.source.label;
  } else {
    m["data.synthetic"] = c.source.synthetic;
    m["data.rows"] = num(c.source.synthetic_rows);
    m["data.noise"] = format_double(c.source.noise_sd);
  }
  m["data.train"] = num(c.split.train);
  m["data.test"] = num(c.split.test);
  m["active.enabled"] = from_bool(c.active_learning);
  m["active.initial"] = num(c.initial_labels);
  const auto& g = c.gan;
  m["gan.noise_dim"] = num(g.noise_dim);
  m["gan.n_critic"] = num(g.n_critic);
  m["gan.gp_weight"] = format_double(g.gp_weight);
  m["gan.generator_regression_weight"] = format_double(g.generator_regression_weight);
  m["gan.critic_regression_weight"] = format_double(g.critic_regression_weight);
  m["gan.learning_rate"] = format_double(g.learning_rate);
  m["gan.batch"] = num(g.batch);
  m["gan.iterations"] = num(g.iterations);
  m["gan.share_trunk"] = from_bool(g.share_trunk);
  m["gan.generator_regression"] = from_bool(g.generator_regression);
  m["gan.critic_regression"] = from_bool(g.critic_regression);
  m["gan.pretrain_epochs"] = num(g.pretrain_epochs);
  m["gan.pretrain_learning_rate"] = format_double(g.pretrain_learning_rate);
  m["gan.slope"] = format_double(g.slope);
  m["generate.candidates"] = num(c.candidates);
  m["generate.rows"] = num(c.generated_rows);
  m["quality.bandwidth"] = c.kernel.median_heuristic ? "median" : format_double(c.kernel.sigma);
  m["quality.folds"] = num(c.folds);
  m["quality.selection"] = from_bool(c.batch_selection);
  m["regress.models"] = join(c.regressors, [](const regress::RegressorSpec& r) { return r.id(); });
  // Model settings are shared across the list; the first entry carries them.
  const regress::RegressorSpec r = c.regressors.empty() ? regress::RegressorSpec{} : c.regressors.front();
  m["regress.ridge"] = format_double(r.kernel_ridge.ridge);
  m["regress.bandwidth"] = r.kernel_ridge.bandwidth > 0.0 ? format_double(r.kernel_ridge.bandwidth) : "median";
  m["regress.mlp_hidden"] = join(r.mlp.hidden, [](std::size_t v) { return std::to_string(v); });
  m["regress.mlp_epochs"] = num(r.mlp.epochs);
  m["regress.mlp_learning_rate"] = format_double(r.mlp.learning_rate);
  m["regress.mlp_batch"] = num(r.mlp.batch);
  m["regress.original_units"] = from_bool(c.original_units);
  m["sweep.amounts"] = join(c.amounts, [](std::size_t v) { return std::to_string(v); });
  m["sweep.parameters"] = join(c.hyper_parameters, [](const std::string& s) { return s; });
  m["sweep.values"] = join(c.hyper_values, [](double v) { return format_double(v); });
  return m;
}

std::string to_ini(const ExperimentConfig& config) {
  const auto m = config_to_map(config);
  std::string top, body, section;
  for (const auto& [key, v] : m) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
      top += key + " = " + v + "\n";
      continue;
    }
    const std::string s = key.substr(0, dot);
    if (s != section) {
      body += "\n[" + s + "]\n";
      section = s;
    }
    body += key.substr(dot + 1) + " = " + v + "\n";
  }
  return top + body;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos || text[first] != '{') return config_from_map(parse_ini(text));

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": invalid manifest JSON: " + e.what());
  }
  if (!j.contains("config") || !j["config"].is_object())
    throw ConfigError(path.string() + ": manifest has no config object");
  ConfigMap m;
  for (const auto& [section, body] : j["config"].items()) {
    if (!body.is_object()) {
      m[section] = body.is_string() ? body.get<std::string>() : body.dump();
      continue;
    }
    for (const auto& [key, v] : body.items())
      m[section + "." + key] = v.is_string() ? v.get<std::string>() : v.dump();
  }
  return config_from_map(m);
}

DerivedSeeds derive_seeds(std::uint64_t master, std::uint64_t arm) {
  using core::derive_seed;
  auto per_arm = [&](std::uint64_t stream) {
    return arm == 0 ? derive_seed(master, stream) : derive_seed(derive_seed(master, stream), arm);
  };
  return {derive_seed(master, 11), derive_seed(master, 12), derive_seed(master, 13), per_arm(14),
          per_arm(15),             derive_seed(master, 16), derive_seed(master, 17)};
}

}  // namespace rgan::harness
