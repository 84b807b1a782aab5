#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "rgan/core/adam.hpp"
#include "rgan/core/error.hpp"
#include "rgan/core/rng.hpp"
#include "rgan/data/synthetic.hpp"
#include "rgan/gan/checkpoint.hpp"
#include "rgan/gan/losses.hpp"
#include "rgan/gan/trainer.hpp"
#include "support/oracles.hpp"

using namespace rgan;
using namespace rgan::gan;
using core::Matrix;
namespace fs = std::filesystem;

namespace {

Matrix uniform(std::size_t r, std::size_t c, std::uint64_t seed) {
  core::SeededRng rng(seed);
  Matrix m(r, c);
  for (double& v : m.values()) v = rng.uniform();
  return m;
}

std::vector<double> mus(std::size_t n, std::uint64_t seed) {
  core::SeededRng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform();
  return v;
}

GanConfig toy_config(std::uint64_t seed) {
  GanConfig c;
  c.seed = seed;
  c.noise_dim = 3;
  return c;
}

// D([x, y]) = 3x + 4y + 100 on 1-D x; the trunk stays in its linear region on [0,1].
RganModel linear_critic_model() {
  RganModel m = init_model(1, toy_config(1), 2, 2);
  m.critic_trunk.layers = {{Matrix::from_rows({{3.0}}), Matrix::from_rows({{100.0}})}};
  m.critic_head.layers = {{Matrix::from_rows({{1.0}, {4.0}}), Matrix::from_rows({{0.0}})}};
  m.regressor_head.layers = {{Matrix::from_rows({{0.0}}), Matrix::from_rows({{0.5}})}};
  return m;
}

double mean_col(const Matrix& m) {
  double s = 0;
  for (double v : m.values()) s += v;
  return s / m.rows();
}

data::TabularDataset sinusoid(std::size_t n, std::uint64_t seed) {
  auto ds = data::synth_make("sinusoid-2d", n, 0.0, seed);
  return data::apply(ds, data::fit_normalizer(ds));
}

}  // namespace

TEST_CASE("critic loss: weights zero reduce to the Wasserstein gap") {
  auto cfg = toy_config(3);
  cfg.gp_weight = 0;
  cfg.critic_regression_weight = 0;
  const auto m = init_model(2, cfg, 6, 4);
  const auto real = uniform(9, 3, 1), fake = uniform(9, 3, 2);
  const auto lg = critic_regressor_loss(m, real, fake, mus(9, 3), cfg);
  const double want = mean_col(critic_scores(m, fake)) - mean_col(critic_scores(m, real));
  CHECK(lg.graph.scalar(lg.loss) == doctest::Approx(want).epsilon(1e-13));
  CHECK(lg.wasserstein == doctest::Approx(-want).epsilon(1e-13));

  const auto same = critic_regressor_loss(m, real, real, mus(9, 4), cfg);
  CHECK(same.graph.scalar(same.loss) == 0.0);
}

TEST_CASE("critic loss: linear critic penalty is (5 - 1)^2 per row") {
  auto cfg = toy_config(1);
  cfg.gp_weight = 0.5;
  cfg.critic_regression_weight = 0;
  const auto m = linear_critic_model();
  const auto real = uniform(6, 2, 5), fake = uniform(6, 2, 6);
  const auto lg = critic_regressor_loss(m, real, fake, mus(6, 7), cfg);
  CHECK(lg.penalty == doctest::Approx(16.0).epsilon(1e-12));
  const double gap = mean_col(critic_scores(m, fake)) - mean_col(critic_scores(m, real));
  CHECK(lg.graph.scalar(lg.loss) == doctest::Approx(gap + 0.5 * 16.0).epsilon(1e-12));
}

TEST_CASE("critic loss: regression term and weight checks") {
  auto cfg = toy_config(2);
  const auto m = init_model(2, cfg, 5, 3);
  const auto real = uniform(7, 3, 8), fake = uniform(7, 3, 9);
  const auto lg = critic_regressor_loss(m, real, fake, mus(7, 1), cfg);
  auto resid = [&](const Matrix& j) {
    const auto p = gan::regress(m, core::slice_cols(j, 0, 2));
    double s = 0;
    for (std::size_t r = 0; r < j.rows(); ++r) s += std::pow(p(r, 0) - j(r, 2), 2);
    return s / j.rows();
  };
  CHECK(lg.regression == doctest::Approx(resid(real) + resid(fake)).epsilon(1e-12));
  cfg.gp_weight = -1;
  CHECK_THROWS_AS(critic_regressor_loss(m, real, fake, mus(7, 1), cfg), ConfigError);
  cfg.gp_weight = 0.5;
  cfg.critic_regression_weight = -0.1;
  CHECK_THROWS_AS(critic_regressor_loss(m, real, fake, mus(7, 1), cfg), ConfigError);
}

TEST_CASE("generator loss: alpha zero and a zero fake residual") {
  auto cfg = toy_config(4);
  cfg.generator_regression_weight = 0;
  auto m = init_model(2, cfg, 6, 4);
  core::SeededRng nrng(5);
  const auto noise = core::gaussian_noise(8, 3, nrng);
  const auto real = uniform(8, 3, 6);
  const auto lg = generator_loss(m, noise, real, cfg);
  CHECK(lg.graph.scalar(lg.loss) == doctest::Approx(-mean_col(critic_scores(m, generate_joint(m, noise)))).epsilon(1e-13));
  cfg.generator_regression_weight = -1;
  CHECK_THROWS_AS(generator_loss(m, noise, real, cfg), ConfigError);

  // Constant generator output (bx, by) and a regressor that predicts sigmoid(by) everywhere.
  auto& last = m.generator.layers.back();
  for (double& w : last.weight.values()) w = 0.0;
  last.bias = Matrix::from_rows({{0.3, -0.2, 0.7}});
  auto& rh = m.regressor_head.layers.back();
  for (double& w : rh.weight.values()) w = 0.0;
  rh.bias(0, 0) = 1.0 / (1.0 + std::exp(-0.7));
  cfg.generator_regression_weight = 1;
  const auto lz = generator_loss(m, noise, real, cfg);
  const auto p = gan::regress(m, core::slice_cols(real, 0, 2));
  double real_resid = 0;
  for (std::size_t r = 0; r < real.rows(); ++r) real_resid += std::pow(p(r, 0) - real(r, 2), 2);
  CHECK(lz.regression == doctest::Approx(real_resid / real.rows()).epsilon(1e-12));
}

TEST_CASE("loss gradients agree with finite differences on toy models") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (bool shared : {true, false}) {
      auto cfg = toy_config(seed);
      cfg.share_trunk = shared;
      const auto m = init_model(2, cfg, 8, 4);
      const auto real = uniform(6, 3, seed + 10), fake = uniform(6, 3, seed + 20);
      core::SeededRng nrng(seed + 30);
      const auto noise = core::gaussian_noise(6, 3, nrng);
      const auto mu = mus(6, seed + 40);
      for (auto which : {oracle::GanLoss::critic, oracle::GanLoss::generator, oracle::GanLoss::regressor}) {
        const auto rep = oracle::gan_loss_fd(m, real, fake, mu, noise, cfg, which);
        CAPTURE(seed);
        CAPTURE(shared);
        CAPTURE(static_cast<int>(which));
        CHECK(rep.checked > 0);
        CHECK(rep.max_rel_error < 1e-4);
      }
    }
  }
}

TEST_CASE("WGAN-GP mode matches an independently written critic objective") {
  auto cfg = wgan_gp_mode(toy_config(9));
  CHECK(cfg.is_wgan_gp());
  for (std::uint64_t t = 0; t < 20; ++t) {
    cfg.seed = t;
    const auto m = init_model(3, cfg, 12, 4);
    const auto real = uniform(10, 4, 100 + t), fake = uniform(10, 4, 200 + t);
    const auto mu = mus(10, 300 + t);
    const auto lg = critic_regressor_loss(m, real, fake, mu, cfg);
    CHECK(std::abs(lg.graph.scalar(lg.loss) - oracle::wgan_gp_critic_loss(m, real, fake, mu, cfg.gp_weight)) < 1e-10);
  }
}

TEST_CASE("updates are isolated between generator and critic") {
  auto cfg = toy_config(5);
  auto m = init_model(2, cfg, 8, 4);
  const auto real = uniform(8, 3, 1), fake = uniform(8, 3, 2);
  const double gen_before = core::checksum(m.generator);
  {
    auto lg = critic_regressor_loss(m, real, fake, mus(8, 3), cfg);
    const core::BoundMlp* b[] = {&lg.bound.critic_trunk, &lg.bound.critic_head, &lg.bound.regressor_head};
    const MlpParams* s[] = {&m.critic_trunk, &m.critic_head, &m.regressor_head};
    auto g = core::grad_wrt_params(lg.graph, lg.loss, b, s);
    core::AdamState a0(m.critic_trunk, {}), a1(m.critic_head, {}), a2(m.regressor_head, {});
    core::adam_step(m.critic_trunk, g[0], a0);
    core::adam_step(m.critic_head, g[1], a1);
    core::adam_step(m.regressor_head, g[2], a2);
    for (auto id : lg.bound.generator.weights) CHECK_FALSE(lg.graph.depends_on_variable(id));
  }
  CHECK(core::checksum(m.generator) == gen_before);

  const double trunk = core::checksum(m.critic_trunk), head = core::checksum(m.critic_head),
               reg = core::checksum(m.regressor_head);
  core::SeededRng nr(4);
  auto lg = generator_loss(m, core::gaussian_noise(8, 3, nr), real, cfg);
  for (auto id : lg.bound.critic_trunk.weights) CHECK_FALSE(lg.graph.depends_on_variable(id));
  for (auto id : lg.bound.regressor_head.weights) CHECK_FALSE(lg.graph.depends_on_variable(id));
  core::AdamState ag(m.generator, {});
  core::adam_step(m.generator, core::grad_wrt_params(lg.graph, lg.loss, lg.bound.generator, m.generator), ag);
  CHECK(core::checksum(m.generator) != gen_before);
  CHECK(core::checksum(m.critic_trunk) == trunk);
  CHECK(core::checksum(m.critic_head) == head);
  CHECK(core::checksum(m.regressor_head) == reg);
}

TEST_CASE("shared trunk: a regression-only step moves the critic's trunk") {
  for (bool shared : {true, false}) {
    auto cfg = toy_config(6);
    cfg.share_trunk = shared;
    auto m = init_model(2, cfg, 8, 4);
    const double before = core::checksum(m.critic_trunk);
    auto lg = regressor_loss(m, uniform(8, 3, 1), uniform(8, 3, 2));
    const core::BoundMlp* b[] = {&lg.bound.regressor_trunk, &lg.bound.regressor_head};
    const MlpParams* s[] = {&m.regressor_trunk(), &m.regressor_head};
    auto g = core::grad_wrt_params(lg.graph, lg.loss, b, s);
    core::AdamState a0(m.regressor_trunk(), {}), a1(m.regressor_head, {});
    core::adam_step(m.regressor_trunk(), g[0], a0);
    core::adam_step(m.regressor_head, g[1], a1);
    if (shared)
      CHECK(core::checksum(m.critic_trunk) != before);
    else
      CHECK(core::checksum(m.critic_trunk) == before);
  }
}

TEST_CASE("unshared trunks are separate parameters") {
  auto cfg = toy_config(7);
  cfg.share_trunk = false;
  auto m = init_model(2, cfg);
  CHECK_FALSE(m.shared);
  CHECK(&m.regressor_trunk() == &m.regressor_trunk_own);
  CHECK(m.regressor_trunk_own.layers.size() == 1);
  m.regressor_trunk_own.layers[0].weight(0, 0) += 1.0;
  CHECK(m.critic_trunk.layers[0].weight(0, 0) != m.regressor_trunk_own.layers[0].weight(0, 0));
  CHECK(critic_step_trainable(cfg).regressor == false);
}

TEST_CASE("pretraining: constant labels, improvement, zero epochs") {
  auto cfg = toy_config(8);
  auto constant = sinusoid(50, 1);
  for (double& y : constant.labels) y = 0.5;
  auto m = init_model(2, cfg);
  CHECK(pretrain_regressor(m, constant, cfg).second < 1e-3);

  const auto ds = sinusoid(50, 2);
  auto m2 = init_model(2, cfg);
  const auto [initial, final_mse] = pretrain_regressor(m2, ds, cfg);
  CHECK(final_mse < initial);

  cfg.pretrain_epochs = 0;
  auto m3 = init_model(2, cfg);
  const double before = core::checksum(m3.critic_trunk) + core::checksum(m3.regressor_head);
  pretrain_regressor(m3, ds, cfg);
  CHECK(core::checksum(m3.critic_trunk) + core::checksum(m3.regressor_head) == before);
}

TEST_CASE("train: zero iterations returns the pretrained model with an empty trace") {
  auto cfg = toy_config(9);
  cfg.iterations = 0;
  cfg.pretrain_epochs = 20;
  const auto ds = sinusoid(30, 3);
  const auto res = train(ds, cfg);
  CHECK(res.trace.records.empty());
  auto m = init_model(2, cfg);
  pretrain_regressor(m, ds, cfg);
  CHECK(res.model.critic_trunk.layers[0].weight == m.critic_trunk.layers[0].weight);
  CHECK(res.model.generator.layers[0].weight == m.generator.layers[0].weight);
  CHECK(res.trace.pretrain_final_mse < res.trace.pretrain_initial_mse);
}

TEST_CASE("train: same seed gives bit-identical traces") {
  auto cfg = toy_config(10);
  cfg.iterations = 15;
  cfg.pretrain_epochs = 5;
  const auto ds = sinusoid(40, 4);
  const auto a = train(ds, cfg), b = train(ds, cfg);
  REQUIRE(a.trace.records.size() == 15);
  for (std::size_t i = 0; i < 15; ++i) {
    CHECK(a.trace.records[i].iteration == i);
    CHECK(a.trace.records[i].critic_loss == b.trace.records[i].critic_loss);
    CHECK(a.trace.records[i].generator_loss == b.trace.records[i].generator_loss);
    CHECK(a.trace.records[i].regression_loss == b.trace.records[i].regression_loss);
    CHECK(a.trace.records[i].wasserstein == b.trace.records[i].wasserstein);
  }
  CHECK(a.model.generator.layers[2].weight == b.model.generator.layers[2].weight);
}

TEST_CASE("generate: size, range, prefix, determinism") {
  auto cfg = toy_config(11);
  cfg.iterations = 5;
  cfg.pretrain_epochs = 2;
  const auto res = train(sinusoid(40, 5), cfg);
  const auto g = generate(res.model, 500, 3);
  CHECK(g.rows() == 500);
  CHECK(g.dim() == 2);
  CHECK(g.provenance == data::Provenance::generated);
  for (double v : g.joint().values()) CHECK((v >= 0.0 && v <= 1.0));
  const auto short_g = generate(res.model, 10, 3);
  for (std::size_t r = 0; r < 10; ++r) CHECK(short_g.labels[r] == g.labels[r]);
  CHECK(generate(res.model, 500, 3).features == g.features);
  CHECK(generate(res.model, 0, 3).rows() == 0);
}

TEST_CASE("checkpoint: round trip and rejection") {
  const auto dir = fs::temp_directory_path() / "rgan_test_gan";
  fs::create_directories(dir);
  for (bool shared : {true, false}) {
    auto cfg = toy_config(12);
    cfg.share_trunk = shared;
    const auto m = init_model(3, cfg);
    const auto path = dir / (shared ? "s.ckpt" : "u.ckpt");
    save_checkpoint(path, m, R"({"k":1})");
    const auto back = load_checkpoint(path, 3, 3);
    CHECK(back.metadata == R"({"k":1})");
    CHECK(back.model.shared == shared);
    CHECK(back.model.generator.layers[1].weight == m.generator.layers[1].weight);
    CHECK(back.model.critic_head.layers[1].bias == m.critic_head.layers[1].bias);
    CHECK(back.model.regressor_trunk().layers[0].weight == m.regressor_trunk().layers[0].weight);
    CHECK(back.model.generator.output == core::OutputActivation::sigmoid);
    core::SeededRng r(1);
    const auto z = core::gaussian_noise(4, 3, r);
    CHECK(generate_joint(back.model, z) == generate_joint(m, z));
    CHECK_THROWS_AS(load_checkpoint(path, 4, std::nullopt), ShapeError);
    CHECK_THROWS_AS(load_checkpoint(path, std::nullopt, 9), ShapeError);
  }
  const auto path = dir / "s.ckpt";
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto write = [&](const std::string& b) {
    std::ofstream(dir / "bad.ckpt", std::ios::binary) << b;
    return dir / "bad.ckpt";
  };
  std::string wrong_version = bytes;
  wrong_version[8] = 2;
  CHECK_THROWS_AS(load_checkpoint(write(wrong_version)), SchemaError);
  std::string wrong_magic = bytes;
  wrong_magic[0] = 'X';
  CHECK_THROWS_AS(load_checkpoint(write(wrong_magic)), SchemaError);
  CHECK_THROWS_AS(load_checkpoint(write(bytes.substr(0, bytes.size() - 9))), SchemaError);
}

TEST_CASE("WGAN-GP mode on a bimodal toy: the Wasserstein estimate shrinks") {
  core::SeededRng rng(31);
  data::TabularDataset ds;
  ds.features = Matrix(200, 1);
  for (std::size_t i = 0; i < 200; ++i) {
    const double x = (i % 2 ? 0.8 : 0.2) + 0.05 * rng.normal();
    ds.features(i, 0) = x;
    ds.labels.push_back(x);
  }
  auto cfg = wgan_gp_mode(GanConfig{});
  cfg.iterations = 2000;
  cfg.seed = 2;
  const auto res = train(ds, cfg);
  auto window = [&](std::size_t from) {
    double s = 0;
    for (std::size_t i = from; i < from + 100; ++i) s += std::abs(res.trace.records[i].wasserstein);
    return s / 100;
  };
  CHECK(window(1900) < window(0));
}
