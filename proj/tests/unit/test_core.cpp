#include <doctest.h>

#include <cmath>

#include "rgan/core/adam.hpp"
#include "rgan/core/error.hpp"
#include "rgan/core/graph.hpp"
#include "rgan/core/mlp.hpp"
#include "rgan/core/rng.hpp"
#include "support/oracles.hpp"

using namespace rgan;
using namespace rgan::core;

namespace {

MlpParams random_mlp(std::vector<std::size_t> sizes, std::uint64_t seed,
                     OutputActivation out = OutputActivation::identity) {
  SeededRng rng(seed);
  auto p = init_mlp(sizes, rng, 0.01, out);
  // Non-zero biases so kinks are not all at the origin.
  for (auto& l : p.layers)
    for (double& b : l.bias.values()) b = 0.2 * rng.normal();
  return p;
}

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  SeededRng rng(seed);
  return gaussian_noise(r, c, rng);
}

// Loss on a 2-8-1 net: mean of squared outputs against targets.
oracle::Evaluation mse_eval(const MlpParams& p, const Matrix& x, const Matrix& y, Graph* keep = nullptr,
                            NodeId* loss_out = nullptr, BoundMlp* bound_out = nullptr) {
  Graph g;
  const auto b = bind(g, p, true);
  const NodeId out = forward(g, b, g.constant(x));
  const NodeId loss = g.mean(g.square(g.sub(out, g.constant(y))));
  oracle::Evaluation e{g.scalar(loss), oracle::kink_pattern(g)};
  if (keep) {
    *keep = std::move(g);
    *loss_out = loss;
    *bound_out = b;
  }
  return e;
}

}  // namespace

TEST_CASE("forward: identity layer applies leaky relu") {
  MlpParams p;
  p.output = OutputActivation::leaky_relu;
  p.layers.push_back({Matrix::from_rows({{1, 0}, {0, 1}}), Matrix(1, 2)});
  const auto out = forward_mlp(p, Matrix::from_rows({{1, -1}}));
  CHECK(out(0, 0) == 1.0);
  CHECK(out(0, 1) == doctest::Approx(-0.01).epsilon(1e-15));
}

TEST_CASE("forward: zero network gives zero") {
  SeededRng rng(3);
  const std::size_t sizes[] = {2, 4, 1};
  auto p = zeros_like(init_mlp(sizes, rng));
  const auto out = forward_mlp(p, random_matrix(5, 2, 9));
  for (double v : out.values()) CHECK(v == 0.0);
}

TEST_CASE("forward: matches a straight-line evaluation") {
  const auto p = random_mlp({2, 8, 1}, 17);
  const auto x = random_matrix(6, 2, 18);
  const auto got = forward_mlp(p, x);
  const auto want = oracle::mlp(p, x);
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got.data()[i] == doctest::Approx(want.data()[i]).epsilon(1e-14));
}

TEST_CASE("forward: recorded replay is bit-exact") {
  const auto p = random_mlp({3, 16, 16, 2}, 5, OutputActivation::sigmoid);
  const auto x = random_matrix(7, 3, 6);
  const auto plain = forward_mlp(p, x);
  const auto rec = forward_mlp(p, x, true);
  REQUIRE(rec.graph.has_value());
  CHECK(rec.output == plain);
  CHECK(rec.graph->value(rec.output_node) == plain);
}

TEST_CASE("forward: width mismatch names the layer") {
  const auto p = random_mlp({3, 4, 1}, 1);
  try {
    forward_mlp(p, Matrix(2, 2));
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("layer 0") != std::string::npos);
  }
}

TEST_CASE("grad: linear map gives the mean outer product") {
  // loss = mean(x W), x is 4x3, W is 3x2 -> dL/dW_ij = sum_r x_ri / (4*2)
  const auto x = random_matrix(4, 3, 2);
  Graph g;
  const NodeId w = g.variable(random_matrix(3, 2, 3));
  const NodeId loss = g.mean(g.matmul(g.constant(x), w));
  const NodeId wrt[] = {w};
  const auto& gw = g.value(g.gradients(loss, wrt).front());
  for (std::size_t i = 0; i < 3; ++i) {
    double s = 0.0;
    for (std::size_t r = 0; r < 4; ++r) s += x(r, i);
    for (std::size_t j = 0; j < 2; ++j) CHECK(gw(i, j) == doctest::Approx(s / 8.0).epsilon(1e-14));
  }
}

TEST_CASE("grad: sum of squared parameters gives twice the parameters") {
  const auto p = random_mlp({2, 8, 1}, 4);
  Graph g;
  const auto b = bind(g, p, true);
  NodeId loss = g.sum(g.square(b.weights[0]));
  for (std::size_t i = 1; i < b.weights.size(); ++i) loss = g.add(loss, g.sum(g.square(b.weights[i])));
  for (NodeId bias : b.biases) loss = g.add(loss, g.sum(g.square(bias)));
  const auto grad = grad_wrt_params(g, loss, b, p);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    for (std::size_t i = 0; i < p.layers[l].weight.size(); ++i)
      CHECK(grad.layers[l].weight.data()[i] == doctest::Approx(2.0 * p.layers[l].weight.data()[i]));
    for (std::size_t i = 0; i < p.layers[l].bias.size(); ++i)
      CHECK(grad.layers[l].bias.data()[i] == doctest::Approx(2.0 * p.layers[l].bias.data()[i]));
  }
}

TEST_CASE("grad: 2-8-1 mse loss matches finite differences") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto p = random_mlp({2, 8, 1}, 100 + seed);
    const auto x = random_matrix(10, 2, 200 + seed);
    const auto y = random_matrix(10, 1, 300 + seed);
    Graph g;
    NodeId loss = 0;
    BoundMlp b;
    mse_eval(p, x, y, &g, &loss, &b);
    const auto analytic = grad_wrt_params(g, loss, b, p);
    const auto rep = oracle::finite_difference({&p}, {analytic}, [&] { return mse_eval(p, x, y); });
    CHECK(rep.checked > 0);
    CHECK(rep.max_rel_error < 1e-4);
  }
}

TEST_CASE("grad: non-scalar loss is a contract error") {
  const auto p = random_mlp({2, 3, 1}, 1);
  Graph g;
  const auto b = bind(g, p, true);
  const NodeId out = forward(g, b, g.constant(Matrix(4, 2, 0.5)));
  CHECK_THROWS_AS(grad_wrt_params(g, out, b, p), ContractError);
}

TEST_CASE("input gradient: linear critic gives its weights") {
  Graph g;
  const NodeId in = g.constant(random_matrix(5, 2, 8));
  const NodeId w = g.variable(Matrix::from_rows({{3}, {4}}));
  const NodeId b = g.variable(Matrix::from_rows({{0.7}}));
  const NodeId d = g.add_bias(g.matmul(in, w), b);
  const NodeId grad = grad_wrt_input_as_node(g, d, in);
  const auto& gv = g.value(grad);
  for (std::size_t r = 0; r < 5; ++r) {
    CHECK(gv(r, 0) == doctest::Approx(3.0));
    CHECK(gv(r, 1) == doctest::Approx(4.0));
  }
  const NodeId norm = g.row_norm(grad);
  for (double v : g.value(norm).values()) CHECK(v == doctest::Approx(5.0));
  const NodeId pen = g.mean(g.square(g.add_scalar(norm, -1.0)));
  CHECK(g.scalar(pen) == doctest::Approx(16.0));
}

TEST_CASE("input gradient: constant critic gives zero and penalty one") {
  Graph g;
  const NodeId in = g.constant(random_matrix(3, 4, 1));
  const NodeId c = g.variable(Matrix::from_rows({{2.5}}));
  // D(x) = 0 * x + c, recorded so the output is per row.
  const NodeId d = g.add_bias(g.matmul(in, g.constant(Matrix(4, 1))), c);
  const NodeId grad = grad_wrt_input_as_node(g, d, in);
  for (double v : g.value(grad).values()) CHECK(v == 0.0);
  const NodeId pen = g.mean(g.square(g.add_scalar(g.row_norm(grad), -1.0)));
  CHECK(g.scalar(pen) == 1.0);
}

TEST_CASE("input gradient: penalty of a 3-16-1 critic matches finite differences") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    auto p = random_mlp({3, 16, 1}, seed);
    const auto x = random_matrix(8, 3, seed + 50);
    auto eval = [&](Graph* keep, BoundMlp* bound, NodeId* loss_out) {
      Graph g;
      const auto b = bind(g, p, true);
      const NodeId in = g.constant(x);
      const NodeId grad = grad_wrt_input_as_node(g, forward(g, b, in), in);
      const NodeId loss = g.mean(g.square(g.add_scalar(g.row_norm(grad), -1.0)));
      oracle::Evaluation e{g.scalar(loss), oracle::kink_pattern(g)};
      if (keep) {
        *keep = std::move(g);
        *bound = b;
        *loss_out = loss;
      }
      return e;
    };
    Graph g;
    BoundMlp b;
    NodeId loss = 0;
    eval(&g, &b, &loss);
    // Value agrees with a hand-written input gradient.
    double ref = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const auto vg = oracle::mlp_value_grad(p, {x.row(r).begin(), x.row(r).end()});
      double n2 = 0.0;
      for (double v : vg.grad) n2 += v * v;
      ref += (std::sqrt(n2) - 1.0) * (std::sqrt(n2) - 1.0);
    }
    CHECK(g.scalar(loss) == doctest::Approx(ref / x.rows()).epsilon(1e-12));
    const auto analytic = grad_wrt_params(g, loss, b, p);
    const auto rep = oracle::finite_difference({&p}, {analytic}, [&] { return eval(nullptr, nullptr, nullptr); });
    CHECK(rep.checked > 0);
    CHECK(rep.max_rel_error < 1e-4);
  }
}

TEST_CASE("input gradient: sigmoid path raises a capability error naming it") {
  const auto p = random_mlp({2, 4, 1}, 3, OutputActivation::sigmoid);
  Graph g;
  const auto b = bind(g, p, true);
  const NodeId in = g.constant(random_matrix(3, 2, 4));
  const NodeId out = forward(g, b, in);
  try {
    grad_wrt_input_as_node(g, out, in);
    FAIL("expected CapabilityError");
  } catch (const CapabilityError& e) {
    CHECK(std::string(e.what()).find("sigmoid") != std::string::npos);
  }
}

namespace {

MlpParams scalar_param(double v) {
  MlpParams p;
  p.layers.push_back({Matrix::from_rows({{v}}), Matrix::from_rows({{0.0}})});
  return p;
}

}  // namespace

TEST_CASE("adam: first step with unit gradient") {
  auto p = scalar_param(0.0);
  AdamState s(p, {1e-3});
  auto g = scalar_param(1.0);
  adam_step(p, g, s);
  // m_hat = 1, v_hat = 1 -> step = lr / (1 + eps)
  CHECK(p.layers[0].weight(0, 0) == doctest::Approx(-1e-3 / (1.0 + 1e-8)).epsilon(1e-12));
  CHECK(p.layers[0].weight(0, 0) == doctest::Approx(-9.99999e-4).epsilon(1e-5));
  CHECK(s.step == 1);
}

TEST_CASE("adam: zero gradient is a fixed point") {
  auto p = random_mlp({3, 5, 2}, 8);
  const auto before = p;
  AdamState s(p, {});
  adam_step(p, zeros_like(p), s);
  adam_step(p, zeros_like(p), s);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    CHECK(p.layers[l].weight == before.layers[l].weight);
    CHECK(p.layers[l].bias == before.layers[l].bias);
    for (double v : s.first_moment.layers[l].weight.values()) CHECK(v == 0.0);
    for (double v : s.second_moment.layers[l].weight.values()) CHECK(v == 0.0);
  }
  CHECK(s.step == 2);
}

TEST_CASE("adam: two identical gradients follow the hand recurrence") {
  const double lr = 1e-2, b1 = 0.9, b2 = 0.999, eps = 1e-8, grad = 0.3;
  auto p = scalar_param(1.0);
  AdamState s(p, {lr, b1, b2, eps});
  const auto g = scalar_param(grad);
  adam_step(p, g, s);
  const double after_one = p.layers[0].weight(0, 0);
  adam_step(p, g, s);
  double m = 0.0, v = 0.0, theta = 1.0, first = 0.0;
  for (int t = 1; t <= 2; ++t) {
    m = b1 * m + (1 - b1) * grad;
    v = b2 * v + (1 - b2) * grad * grad;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    theta -= lr * mh / (std::sqrt(vh) + eps);
    if (t == 1) first = theta;
  }
  CHECK(after_one == doctest::Approx(first).epsilon(1e-14));
  CHECK(p.layers[0].weight(0, 0) == doctest::Approx(theta).epsilon(1e-14));
}

TEST_CASE("adam: non-finite gradient throws with the step") {
  auto p = scalar_param(1.0);
  AdamState s(p, {});
  adam_step(p, scalar_param(0.5), s);
  const double before = p.layers[0].weight(0, 0);
  try {
    adam_step(p, scalar_param(NAN), s);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(e.iteration == 2);
  }
  CHECK(p.layers[0].weight(0, 0) == before);
  CHECK(s.step == 1);
}

TEST_CASE("noise: moments, determinism, seed sensitivity") {
  SeededRng rng(42);
  const auto z = gaussian_noise(10000, 1, rng);
  double mean = 0.0;
  for (double v : z.values()) mean += v;
  mean /= 10000.0;
  double var = 0.0;
  for (double v : z.values()) var += (v - mean) * (v - mean);
  var /= 9999.0;
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(var - 1.0) < 0.05);

  SeededRng a(7), b(7), c(8);
  const auto za = gaussian_noise(20, 3, a);
  CHECK(za == gaussian_noise(20, 3, b));
  CHECK_FALSE(za == gaussian_noise(20, 3, c));
}

TEST_CASE("rng: first outputs match the reference splitmix64 sequence") {
  // Published splitmix64 stream for state 0.
  SeededRng r(0);
  CHECK(r.next_u64() == 0xe220a8397b1dcdafULL);
  CHECK(r.next_u64() == 0x6e789e6aa1b965f4ULL);
  CHECK(r.counter() == 2);
  CHECK(splitmix64(0) == 0);
}
