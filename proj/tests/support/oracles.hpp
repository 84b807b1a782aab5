// Independent reference computations for tests. Nothing here goes through
// the graph engine or the library's numeric kernels.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <limits>
#include <numeric>
#include <vector>

#include "rgan/core/graph.hpp"
#include "rgan/core/mlp.hpp"
#include "rgan/active/kmeans.hpp"
#include "rgan/gan/losses.hpp"
#include "rgan/gan/model.hpp"
#include "rgan/regress/regressor.hpp"

namespace oracle {

using rgan::core::Matrix;
using rgan::core::MlpParams;
using rgan::core::OutputActivation;

inline double lrelu(double v, double slope) { return v > 0.0 ? v : v * slope; }
inline double lrelu_d(double v, double slope) { return v > 0.0 ? 1.0 : slope; }

inline double activate(double v, OutputActivation a, double slope) {
  switch (a) {
    case OutputActivation::identity: return v;
    case OutputActivation::leaky_relu: return lrelu(v, slope);
    case OutputActivation::sigmoid: return 1.0 / (1.0 + std::exp(-v));
  }
  return v;
}

/// Straight-line forward pass of one row.
inline std::vector<double> mlp_row(const MlpParams& p, std::vector<double> h) {
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& w = p.layers[l].weight;
    const auto& b = p.layers[l].bias;
    std::vector<double> z(w.cols());
    for (std::size_t j = 0; j < w.cols(); ++j) {
      double s = b(0, j);
      for (std::size_t i = 0; i < w.rows(); ++i) s += h[i] * w(i, j);
      const bool last = l + 1 == p.layers.size();
      z[j] = last ? activate(s, p.output, p.slope) : lrelu(s, p.slope);
    }
    h = std::move(z);
  }
  return h;
}

inline Matrix mlp(const MlpParams& p, const Matrix& in) {
  Matrix out(in.rows(), p.layers.back().weight.cols());
  for (std::size_t r = 0; r < in.rows(); ++r) {
    const auto row = mlp_row(p, {in.row(r).begin(), in.row(r).end()});
    for (std::size_t c = 0; c < row.size(); ++c) out(r, c) = row[c];
  }
  return out;
}

/// Forward pass of a leaky-relu MLP (no sigmoid output) together with the
/// gradient of its single output with respect to the input row.
struct ValueGrad {
  double value;
  std::vector<double> grad;
};

inline ValueGrad mlp_value_grad(const MlpParams& p, const std::vector<double>& x) {
  std::vector<std::vector<double>> pre;
  std::vector<double> h = x;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& w = p.layers[l].weight;
    std::vector<double> z(w.cols());
    for (std::size_t j = 0; j < w.cols(); ++j) {
      double s = p.layers[l].bias(0, j);
      for (std::size_t i = 0; i < w.rows(); ++i) s += h[i] * w(i, j);
      z[j] = s;
    }
    pre.push_back(z);
    const bool last = l + 1 == p.layers.size();
    for (double& v : z) v = (last && p.output == OutputActivation::identity) ? v : lrelu(v, p.slope);
    h = std::move(z);
  }
  // dy/dh_last = 1 for a scalar output; walk back.
  std::vector<double> g(h.size(), 1.0);
  for (std::size_t l = p.layers.size(); l-- > 0;) {
    const bool last = l + 1 == p.layers.size();
    if (!(last && p.output == OutputActivation::identity))
      for (std::size_t j = 0; j < g.size(); ++j) g[j] *= lrelu_d(pre[l][j], p.slope);
    const auto& w = p.layers[l].weight;
    std::vector<double> gi(w.rows(), 0.0);
    for (std::size_t i = 0; i < w.rows(); ++i)
      for (std::size_t j = 0; j < w.cols(); ++j) gi[i] += w(i, j) * g[j];
    g = std::move(gi);
  }
  return {h.size() == 1 ? h[0] : std::numeric_limits<double>::quiet_NaN(), g};
}

/// Critic D([x, y]) = head([trunk(x), y]) and its gradient w.r.t. [x, y],
/// by hand-written back-propagation.
inline ValueGrad critic(const rgan::gan::RganModel& m, const std::vector<double>& joint) {
  const std::size_t d = m.feature_dim;
  const std::vector<double> x(joint.begin(), joint.begin() + static_cast<std::ptrdiff_t>(d));
  // Trunk output is vector-valued: back-propagate per unit.
  const auto h = mlp_row(m.critic_trunk, x);
  std::vector<double> head_in = h;
  head_in.push_back(joint[d]);
  const auto head = mlp_value_grad(m.critic_head, head_in);

  // Jacobian of the one-layer leaky trunk: dh_j/dx_i = w_ij * lrelu'(z_j).
  const auto& w = m.critic_trunk.layers.at(0).weight;
  std::vector<double> gx(d, 0.0);
  for (std::size_t j = 0; j < w.cols(); ++j) {
    double z = m.critic_trunk.layers[0].bias(0, j);
    for (std::size_t i = 0; i < d; ++i) z += x[i] * w(i, j);
    for (std::size_t i = 0; i < d; ++i) gx[i] += head.grad[j] * w(i, j) * lrelu_d(z, m.critic_trunk.slope);
  }
  gx.push_back(head.grad[h.size()]);
  return {head.value, gx};
}

/// Plain WGAN-GP critic objective:
///   mean D(fake) - mean D(real) + beta * mean (|grad D(mu r + (1-mu) f)| - 1)^2
inline double wgan_gp_critic_loss(const rgan::gan::RganModel& m, const Matrix& real, const Matrix& fake,
                                  const std::vector<double>& mu, double beta) {
  const std::size_t n = real.rows();
  double dr = 0.0, df = 0.0, pen = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> r(real.row(i).begin(), real.row(i).end());
    std::vector<double> f(fake.row(i).begin(), fake.row(i).end());
    std::vector<double> mix(r.size());
    for (std::size_t c = 0; c < r.size(); ++c) mix[c] = mu[i] * r[c] + (1.0 - mu[i]) * f[c];
    dr += critic(m, r).value;
    df += critic(m, f).value;
    const auto g = critic(m, mix).grad;
    double norm = 0.0;
    for (double v : g) norm += v * v;
    pen += (std::sqrt(norm) - 1.0) * (std::sqrt(norm) - 1.0);
  }
  return df / n - dr / n + beta * pen / n;
}

/// Signs of every leaky-relu input recorded in a graph. A change between two
/// evaluations means a kink was crossed.
inline std::vector<char> kink_pattern(const rgan::core::Graph& g) {
  using rgan::core::Op;
  std::vector<char> out;
  for (rgan::core::NodeId id = 0; id < g.size(); ++id) {
    int which = -1;
    if (g.op(id) == Op::leaky_relu) which = 0;
    if (g.op(id) == Op::leaky_relu_grad) which = 1;
    if (which < 0) continue;
    for (double v : g.value(g.operand(id, which)).values()) out.push_back(v > 0.0 ? 1 : 0);
  }
  return out;
}

struct Evaluation {
  double loss;
  std::vector<char> kinks;
};

struct FdReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

/// Central differences over every parameter of `params`, compared with
/// `analytic` (same shapes). Coordinates whose ±h perturbation changes the
/// leaky-relu activation pattern are skipped.
inline FdReport finite_difference(std::vector<MlpParams*> params, const std::vector<MlpParams>& analytic,
                                  const std::function<Evaluation()>& eval, double h = 1e-5,
                                  double floor = 1e-6) {
  FdReport rep;
  const auto base = eval().kinks;
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (std::size_t l = 0; l < params[k]->layers.size(); ++l) {
      for (int part = 0; part < 2; ++part) {
        auto& target = part == 0 ? params[k]->layers[l].weight : params[k]->layers[l].bias;
        const auto& ref = part == 0 ? analytic[k].layers[l].weight : analytic[k].layers[l].bias;
        for (std::size_t i = 0; i < target.size(); ++i) {
          const double saved = target.data()[i];
          target.data()[i] = saved + h;
          const auto plus = eval();
          target.data()[i] = saved - h;
          const auto minus = eval();
          target.data()[i] = saved;
          if (plus.kinks != base || minus.kinks != base) {
            ++rep.skipped;
            continue;
          }
          const double fd = (plus.loss - minus.loss) / (2.0 * h);
          const double an = ref.data()[i];
          const double rel = std::abs(fd - an) / std::max({floor, std::abs(fd), std::abs(an)});
          rep.max_rel_error = std::max(rep.max_rel_error, rel);
          ++rep.checked;
        }
      }
    }
  }
  return rep;
}

inline double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double sqdist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

/// Mean silhouette by the textbook double loop; singletons score 0.
inline double silhouette(const Matrix& pts, const std::vector<std::size_t>& assign, std::size_t k) {
  const std::size_t n = pts.rows();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sum[assign[j]] += dist(pts.row(i), pts.row(j));
      ++cnt[assign[j]];
    }
    if (cnt[assign[i]] == 0) continue;
    const double a = sum[assign[i]] / cnt[assign[i]];
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c)
      if (c != assign[i] && cnt[c] > 0) b = std::min(b, sum[c] / cnt[c]);
    total += (b - a) / std::max(a, b);
  }
  return total / n;
}

/// Greedy acquisition written out step by step. The initial set is the
/// pool point nearest each given centroid (lowest index on ties); then each
/// round refits `model`, scores every unlabeled point by d_x d_y / R and
/// labels the first maximiser.
inline std::vector<std::size_t> greedy_acquisition(const Matrix& pool, const std::vector<double>& truth,
                                                   const Matrix& centroids, std::size_t budget,
                                                   const rgan::regress::RegressorFactory& model) {
  const std::size_t n = pool.rows();
  std::vector<std::size_t> labeled;
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    std::size_t best = n;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double d = sqdist(pool.row(i), centroids.row(c));
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    labeled.push_back(best);
  }
  while (labeled.size() < budget) {
    rgan::data::TabularDataset train;
    train.features = Matrix(labeled.size(), pool.cols());
    for (std::size_t m = 0; m < labeled.size(); ++m) {
      for (std::size_t c = 0; c < pool.cols(); ++c) train.features(m, c) = pool(labeled[m], c);
      train.labels.push_back(truth[labeled[m]]);
    }
    const auto f = model(train);
    double best_score = -1.0;
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::find(labeled.begin(), labeled.end(), i) != labeled.end()) continue;
      Matrix xi(1, pool.cols());
      for (std::size_t c = 0; c < pool.cols(); ++c) xi(0, c) = pool(i, c);
      const double pred = f->predict(xi)[0];
      double dx = std::numeric_limits<double>::infinity(), dy = dx, r = 0.0;
      for (std::size_t m : labeled) {
        dx = std::min(dx, dist(pool.row(i), pool.row(m)));
        dy = std::min(dy, std::abs(pred - truth[m]));
      }
      for (std::size_t j = 0; j < n; ++j) r += dist(pool.row(i), pool.row(j));
      const double score = r > 0.0 ? dx * dy / r : 0.0;
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    labeled.push_back(best);
  }
  return labeled;
}

/// Biased MMD^2 with an RBF kernel, three explicit double sums.
inline double mmd2(const Matrix& a, const Matrix& b, double sigma) {
  auto k = [&](std::span<const double> u, std::span<const double> v) {
    return std::exp(-sqdist(u, v) / (2.0 * sigma * sigma));
  };
  double aa = 0.0, bb = 0.0, ab = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.rows(); ++j) aa += k(a.row(i), a.row(j));
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) bb += k(b.row(i), b.row(j));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) ab += k(a.row(i), b.row(j));
  const double n = a.rows(), m = b.rows();
  return aa / (n * n) - 2.0 * ab / (n * m) + bb / (m * m);
}

/// Median of pairwise distances over the rows of a and b pooled.
inline double median_distance(const Matrix& a, const Matrix& b) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < a.rows(); ++i) rows.emplace_back(a.row(i).begin(), a.row(i).end());
  for (std::size_t i = 0; i < b.rows(); ++i) rows.emplace_back(b.row(i).begin(), b.row(i).end());
  std::vector<double> d;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = i + 1; j < rows.size(); ++j) d.push_back(dist(rows[i], rows[j]));
  if (d.empty()) return 1.0;
  std::sort(d.begin(), d.end());
  const double med = d.size() % 2 ? d[d.size() / 2] : 0.5 * (d[d.size() / 2 - 1] + d[d.size() / 2]);
  return med > 0.0 ? med : 1.0;
}

/// Predicts the training-label mean everywhere.
class MeanPredictor final : public rgan::regress::Regressor {
 public:
  explicit MeanPredictor(double m) : m_(m) {}
  std::vector<double> predict(const Matrix& x) const override { return std::vector<double>(x.rows(), m_); }

 private:
  double m_;
};

inline rgan::regress::RegressorFactory mean_factory() {
  return [](const rgan::data::TabularDataset& d) -> std::unique_ptr<rgan::regress::Regressor> {
    double s = 0.0;
    for (double y : d.labels) s += y;
    return std::make_unique<MeanPredictor>(d.labels.empty() ? 0.0 : s / d.labels.size());
  };
}

enum class GanLoss { critic, generator, regressor };

/// Finite-difference check of one training objective against the engine's
/// parameter gradients, over every network that objective updates.
inline FdReport gan_loss_fd(rgan::gan::RganModel model, const Matrix& real, const Matrix& fake,
                            const std::vector<double>& mu, const Matrix& noise, const rgan::gan::GanConfig& cfg,
                            GanLoss which) {
  using namespace rgan::gan;
  auto build = [&]() -> LossGraph {
    switch (which) {
      case GanLoss::critic: return critic_regressor_loss(model, real, fake, mu, cfg, {false, true, true});
      case GanLoss::generator: return generator_loss(model, noise, real, cfg);
      case GanLoss::regressor: return regressor_loss(model, real, fake);
    }
    return {};
  };
  std::vector<MlpParams*> params;
  std::vector<const rgan::core::BoundMlp*> bound;
  auto lg = build();
  switch (which) {
    case GanLoss::critic:
      params = {&model.critic_trunk, &model.critic_head, &model.regressor_head};
      bound = {&lg.bound.critic_trunk, &lg.bound.critic_head, &lg.bound.regressor_head};
      if (!model.shared) {
        params.push_back(&model.regressor_trunk_own);
        bound.push_back(&lg.bound.regressor_trunk);
      }
      break;
    case GanLoss::generator:
      params = {&model.generator};
      bound = {&lg.bound.generator};
      break;
    case GanLoss::regressor:
      params = {&model.regressor_trunk(), &model.regressor_head};
      bound = {&lg.bound.regressor_trunk, &lg.bound.regressor_head};
      break;
  }
  std::vector<const MlpParams*> shapes(params.begin(), params.end());
  const auto analytic = rgan::core::grad_wrt_params(lg.graph, lg.loss, bound, shapes);
  return finite_difference(params, analytic, [&] {
    auto g = build();
    return Evaluation{g.graph.scalar(g.loss), kink_pattern(g.graph)};
  });
}

}  // namespace oracle
