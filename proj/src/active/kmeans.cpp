#include "rgan/active/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "rgan/core/error.hpp"
#include "rgan/core/rng.hpp"
#include "rgan/regress/kernel.hpp"

namespace rgan::active {

using regress::squared_distance;

std::size_t count_distinct_rows(const Matrix& points) {
  std::set<std::vector<double>> rows;
  for (std::size_t r = 0; r < points.rows(); ++r)
    rows.emplace(points.row(r).begin(), points.row(r).end());
  return rows.size();
}

namespace {

std::size_t nearest(const Matrix& centroids, std::span<const double> p) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(p, centroids.row(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

Matrix plus_plus_seeding(const Matrix& points, std::size_t k, core::SeededRng& rng) {
  const std::size_t n = points.rows();
  Matrix centroids(k, points.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t pick = rng.below(n);
  for (std::size_t c = 0; c < k; ++c) {
    std::copy(points.row(pick).begin(), points.row(pick).end(), centroids.row(c).begin());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points.row(i), centroids.row(c)));
      total += d2[i];
    }
    if (c + 1 == k) break;
    double target = rng.uniform() * total;
    pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      pick = i;
      target -= d2[i];
      if (target <= 0.0) break;
    }
  }
  return centroids;
}

}  // namespace

ClusterResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed) {
  const std::size_t n = points.rows();
  if (k == 0) throw ContractError("kmeans needs k >= 1");
  const std::size_t distinct = count_distinct_rows(points);
  if (k > distinct)
    throw DegeneracyError("kmeans: k = " + std::to_string(k) + " exceeds the " +
                          std::to_string(distinct) + " distinct points");
  core::SeededRng rng(seed);
  ClusterResult res;
  res.k = k;
  res.centroids = plus_plus_seeding(points, k, rng);
  res.assignments.assign(n, 0);

  const std::size_t dim = points.cols();
  for (res.iterations = 0; res.iterations < 100;) {
    for (std::size_t i = 0; i < n; ++i) res.assignments[i] = nearest(res.centroids, points.row(i));
    Matrix next(k, dim);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto dst = next.row(res.assignments[i]);
      auto src = points.row(i);
      for (std::size_t c = 0; c < dim; ++c) dst[c] += src[c];
      ++counts[res.assignments[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Re-seed an empty cluster at the point farthest from its centroid.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = squared_distance(points.row(i), res.centroids.row(res.assignments[i]));
          if (d > far_d) far_d = d, far = i;
        }
        std::copy(points.row(far).begin(), points.row(far).end(), next.row(c).begin());
        continue;
      }
      for (double& v : next.row(c)) v /= static_cast<double>(counts[c]);
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c)
      shift = std::max(shift, std::sqrt(squared_distance(next.row(c), res.centroids.row(c))));
    res.centroids = std::move(next);
    ++res.iterations;
    if (shift < 1e-6) break;
  }
  for (std::size_t i = 0; i < n; ++i) res.assignments[i] = nearest(res.centroids, points.row(i));
  res.mean_silhouette = mean_silhouette(points, res.assignments, k);
  return res;
}

double mean_silhouette(const Matrix& points, std::span<const std::size_t> assignments, std::size_t k) {
  const std::size_t n = points.rows();
  if (n == 0) return 0.0;
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t a : assignments) ++sizes.at(a);
  double total = 0.0;
  std::vector<double> sums(k);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) sums[assignments[j]] += std::sqrt(squared_distance(points.row(i), points.row(j)));
    const std::size_t own = assignments[i];
    if (sizes[own] <= 1) continue;
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c)
      if (c != own && sizes[c] > 0) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
    if (!std::isfinite(b)) continue;
    const double m = std::max(a, b);
    if (m > 0.0) total += (b - a) / m;
  }
  return total / static_cast<double>(n);
}

std::pair<std::size_t, std::size_t> default_k_range(std::size_t rows) {
  return {2, std::min<std::size_t>(10, rows / 2)};
}

std::size_t choose_k(const Matrix& points, std::size_t k_lo, std::size_t k_hi, std::uint64_t seed) {
  if (k_lo > k_hi || k_hi == 0) throw ContractError("choose_k: empty k range");
  const std::size_t distinct = count_distinct_rows(points);
  std::size_t best_k = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = std::max<std::size_t>(k_lo, 1); k <= k_hi && k <= distinct; ++k) {
    const double s = kmeans(points, k, seed).mean_silhouette;
    if (s > best) {
      best = s;
      best_k = k;
    }
  }
  if (best_k == 0) throw ContractError("choose_k: no feasible k in range");
  return best_k;
}

std::vector<std::size_t> init_select(const Matrix& points, const ClusterResult& clusters) {
  std::vector<std::size_t> picks;
  for (std::size_t c = 0; c < clusters.k; ++c) {
    std::size_t best = points.rows();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.rows(); ++i) {
      if (clusters.assignments[i] != c) continue;
      const double d = squared_distance(points.row(i), clusters.centroids.row(c));
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    if (best < points.rows()) picks.push_back(best);
  }
  return picks;
}

}  // namespace rgan::active
