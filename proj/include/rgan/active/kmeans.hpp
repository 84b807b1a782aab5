#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rgan/core/matrix.hpp"

namespace rgan::active {

using core::Matrix;

struct ClusterResult {
  std::size_t k = 0;
  Matrix centroids;
  std::vector<std::size_t> assignments;
  double mean_silhouette = 0.0;
  std::size_t iterations = 0;
};

/// Lloyd iterations from k-means++ seeding; stops once every centroid moves
/// less than 1e-6 or after 100 iterations. Throws DegeneracyError when k
/// exceeds the number of distinct points.
ClusterResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed);

/// Mean silhouette coefficient; singleton clusters contribute 0.
double mean_silhouette(const Matrix& points, std::span<const std::size_t> assignments, std::size_t k);

/// argmax of mean silhouette over k in [k_lo, k_hi]; ties go to the smaller k.
std::size_t choose_k(const Matrix& points, std::size_t k_lo, std::size_t k_hi, std::uint64_t seed);

/// [2, min(10, floor(M / 2))]
std::pair<std::size_t, std::size_t> default_k_range(std::size_t rows);

/// One index per cluster: the member nearest its centroid, ties to the lowest index.
std::vector<std::size_t> init_select(const Matrix& points, const ClusterResult& clusters);

std::size_t count_distinct_rows(const Matrix& points);

}  // namespace rgan::active
