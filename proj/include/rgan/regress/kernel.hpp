#pragma once

#include <span>

#include "rgan/core/matrix.hpp"

namespace rgan::regress {

double squared_distance(std::span<const double> a, std::span<const double> b);

/// exp(-|a - b|^2 / (2 sigma^2))
double rbf(std::span<const double> a, std::span<const double> b, double sigma);

/// Median of all pairwise Euclidean distances between rows (i < j). Falls
/// back to 1 when fewer than two rows exist or the median is zero.
double median_heuristic(const core::Matrix& rows);

}  // namespace rgan::regress
