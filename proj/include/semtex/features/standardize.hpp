#pragma once

#include <span>
#include <vector>

namespace semtex::features {

struct FeatureStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // population; zero marks a constant dimension

  std::size_t dim() const { return mean.size(); }

  /// (x - mean) / std per dimension; constant dimensions are only centered.
  std::vector<double> apply(std::span<const double> x) const;

  static FeatureStats identity(std::size_t dim);
};

struct Standardized {
  std::vector<std::vector<double>> rows;
  FeatureStats stats;
};

/// Zero mean, unit variance per dimension. Throws InvalidInput on empty
/// input, fewer than 2 rows, or ragged rows.
Standardized standardize(const std::vector<std::vector<double>>& rows);

}  // namespace semtex::features
