#include "semtex/features/standardize.hpp"

#include <cmath>

#include "semtex/core/error.hpp"

namespace semtex::features {

namespace {
constexpr double kConstantDim = 1e-12;
}

std::vector<double> FeatureStats::apply(std::span<const double> x) const {
  if (x.size() != mean.size()) {
    throw InvalidInput("feature dimension " + std::to_string(x.size()) + " does not match stats (" +
                       std::to_string(mean.size()) + ")");
  }
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double centered = x[k] - mean[k];
    out[k] = stddev[k] > kConstantDim ? centered / stddev[k] : centered;
  }
  return out;
}

FeatureStats FeatureStats::identity(std::size_t dim) {
  return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
}

Standardized standardize(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw InvalidInput("cannot standardize an empty feature set");
  if (rows.size() < 2) throw InvalidInput("standardize needs at least 2 samples");
  const std::size_t dim = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != dim) throw InvalidInput("ragged feature rows");
  }
  const double n = static_cast<double>(rows.size());
  FeatureStats stats{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  for (const auto& r : rows)
    for (std::size_t k = 0; k < dim; ++k) stats.mean[k] += r[k];
  for (double& m : stats.mean) m /= n;
  for (const auto& r : rows)
    for (std::size_t k = 0; k < dim; ++k) {
      const double d = r[k] - stats.mean[k];
      stats.stddev[k] += d * d;
    }
  for (double& s : stats.stddev) {
    s = std::sqrt(s / n);
    if (s <= kConstantDim) s = 0.0;
  }

  Standardized out;
  out.rows.reserve(rows.size());
  for (const auto& r : rows) out.rows.push_back(stats.apply(r));
  out.stats = std::move(stats);
  return out;
}

}  // namespace semtex::features
