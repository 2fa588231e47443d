#include "semtex/core/types.hpp"

#include <cmath>
#include <numeric>

#include "semtex/core/error.hpp"

namespace semtex {

namespace {

void check_unit_interval(double v, const char* what, std::size_t index) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw InvalidInput(std::string(what) + " value at index " + std::to_string(index) +
                       " outside [0,1]: " + std::to_string(v));
  }
}

}  // namespace

SemanticVector::SemanticVector(const Values& values) : values_(values) {
  for (std::size_t j = 0; j < values_.size(); ++j) check_unit_interval(values_[j], "semantic", j);
}

SemanticVector SemanticVector::from_span(std::span<const double> values) {
  if (values.size() != kNumAttributes) {
    throw InvalidInput("semantic vector needs " + std::to_string(kNumAttributes) +
                       " values, got " + std::to_string(values.size()));
  }
  Values v{};
  std::copy(values.begin(), values.end(), v.begin());
  return SemanticVector(v);
}

double SemanticVector::l1_mass() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0);
}

Distribution::Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw InvalidInput("distribution must have at least one label");
  double sum = 0.0;
  for (std::size_t j = 0; j < probs_.size(); ++j) {
    if (!(probs_[j] >= 0.0) || !std::isfinite(probs_[j])) {
      throw InvalidInput("distribution entry " + std::to_string(j) + " is negative or non-finite");
    }
    sum += probs_[j];
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw InvalidInput("distribution sums to " + std::to_string(sum) + ", not 1");
  }
}

Distribution Distribution::uniform(std::size_t c) {
  return Distribution(std::vector<double>(c, 1.0 / static_cast<double>(c)));
}

TextureImage::TextureImage(int width, int height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width_ < 0 || height_ < 0 ||
      static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_) != pixels_.size()) {
    throw InvalidInput("image dimensions do not match pixel count");
  }
  for (std::size_t i = 0; i < pixels_.size(); ++i) check_unit_interval(pixels_[i], "pixel", i);
}

TextureImage::TextureImage(int width, int height, double fill)
    : TextureImage(width, height,
                   std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                           static_cast<std::size_t>(std::max(height, 0)),
                                       fill)) {}

SemanticVector normalize_counts(std::span<const int> counts, int participants) {
  if (participants <= 0) throw InvalidInput("participants must be positive");
  if (counts.size() != kNumAttributes) {
    throw InvalidInput("expected " + std::to_string(kNumAttributes) + " counts, got " +
                       std::to_string(counts.size()));
  }
  SemanticVector::Values v{};
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] < 0 || counts[j] > participants) {
      throw InvalidInput("count for '" + std::string(kAttributeNames[j]) + "' is " +
                         std::to_string(counts[j]) + ", outside [0, " +
                         std::to_string(participants) + "]");
    }
    v[j] = static_cast<double>(counts[j]) / static_cast<double>(participants);
  }
  return SemanticVector(v);
}

Distribution to_distribution(std::span<const double> v, double epsilon) {
  if (v.empty()) throw InvalidInput("cannot normalize an empty vector");
  if (!(epsilon >= 0.0)) throw InvalidInput("epsilon must be nonnegative");
  std::vector<double> p(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : p) {
    if (!(x >= 0.0)) throw InvalidInput("cannot normalize a negative value");
    x = std::max(x, epsilon);
    sum += x;
  }
  if (sum <= 0.0) return Distribution::uniform(p.size());
  for (double& x : p) x /= sum;
  return Distribution(std::move(p));
}

Distribution to_distribution(const SemanticVector& v, double epsilon) {
  return to_distribution(std::span<const double>(v.values()), epsilon);
}

}  // namespace semtex
