#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semtex/core/attributes.hpp"

namespace semtex {

/// Raw 43-attribute description; each value is the fraction of annotators
/// (or oracle strength) in [0, 1]. Retrieval and the semantic space work on
/// this form.
class SemanticVector {
 public:
  using Values = std::array<double, kNumAttributes>;

  SemanticVector() = default;
  explicit SemanticVector(const Values& values);

  static SemanticVector from_span(std::span<const double> values);

  double operator[](std::size_t j) const { return values_[j]; }
  const Values& values() const { return values_; }
  double l1_mass() const;

  bool operator==(const SemanticVector&) const = default;

 private:
  Values values_{};
};

/// Simplex-normalized label distribution (nonnegative, unit sum within 1e-9).
/// Length is usually kNumAttributes but toy problems use fewer labels.
class Distribution {
 public:
  static constexpr double kSumTolerance = 1e-9;

  explicit Distribution(std::vector<double> probs);

  static Distribution uniform(std::size_t c);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t j) const { return probs_[j]; }
  const std::vector<double>& values() const { return probs_; }

  bool operator==(const Distribution&) const = default;

 private:
  std::vector<double> probs_;
};

/// Single-channel image, intensities in [0, 1], row-major.
class TextureImage {
 public:
  TextureImage() = default;
  TextureImage(int width, int height, std::vector<double> pixels);
  TextureImage(int width, int height, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  double at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  const std::vector<double>& pixels() const { return pixels_; }

  bool operator==(const TextureImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> pixels_;
};

/// Provenance needed to regenerate a texture. Validity against the model
/// registry is checked by procgen.
struct GenerationTag {
  std::string model_id;
  std::vector<double> params;
  std::uint64_t seed = 0;

  bool operator==(const GenerationTag&) const = default;
};

struct TextureSample {
  std::int64_t id = 0;
  std::string image_path;
  GenerationTag tag;
  SemanticVector semantics;
  std::optional<std::vector<double>> features;

  bool operator==(const TextureSample&) const = default;
};

/// counts[j] / participants. Throws InvalidInput when participants == 0, a
/// count is negative or exceeds participants, or the length is not 43.
SemanticVector normalize_counts(std::span<const int> counts, int participants);

inline constexpr double kDefaultEpsilon = 1e-6;

/// Floors each value at epsilon and renormalizes. An all-zero vector (with
/// epsilon == 0) maps to the uniform distribution.
Distribution to_distribution(const SemanticVector& v, double epsilon = kDefaultEpsilon);
Distribution to_distribution(std::span<const double> v, double epsilon = kDefaultEpsilon);

}  // namespace semtex
