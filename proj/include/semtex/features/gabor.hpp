#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "semtex/core/types.hpp"

namespace semtex::features {

/// Reflect (reflect-101) is the default. Wrap treats the image as one tile
/// of a periodic texture, which makes features exactly shift-invariant for
/// periodic inputs whose period divides the image size.
enum class BorderMode { Reflect, Wrap };

struct GaborBankConfig {
  int scales = 4;
  int orientations = 6;
  double f_lo = 0.05;  // cycles/pixel
  double f_hi = 0.4;
  int kernel_size = 31;
  BorderMode border = BorderMode::Reflect;
};

/// One complex Gabor kernel. The undamped kernel is separable,
/// K(u, v) = row[u] * col[v] / norm, and the stored kernel is that minus its
/// mean (dc), so the DC response is zero.
struct GaborFilter {
  int scale = 0;
  int orientation = 0;
  double frequency = 0.0;
  double theta = 0.0;
  double sigma = 0.0;
  std::vector<std::complex<double>> row;  // along x, offsets -r..r
  std::vector<std::complex<double>> col;  // along y, offsets -r..r
  double norm = 1.0;
  std::complex<double> dc{0.0, 0.0};
};

class GaborBank {
 public:
  /// Center frequencies geometrically spaced over [f_lo, f_hi]; orientations
  /// k*pi/orientations. Throws InvalidInput unless scales*orientations == 24
  /// and 0 < f_lo < f_hi <= 0.5.
  static GaborBank build(const GaborBankConfig& config = {});

  const std::vector<GaborFilter>& filters() const { return filters_; }
  const GaborBankConfig& config() const { return config_; }
  int kernel_size() const { return config_.kernel_size; }
  int radius() const { return config_.kernel_size / 2; }
  std::size_t feature_dim() const { return 2 * filters_.size(); }

  /// Index of the filter with the given scale and orientation.
  std::size_t index(int scale, int orientation) const {
    return static_cast<std::size_t>(scale * config_.orientations + orientation);
  }

  /// Full DC-corrected kernel, row-major kernel_size x kernel_size, entry
  /// (v + r) * kernel_size + (u + r) for offsets u (x) and v (y).
  std::vector<std::complex<double>> dense_kernel(std::size_t k) const;

 private:
  GaborBankConfig config_;
  std::vector<GaborFilter> filters_;
};

inline constexpr std::size_t kGaborFeatureDim = 48;

using FeatureVector = std::vector<double>;

/// For each filter: same-size correlation (borders per the bank's mode), complex
/// magnitude, then mean and standard deviation over the image. Layout is
/// [mean_0, std_0, mean_1, std_1, ...].
FeatureVector extract(const TextureImage& img, const GaborBank& bank);

/// Magnitude response map of one filter (row-major, image-sized).
std::vector<double> response_magnitude(const TextureImage& img, const GaborBank& bank,
                                       std::size_t k);

/// Reflect-101 border index (… 2 1 | 0 1 2 … n-1 | n-2 …).
int reflect_index(int i, int n);
int wrap_index(int i, int n);

}  // namespace semtex::features
