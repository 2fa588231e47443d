#pragma once

// Lattice noise primitives shared by the renderers. All randomness comes
// from semtex::splitmix64 keyed on (seed, stream, lattice coordinates), so
// results do not depend on any platform RNG.

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "semtex/core/hash.hpp"

namespace semtex::procgen::noise {

inline std::uint64_t lattice_hash(std::uint64_t seed, std::uint64_t stream, std::int64_t x,
                                  std::int64_t y) {
  std::uint64_t h = splitmix64(seed ^ (stream * 0xd1b54a32d192ed03ULL));
  h = splitmix64(h ^ static_cast<std::uint64_t>(x));
  h = splitmix64(h ^ (static_cast<std::uint64_t>(y) * 0x9e3779b97f4a7c15ULL));
  return h;
}

/// Uniform in [0, 1).
inline double lattice_uniform(std::uint64_t seed, std::uint64_t stream, std::int64_t x,
                              std::int64_t y) {
  return static_cast<double>(lattice_hash(seed, stream, x, y) >> 11) * 0x1.0p-53;
}

inline double quintic(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

inline double lerp(double a, double b, double t) { return a + (b - a) * t; }

inline double smoothstep(double e0, double e1, double x) {
  const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

/// Value noise in [0, 1].
inline double value_noise(std::uint64_t seed, double x, double y) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const auto ix = static_cast<std::int64_t>(fx);
  const auto iy = static_cast<std::int64_t>(fy);
  const double u = quintic(x - fx);
  const double v = quintic(y - fy);
  const double a = lattice_uniform(seed, 1, ix, iy);
  const double b = lattice_uniform(seed, 1, ix + 1, iy);
  const double c = lattice_uniform(seed, 1, ix, iy + 1);
  const double d = lattice_uniform(seed, 1, ix + 1, iy + 1);
  return lerp(lerp(a, b, u), lerp(c, d, u), v);
}

// Fixed gradient set, identical on every build.
inline constexpr double kDiag = 0.70710678118654752;
inline constexpr double kGradX[8] = {1.0, -1.0, 0.0, 0.0, kDiag, -kDiag, kDiag, -kDiag};
inline constexpr double kGradY[8] = {0.0, 0.0, 1.0, -1.0, kDiag, kDiag, -kDiag, -kDiag};

inline double grad_dot(std::uint64_t seed, std::int64_t ix, std::int64_t iy, double dx,
                       double dy) {
  const auto g = lattice_hash(seed, 2, ix, iy) & 7u;
  return kGradX[g] * dx + kGradY[g] * dy;
}

/// Perlin gradient noise, roughly in [-1, 1], zero at lattice points.
inline double perlin(std::uint64_t seed, double x, double y) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const auto ix = static_cast<std::int64_t>(fx);
  const auto iy = static_cast<std::int64_t>(fy);
  const double dx = x - fx;
  const double dy = y - fy;
  const double u = quintic(dx);
  const double v = quintic(dy);
  const double n00 = grad_dot(seed, ix, iy, dx, dy);
  const double n10 = grad_dot(seed, ix + 1, iy, dx - 1.0, dy);
  const double n01 = grad_dot(seed, ix, iy + 1, dx, dy - 1.0);
  const double n11 = grad_dot(seed, ix + 1, iy + 1, dx - 1.0, dy - 1.0);
  return std::sqrt(2.0) * lerp(lerp(n00, n10, u), lerp(n01, n11, u), v);
}

/// Fractal sum of `octaves` layers (fractional octave counts blend in the
/// last layer), normalized by total amplitude. `layer` maps (seed, x, y) to
/// a single-octave sample.
template <typename Layer>
double fractal(Layer&& layer, std::uint64_t seed, double x, double y, double octaves,
               double persistence, double lacunarity = 2.0) {
  double sum = 0.0;
  double norm = 0.0;
  double amp = 1.0;
  double freq = 1.0;
  const int full = static_cast<int>(std::floor(octaves));
  const double frac = octaves - full;
  for (int o = 0; o < full + (frac > 0.0 ? 1 : 0); ++o) {
    const double w = (o < full) ? amp : amp * frac;
    sum += w * layer(seed + static_cast<std::uint64_t>(o) * 0x632be59bd9b4e019ULL, x * freq,
                     y * freq);
    norm += w;
    amp *= persistence;
    freq *= lacunarity;
  }
  return norm > 0.0 ? sum / norm : 0.0;
}

struct WorleyResult {
  double f1;
  double f2;
};

/// Distances to the nearest and second-nearest feature point of a jittered
/// unit grid. jitter in [0, 1] scales the displacement from cell centers.
inline WorleyResult worley(std::uint64_t seed, double x, double y, double jitter) {
  const auto cx = static_cast<std::int64_t>(std::floor(x));
  const auto cy = static_cast<std::int64_t>(std::floor(y));
  double f1 = 1e300;
  double f2 = 1e300;
  for (std::int64_t j = cy - 2; j <= cy + 2; ++j) {
    for (std::int64_t i = cx - 2; i <= cx + 2; ++i) {
      const double px = static_cast<double>(i) + 0.5 + jitter * (lattice_uniform(seed, 3, i, j) - 0.5);
      const double py = static_cast<double>(j) + 0.5 + jitter * (lattice_uniform(seed, 4, i, j) - 0.5);
      const double d = std::hypot(px - x, py - y);
      if (d < f1) {
        f2 = f1;
        f1 = d;
      } else if (d < f2) {
        f2 = d;
      }
    }
  }
  return {f1, f2};
}

}  // namespace semtex::procgen::noise
