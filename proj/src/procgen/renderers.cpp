#include "renderers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "noise.hpp"

namespace semtex::procgen::detail {

namespace {

using noise::fractal;
using noise::lattice_uniform;
using noise::smoothstep;

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Reference span for density-style parameters, independent of render size.
constexpr double kReferenceSpan = 128.0;

// Per-image offset in [0, range), derived from the seed.
double seed_offset(std::uint64_t seed, std::uint64_t stream, double range) {
  return lattice_uniform(seed, 100 + stream, 0, 0) * range;
}

double positive_mod(double a, double m) {
  const double r = std::fmod(a, m);
  return r < 0.0 ? r + m : r;
}

double perlin_layer(std::uint64_t s, double x, double y) { return noise::perlin(s, x, y); }
double value_layer(std::uint64_t s, double x, double y) { return noise::value_noise(s, x, y); }
double abs_perlin_layer(std::uint64_t s, double x, double y) {
  return std::abs(noise::perlin(s, x, y));
}
double ridge_layer(std::uint64_t s, double x, double y) {
  const double r = 1.0 - std::abs(noise::perlin(s, x, y));
  return r * r;
}

Shader checkerboard(std::span<const double> p, std::uint64_t seed, int) {
  const double period = p[0];
  const double contrast = p[1];
  const double ox = std::floor(seed_offset(seed, 0, 64.0));
  const double oy = std::floor(seed_offset(seed, 1, 64.0));
  return [=](double x, double y) {
    const auto cx = static_cast<long long>(std::floor((x + ox) / period));
    const auto cy = static_cast<long long>(std::floor((y + oy) / period));
    const bool odd = ((cx + cy) % 2) != 0;
    return 0.5 + (odd ? 0.5 : -0.5) * contrast;
  };
}

Shader stripes(std::span<const double> p, std::uint64_t seed, int) {
  const double wavelength = p[0];
  const double k = 0.5 + 8.0 * p[1];
  const double phase = seed_offset(seed, 0, kTwoPi);
  const double norm = std::tanh(k);
  return [=](double x, double) {
    const double s = std::sin(kTwoPi * x / wavelength + phase);
    return 0.5 + 0.5 * std::tanh(k * s) / norm;
  };
}

Shader polka_dots(std::span<const double> p, std::uint64_t seed, int) {
  const double spacing = p[0];
  const double radius = p[1] * spacing;
  const double ox = seed_offset(seed, 0, spacing);
  const double oy = seed_offset(seed, 1, spacing);
  return [=](double x, double y) {
    const double lx = positive_mod(x + ox, spacing) - 0.5 * spacing;
    const double ly = positive_mod(y + oy, spacing) - 0.5 * spacing;
    const double d = std::hypot(lx, ly);
    return 0.15 + 0.75 * (1.0 - smoothstep(radius - 1.0, radius + 1.0, d));
  };
}

Shader honeycomb(std::span<const double> p, std::uint64_t seed, int) {
  const double w = p[0];
  const double h = w * std::sqrt(3.0);
  const double half_wall = 0.5 * p[1] * w;
  const double ox = seed_offset(seed, 0, w);
  const double oy = seed_offset(seed, 1, h);
  return [=](double x, double y) {
    x += ox;
    y += oy;
    // Two rectangular lattices; the nearer center of the two is the hex center.
    const double ax = x - w * std::round(x / w);
    const double ay = y - h * std::round(y / h);
    const double bx = (x - 0.5 * w) - w * std::round((x - 0.5 * w) / w);
    const double by = (y - 0.5 * h) - h * std::round((y - 0.5 * h) / h);
    const bool use_a = ax * ax + ay * ay <= bx * bx + by * by;
    const double dx = use_a ? ax : bx;
    const double dy = use_a ? ay : by;
    const double s3 = 0.5 * std::sqrt(3.0);
    const double proj = std::max({std::abs(dx), std::abs(0.5 * dx + s3 * dy),
                                  std::abs(-0.5 * dx + s3 * dy)});
    const double edge = 0.5 * w - proj;
    return 0.15 + 0.7 * smoothstep(half_wall - 0.75, half_wall + 0.75, edge);
  };
}

Shader weave(std::span<const double> p, std::uint64_t seed, int) {
  const double period = p[0];
  const double gap = p[1];
  const double ox = std::floor(seed_offset(seed, 0, 2.0 * period));
  const double oy = std::floor(seed_offset(seed, 1, 2.0 * period));
  return [=](double x, double y) {
    const double gx = (x + ox) / period;
    const double gy = (y + oy) / period;
    const auto cx = static_cast<long long>(std::floor(gx));
    const auto cy = static_cast<long long>(std::floor(gy));
    const double fx = gx - std::floor(gx);
    const double fy = gy - std::floor(gy);
    const bool horizontal = ((cx + cy) % 2) == 0;
    const double across = horizontal ? fy : fx;
    const double along = horizontal ? fx : fy;
    const double g = 0.5 * gap;
    if (across < g || across > 1.0 - g) return 0.1;
    const double t = (across - g) / (1.0 - gap);
    const double profile = 0.35 + 0.55 * std::sin(kPi * t);
    return profile * (0.9 + 0.1 * std::cos(kTwoPi * along));
  };
}

Shader value_fbm(std::span<const double> p, std::uint64_t seed, int) {
  const double scale = p[0];
  const double persistence = p[1];
  return [=](double x, double y) {
    const double n = fractal(value_layer, seed, x / scale, y / scale, 5.0, persistence);
    return 0.5 + 2.2 * (n - 0.5);
  };
}

Shader perlin_fbm(std::span<const double> p, std::uint64_t seed, int) {
  const double scale = p[0];
  const double octaves = p[1];
  return [=](double x, double y) {
    const double n = fractal(perlin_layer, seed, x / scale, y / scale, octaves, 0.5);
    return 0.5 + 0.5 * n;
  };
}

Shader marble(std::span<const double> p, std::uint64_t seed, int) {
  const double wavelength = p[0];
  const double turbulence = p[1];
  return [=](double x, double y) {
    const double t = fractal(perlin_layer, seed, x / 32.0, y / 32.0, 4.0, 0.5);
    const double phase = kTwoPi * (x + 0.5 * y) / wavelength + 2.0 * turbulence * t;
    return 0.5 + 0.45 * std::sin(phase);
  };
}

Shader wood(std::span<const double> p, std::uint64_t seed, int size) {
  const double spacing = p[0];
  const double turbulence = p[1];
  const double cx = -0.5 * size - seed_offset(seed, 0, 0.5 * size);
  const double cy = 0.5 * size + seed_offset(seed, 1, 0.5 * size) - 0.25 * size;
  return [=](double x, double y) {
    const double r = std::hypot(x - cx, y - cy);
    const double t = fractal(perlin_layer, seed, x / 24.0, y / 24.0, 3.0, 0.5);
    return 0.5 + 0.45 * std::sin(kTwoPi * (r / spacing + turbulence * t));
  };
}

Shader worley_cellular(std::span<const double> p, std::uint64_t seed, int) {
  const double cell = kReferenceSpan / p[0];
  const double jitter = p[1];
  return [=](double x, double y) {
    const auto w = noise::worley(seed, x / cell, y / cell, jitter);
    return 1.0 - 1.25 * w.f1;
  };
}

Shader worley_edges(std::span<const double> p, std::uint64_t seed, int) {
  const double cell = kReferenceSpan / p[0];
  const double width = p[1];
  return [=](double x, double y) {
    const auto w = noise::worley(seed, x / cell, y / cell, 1.0);
    return 0.1 + 0.8 * smoothstep(0.0, width, w.f2 - w.f1);
  };
}

Shader spiral(std::span<const double> p, std::uint64_t seed, int size) {
  // Arm count is rounded so the pattern has no angular seam.
  const double arms = std::max(1.0, std::round(p[0]));
  const double wavelength = 64.0 / p[1];
  const double cx = 0.5 * size + seed_offset(seed, 0, 8.0) - 4.0;
  const double cy = 0.5 * size + seed_offset(seed, 1, 8.0) - 4.0;
  return [=](double x, double y) {
    const double theta = std::atan2(y - cy, x - cx);
    const double r = std::hypot(x - cx, y - cy);
    return 0.5 + 0.45 * std::sin(arms * theta + kTwoPi * r / wavelength);
  };
}

Shader gabor_noise(std::span<const double> p, std::uint64_t seed, int) {
  const double freq = p[0];
  const double anisotropy = p[1];
  constexpr double kCell = 24.0;
  constexpr double kSigma = 6.0;
  constexpr int kImpulses = 8;
  constexpr double kBaseAngle = 0.25 * kPi;
  return [=](double x, double y) {
    const auto cx = static_cast<long long>(std::floor(x / kCell));
    const auto cy = static_cast<long long>(std::floor(y / kCell));
    double sum = 0.0;
    for (long long j = cy - 1; j <= cy + 1; ++j) {
      for (long long i = cx - 1; i <= cx + 1; ++i) {
        for (int k = 0; k < kImpulses; ++k) {
          const std::uint64_t st = 10 + 4 * static_cast<std::uint64_t>(k);
          const double px = (static_cast<double>(i) + lattice_uniform(seed, st, i, j)) * kCell;
          const double py = (static_cast<double>(j) + lattice_uniform(seed, st + 1, i, j)) * kCell;
          const double weight = lattice_uniform(seed, st + 2, i, j) < 0.5 ? -1.0 : 1.0;
          const double omega =
              kBaseAngle + (1.0 - anisotropy) * kPi * (lattice_uniform(seed, st + 3, i, j) - 0.5);
          const double dx = x - px;
          const double dy = y - py;
          const double env = std::exp(-(dx * dx + dy * dy) / (2.0 * kSigma * kSigma));
          sum += weight * env *
                 std::cos(kTwoPi * freq * (dx * std::cos(omega) + dy * std::sin(omega)));
        }
      }
    }
    return 0.5 + 0.18 * sum;
  };
}

Shader crosshatch(std::span<const double> p, std::uint64_t seed, int) {
  const double spacing = p[0];
  const double half_line = 0.5 * p[1];
  const double ox = seed_offset(seed, 0, spacing);
  const double oy = seed_offset(seed, 1, spacing);
  return [=](double x, double y) {
    const double fx = positive_mod(x + ox, spacing);
    const double fy = positive_mod(y + oy, spacing);
    const double d = std::min({fx, spacing - fx, fy, spacing - fy});
    return 0.15 + 0.7 * smoothstep(half_line - 0.5, half_line + 0.5, d);
  };
}

Shader brick(std::span<const double> p, std::uint64_t seed, int) {
  const double bw = p[0];
  const double bh = 0.5 * bw;
  const double half_mortar = 0.5 * p[1];
  const double ox = seed_offset(seed, 0, bw);
  const double oy = seed_offset(seed, 1, bh);
  return [=](double x, double y) {
    const double yy = y + oy;
    const auto row = static_cast<long long>(std::floor(yy / bh));
    const double xs = x + ox + ((row % 2 != 0) ? 0.5 * bw : 0.0);
    const auto col = static_cast<long long>(std::floor(xs / bw));
    const double lx = xs - static_cast<double>(col) * bw;
    const double ly = yy - static_cast<double>(row) * bh;
    const double edge = std::min({lx, bw - lx, ly, bh - ly});
    const double tone = 0.55 + 0.25 * (lattice_uniform(seed, 5, col, row) - 0.5) +
                        0.08 * (noise::value_noise(seed, x / 2.0, y / 2.0) - 0.5);
    const double m = smoothstep(half_mortar - 0.5, half_mortar + 0.5, edge);
    return 0.15 + (tone - 0.15) * m;
  };
}

Shader speckle(std::span<const double> p, std::uint64_t seed, int) {
  const double cell = 1.0 / std::sqrt(p[0]);
  const double radius = p[1];
  return [=](double x, double y) {
    const auto cx = static_cast<long long>(std::floor(x / cell));
    const auto cy = static_cast<long long>(std::floor(y / cell));
    double cover = 0.0;
    for (long long j = cy - 1; j <= cy + 1; ++j) {
      for (long long i = cx - 1; i <= cx + 1; ++i) {
        if (lattice_uniform(seed, 6, i, j) > 0.7) continue;
        const double px = (static_cast<double>(i) + lattice_uniform(seed, 7, i, j)) * cell;
        const double py = (static_cast<double>(j) + lattice_uniform(seed, 8, i, j)) * cell;
        const double d = std::hypot(x - px, y - py);
        cover = std::max(cover, 1.0 - smoothstep(radius - 0.5, radius + 0.5, d));
      }
    }
    return 0.85 - 0.7 * cover;
  };
}

Shader ridged(std::span<const double> p, std::uint64_t seed, int) {
  const double scale = p[0];
  const double octaves = p[1];
  return [=](double x, double y) {
    const double n = fractal(ridge_layer, seed, x / scale, y / scale, octaves, 0.5);
    return 1.6 * (n - 0.3);
  };
}

Shader turbulence(std::span<const double> p, std::uint64_t seed, int) {
  const double scale = p[0];
  const double octaves = p[1];
  return [=](double x, double y) {
    const double n = fractal(abs_perlin_layer, seed, x / scale, y / scale, octaves, 0.5);
    return 2.2 * n;
  };
}

Shader fish_scales(std::span<const double> p, std::uint64_t seed, int) {
  const double size = p[0];
  const double row_step = size * (1.0 - 0.5 * p[1]);
  const double radius = 0.6 * size;
  const double ox = seed_offset(seed, 0, size);
  const double oy = seed_offset(seed, 1, row_step);
  return [=](double x, double y) {
    x += ox;
    y += oy;
    const auto base = static_cast<long long>(std::floor(y / row_step));
    // Lower rows overlap the ones above them.
    for (long long row = base + 2; row >= base - 1; --row) {
      const double cy = static_cast<double>(row) * row_step;
      const double shift = (row % 2 != 0) ? 0.5 * size : 0.0;
      const double col = std::round((x - shift) / size);
      for (double c : {col - 1.0, col, col + 1.0}) {
        const double cx = c * size + shift;
        const double d = std::hypot(x - cx, y - cy);
        if (d < radius) {
          const double body = 1.0 - smoothstep(0.82 * radius, radius, d);
          return 0.15 + 0.75 * body * (0.55 + 0.45 * d / radius);
        }
      }
    }
    return 0.15;
  };
}

Shader lace(std::span<const double> p, std::uint64_t seed, int) {
  const double f = p[0];
  const double threshold = p[1];
  const double ox = seed_offset(seed, 0, 1.0 / f);
  const double oy = seed_offset(seed, 1, 1.0 / f);
  const double s3 = 0.5 * std::sqrt(3.0);
  return [=](double x, double y) {
    x += ox;
    y += oy;
    const double s = (std::cos(kTwoPi * f * x) + std::cos(kTwoPi * f * (0.5 * x + s3 * y)) +
                      std::cos(kTwoPi * f * (-0.5 * x + s3 * y))) /
                     3.0;
    return 0.1 + 0.8 * smoothstep(threshold - 0.08, threshold + 0.08, std::abs(s));
  };
}

}  // namespace

const std::vector<Renderer>& renderers() {
  static const std::vector<Renderer> table = {
      {"checkerboard", {"period", "contrast"}, checkerboard},
      {"stripes", {"wavelength", "sharpness"}, stripes},
      {"polka_dots", {"spacing", "radius"}, polka_dots},
      {"honeycomb", {"cell", "wall"}, honeycomb},
      {"weave", {"period", "gap"}, weave},
      {"value_fbm", {"scale", "persistence"}, value_fbm},
      {"perlin_fbm", {"scale", "octaves"}, perlin_fbm},
      {"marble", {"wavelength", "turbulence"}, marble},
      {"wood", {"spacing", "turbulence"}, wood},
      {"worley_cellular", {"density", "jitter"}, worley_cellular},
      {"worley_edges", {"density", "width"}, worley_edges},
      {"spiral", {"arms", "tightness"}, spiral},
      {"gabor_noise", {"frequency", "anisotropy"}, gabor_noise},
      {"crosshatch", {"spacing", "line_width"}, crosshatch},
      {"brick", {"width", "mortar"}, brick},
      {"speckle", {"density", "radius"}, speckle},
      {"ridged", {"scale", "octaves"}, ridged},
      {"turbulence", {"scale", "octaves"}, turbulence},
      {"fish_scales", {"size", "overlap"}, fish_scales},
      {"lace", {"frequency", "threshold"}, lace},
  };
  return table;
}

const Renderer* find_renderer(std::string_view model_id) {
  for (const auto& r : renderers()) {
    if (r.model_id == model_id) return &r;
  }
  return nullptr;
}

}  // namespace semtex::procgen::detail
