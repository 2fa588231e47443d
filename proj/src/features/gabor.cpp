#include "semtex/features/gabor.hpp"

#include <cmath>
#include <numbers>

#include "semtex/core/error.hpp"

namespace semtex::features {

namespace {

// Envelope width for roughly one-octave radial bandwidth, capped so the
// Gaussian keeps at least two standard deviations inside the kernel.
constexpr double kOctaveSigma = 0.56;

}  // namespace

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

int wrap_index(int i, int n) {
  i %= n;
  return i < 0 ? i + n : i;
}

GaborBank GaborBank::build(const GaborBankConfig& config) {
  if (config.scales < 1 || config.orientations < 1 ||
      config.scales * config.orientations != 24) {
    throw InvalidInput("Gabor bank needs scales * orientations == 24");
  }
  if (!(config.f_lo > 0.0 && config.f_lo < config.f_hi && config.f_hi <= 0.5)) {
    throw InvalidInput("Gabor bank needs 0 < f_lo < f_hi <= 0.5");
  }
  if (config.kernel_size < 3 || config.kernel_size % 2 == 0) {
    throw InvalidInput("Gabor kernel size must be odd and >= 3");
  }

  GaborBank bank;
  bank.config_ = config;
  const int r = config.kernel_size / 2;
  const double ratio =
      config.scales > 1 ? std::pow(config.f_hi / config.f_lo, 1.0 / (config.scales - 1)) : 1.0;

  for (int s = 0; s < config.scales; ++s) {
    const double f = config.f_lo * std::pow(ratio, s);
    const double sigma = std::min(kOctaveSigma / f, 0.5 * r);
    std::vector<double> envelope(config.kernel_size);
    double env_sum = 0.0;
    for (int u = -r; u <= r; ++u) {
      envelope[u + r] = std::exp(-0.5 * u * u / (sigma * sigma));
      env_sum += envelope[u + r];
    }
    for (int o = 0; o < config.orientations; ++o) {
      GaborFilter g;
      g.scale = s;
      g.orientation = o;
      g.frequency = f;
      g.theta = std::numbers::pi * o / config.orientations;
      g.sigma = sigma;
      g.norm = env_sum * env_sum;
      const double wx = 2.0 * std::numbers::pi * f * std::cos(g.theta);
      const double wy = 2.0 * std::numbers::pi * f * std::sin(g.theta);
      g.row.resize(config.kernel_size);
      g.col.resize(config.kernel_size);
      std::complex<double> row_sum{0.0, 0.0};
      std::complex<double> col_sum{0.0, 0.0};
      for (int u = -r; u <= r; ++u) {
        g.row[u + r] = envelope[u + r] * std::polar(1.0, wx * u);
        g.col[u + r] = envelope[u + r] * std::polar(1.0, wy * u);
        row_sum += g.row[u + r];
        col_sum += g.col[u + r];
      }
      const double area = static_cast<double>(config.kernel_size) * config.kernel_size;
      g.dc = row_sum * col_sum / (g.norm * area);
      bank.filters_.push_back(std::move(g));
    }
  }
  return bank;
}

std::vector<std::complex<double>> GaborBank::dense_kernel(std::size_t k) const {
  const auto& g = filters_.at(k);
  const int n = config_.kernel_size;
  std::vector<std::complex<double>> kernel(static_cast<std::size_t>(n) * n);
  for (int v = 0; v < n; ++v)
    for (int u = 0; u < n; ++u)
      kernel[static_cast<std::size_t>(v) * n + u] = g.row[u] * g.col[v] / g.norm - g.dc;
  return kernel;
}

namespace {

struct Padded {
  int width;
  int height;
  int pad;
  std::vector<double> px;
  double at(int x, int y) const { return px[static_cast<std::size_t>(y) * width + x]; }
};

Padded pad_image(const TextureImage& img, int pad, BorderMode mode) {
  const auto index = mode == BorderMode::Wrap ? wrap_index : reflect_index;
  Padded p{img.width() + 2 * pad, img.height() + 2 * pad, pad, {}};
  p.px.resize(static_cast<std::size_t>(p.width) * p.height);
  for (int y = 0; y < p.height; ++y) {
    const int sy = index(y - pad, img.height());
    for (int x = 0; x < p.width; ++x) {
      p.px[static_cast<std::size_t>(y) * p.width + x] = img.at(index(x - pad, img.width()), sy);
    }
  }
  return p;
}

// Sum of the padded image over each kernel-sized window, image-sized output.
std::vector<double> window_sums(const Padded& p, int w, int h, int n) {
  std::vector<double> horiz(static_cast<std::size_t>(w) * p.height);
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int u = 0; u < n; ++u) s += p.at(x + u, y);
      horiz[static_cast<std::size_t>(y) * w + x] = s;
    }
  std::vector<double> out(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int v = 0; v < n; ++v) s += horiz[static_cast<std::size_t>(y + v) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = s;
    }
  return out;
}

void magnitude_into(const Padded& p, const std::vector<double>& box, const GaborFilter& g, int w,
                    int h, int n, std::vector<double>& out) {
  std::vector<std::complex<double>> horiz(static_cast<std::size_t>(w) * p.height);
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < w; ++x) {
      double re = 0.0;
      double im = 0.0;
      for (int u = 0; u < n; ++u) {
        const double v = p.at(x + u, y);
        re += v * g.row[u].real();
        im += v * g.row[u].imag();
      }
      horiz[static_cast<std::size_t>(y) * w + x] = {re, im};
    }
  out.resize(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      std::complex<double> s{0.0, 0.0};
      for (int v = 0; v < n; ++v) s += horiz[static_cast<std::size_t>(y + v) * w + x] * g.col[v];
      const auto idx = static_cast<std::size_t>(y) * w + x;
      out[idx] = std::abs(s / g.norm - g.dc * box[idx]);
    }
}

void check_size(const TextureImage& img, const GaborBank& bank) {
  if (img.width() < bank.kernel_size() || img.height() < bank.kernel_size()) {
    throw InvalidInput("image " + std::to_string(img.width()) + "x" +
                       std::to_string(img.height()) + " is smaller than the Gabor kernel (" +
                       std::to_string(bank.kernel_size()) + ")");
  }
}

}  // namespace

std::vector<double> response_magnitude(const TextureImage& img, const GaborBank& bank,
                                       std::size_t k) {
  check_size(img, bank);
  const int n = bank.kernel_size();
  const Padded p = pad_image(img, bank.radius(), bank.config().border);
  const auto box = window_sums(p, img.width(), img.height(), n);
  std::vector<double> mag;
  magnitude_into(p, box, bank.filters().at(k), img.width(), img.height(), n, mag);
  return mag;
}

FeatureVector extract(const TextureImage& img, const GaborBank& bank) {
  check_size(img, bank);
  const int n = bank.kernel_size();
  const int w = img.width();
  const int h = img.height();
  const Padded p = pad_image(img, bank.radius(), bank.config().border);
  const auto box = window_sums(p, w, h, n);

  FeatureVector features;
  features.reserve(bank.feature_dim());
  std::vector<double> mag;
  const double count = static_cast<double>(w) * h;
  for (const auto& g : bank.filters()) {
    magnitude_into(p, box, g, w, h, n, mag);
    double mean = 0.0;
    for (double m : mag) mean += m;
    mean /= count;
    double var = 0.0;
    for (double m : mag) var += (m - mean) * (m - mean);
    features.push_back(mean);
    features.push_back(std::sqrt(var / count));
  }
  return features;
}

}  // namespace semtex::features
