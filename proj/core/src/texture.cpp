#include "spectraldip/texture.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spectraldip/dft.hpp"

namespace spectraldip {

std::vector<double> TextureFeatures::flatten() const {
  std::vector<double> v;
  v.reserve(3 + radial_psd.size());
  v.push_back(glcm_correlation_0.value_or(0.0));
  v.push_back(glcm_homogeneity_45);
  v.push_back(glcm_contrast_0);
  v.insert(v.end(), radial_psd.begin(), radial_psd.end());
  return v;
}

namespace {

int quantize(double v01, int levels) {
  // [0,1] -> 8-bit gray -> uniform bins of [0,255].
  const double g = std::clamp(v01, 0.0, 1.0) * 255.0;
  const int bin = static_cast<int>(g * levels / 256.0);
  return std::min(bin, levels - 1);
}

}  // namespace

GlcmMatrix glcm(const Image& gray, int dx, int dy, int levels) {
  if (gray.channels != 1) throw std::invalid_argument("glcm: expected grayscale");
  if (levels < 2 || levels > 256)
    throw std::invalid_argument("glcm: levels must be in [2,256]");
  if (std::abs(dx) >= gray.width || std::abs(dy) >= gray.height)
    throw std::invalid_argument("glcm: image smaller than offset");

  GlcmMatrix m;
  m.levels = levels;
  m.p.assign(static_cast<std::size_t>(levels) * levels, 0.0);

  std::size_t pairs = 0;
  for (int y = 0; y < gray.height; ++y) {
    const int y2 = y + dy;
    if (y2 < 0 || y2 >= gray.height) continue;
    for (int x = 0; x < gray.width; ++x) {
      const int x2 = x + dx;
      if (x2 < 0 || x2 >= gray.width) continue;
      const int a = quantize(gray.at(0, y, x), levels);
      const int b = quantize(gray.at(0, y2, x2), levels);
      // Symmetric accumulation: the pair and its reverse.
      m.p[static_cast<std::size_t>(a) * levels + b] += 1.0;
      m.p[static_cast<std::size_t>(b) * levels + a] += 1.0;
      pairs += 2;
    }
  }
  if (pairs == 0) throw std::invalid_argument("glcm: no valid pixel pairs");
  for (double& v : m.p) v /= static_cast<double>(pairs);
  return m;
}

namespace {

struct GlcmStats {
  double contrast = 0.0, homogeneity = 0.0;
  std::optional<double> correlation;
};

GlcmStats stats_from(const GlcmMatrix& m) {
  GlcmStats s;
  const int L = m.levels;
  std::vector<double> marginal(static_cast<std::size_t>(L), 0.0);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      const double p = m.at(i, j);
      marginal[static_cast<std::size_t>(i)] += p;
      s.contrast += p * (i - j) * (i - j);
      s.homogeneity += p / (1.0 + std::abs(i - j));
    }
  double mu = 0.0;
  for (int i = 0; i < L; ++i) mu += i * marginal[static_cast<std::size_t>(i)];
  double var = 0.0;
  for (int i = 0; i < L; ++i) {
    const double d = i - mu;
    var += d * d * marginal[static_cast<std::size_t>(i)];
  }
  if (var > 1e-12) {
    double corr = 0.0;
    for (int i = 0; i < L; ++i)
      for (int j = 0; j < L; ++j)
        corr += m.at(i, j) * (i - mu) * (j - mu);
    s.correlation = corr / var;
  }
  return s;
}

}  // namespace

GlcmFeatures glcm_features(const Image& gray, int levels) {
  const GlcmMatrix m0 = glcm(gray, 1, 0, levels);    // 0 degrees
  const GlcmMatrix m45 = glcm(gray, 1, -1, levels);  // 45 degrees
  const GlcmStats s0 = stats_from(m0);
  const GlcmStats s45 = stats_from(m45);
  GlcmFeatures f;
  f.correlation = s0.correlation;
  f.contrast = s0.contrast;
  f.homogeneity = s45.homogeneity;
  return f;
}

std::vector<double> radial_psd(const Image& gray, int n_bins) {
  if (gray.channels != 1)
    throw std::invalid_argument("radial_psd: expected grayscale");
  if (gray.height != gray.width)
    throw std::invalid_argument("radial_psd: image must be square (pad first)");
  const int n = gray.height;
  if (n_bins < 1 || n_bins > n / 2)
    throw std::invalid_argument("radial_psd: n_bins must be in [1, side/2]");

  const std::vector<double> power = power_spectrum_2d(gray.data, n, n);

  // DC centered at (n/2, n/2); bin = floor(r * n_bins / r_max), r_max = n/2.
  const double r_max = n / 2.0;
  const int cy = n / 2, cx = n / 2;
  std::vector<double> sum(static_cast<std::size_t>(n_bins), 0.0);
  std::vector<std::size_t> count(static_cast<std::size_t>(n_bins), 0);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      // fftshift: spectrum index of centered position (y,x).
      const int ky = (y - cy + n) % n;
      const int kx = (x - cx + n) % n;
      const double dy = y - cy, dx = x - cx;
      const double r = std::sqrt(dx * dx + dy * dy);
      const int bin = static_cast<int>(r * n_bins / r_max);
      if (bin >= n_bins) continue;  // beyond the Nyquist circle
      sum[static_cast<std::size_t>(bin)] += power[static_cast<std::size_t>(ky) * n + kx];
      count[static_cast<std::size_t>(bin)] += 1;
    }
  }

  std::vector<double> out(static_cast<std::size_t>(n_bins));
  for (int b = 0; b < n_bins; ++b) {
    const double mean =
        count[static_cast<std::size_t>(b)] == 0
            ? 0.0
            : sum[static_cast<std::size_t>(b)] / static_cast<double>(count[static_cast<std::size_t>(b)]);
    out[static_cast<std::size_t>(b)] = std::log10(mean + 1e-12);
  }
  return out;
}

TextureFeatures texture_features(const Image& img, const TextureConfig& cfg) {
  Image gray = to_gray(img);
  gray = center_crop_square(gray);
  gray = resize_bicubic(gray, cfg.analysis_size, cfg.analysis_size);
  gray = clamp01(std::move(gray));

  const GlcmFeatures g = glcm_features(gray, cfg.glcm_levels);
  TextureFeatures f;
  f.glcm_correlation_0 = g.correlation;
  f.glcm_homogeneity_45 = g.homogeneity;
  f.glcm_contrast_0 = g.contrast;

  // The PSD is taken on the 8-bit gray scale so thresholds and features
  // are stated in the same units as the GLCM quantization.
  Image gray255 = gray;
  for (double& v : gray255.data) v *= 255.0;
  f.radial_psd = radial_psd(gray255, cfg.psd_bins);
  return f;
}

}  // namespace spectraldip
