#include "spectraldip/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace spectraldip {

double psnr(const Image& a, const Image& b, double peak) {
  if (!a.same_shape(b)) throw std::invalid_argument("psnr: shape mismatch");
  if (!(peak > 0.0)) throw std::invalid_argument("psnr: peak must be positive");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.data.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

namespace {

constexpr int kWindow = 11;

std::vector<double> gaussian_window() {
  const double sigma = 1.5;
  std::vector<double> w(kWindow);
  const int m = kWindow / 2;
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - m;
    w[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += w[static_cast<std::size_t>(i)];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Separable weighted local mean over valid rows/cols.
std::vector<double> filter_valid(const std::vector<double>& img, int h, int w,
                                 const std::vector<double>& win) {
  const int k = static_cast<int>(win.size());
  const int oh = h - k + 1, ow = w - k + 1;
  std::vector<double> tmp(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int j = 0; j < k; ++j)
        acc += win[static_cast<std::size_t>(j)] * img[static_cast<std::size_t>(y) * w + x + j];
      tmp[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int j = 0; j < k; ++j)
        acc += win[static_cast<std::size_t>(j)] * tmp[static_cast<std::size_t>(y + j) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  return out;
}

}  // namespace

double ssim(const Image& a, const Image& b, double range) {
  if (!a.same_shape(b)) throw std::invalid_argument("ssim: shape mismatch");
  if (a.height < kWindow || a.width < kWindow)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");

  const Image ga = to_gray(a);
  const Image gb = to_gray(b);
  const int h = ga.height, w = ga.width;
  const std::vector<double> win = gaussian_window();

  std::vector<double> aa(ga.data.size()), bb(ga.data.size()), ab(ga.data.size());
  for (std::size_t i = 0; i < ga.data.size(); ++i) {
    aa[i] = ga.data[i] * ga.data[i];
    bb[i] = gb.data[i] * gb.data[i];
    ab[i] = ga.data[i] * gb.data[i];
  }
  const auto mu_a = filter_valid(ga.data, h, w, win);
  const auto mu_b = filter_valid(gb.data, h, w, win);
  const auto m_aa = filter_valid(aa, h, w, win);
  const auto m_bb = filter_valid(bb, h, w, win);
  const auto m_ab = filter_valid(ab, h, w, win);

  const double c1 = (0.01 * range) * (0.01 * range);
  const double c2 = (0.03 * range) * (0.03 * range);

  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double va = m_aa[i] - mu_a[i] * mu_a[i];
    const double vb = m_bb[i] - mu_b[i] * mu_b[i];
    const double cov = m_ab[i] - mu_a[i] * mu_b[i];
    const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
    const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2);
    total += num / den;
  }
  return total / static_cast<double>(mu_a.size());
}

}  // namespace spectraldip
