#pragma once

// Test-only reference implementations, kept independent of the library's
// computation paths: finite-difference gradients, direct-summation DFT use,
// per-window SSIM, rank statistics.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "spectraldip/image.hpp"
#include "spectraldip/tensor.hpp"

namespace oracle {

inline double rel_err(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-6});
  return std::abs(a - b) / denom;
}

/// Max relative error between the analytic gradient of `param` under the
/// scalar loss built by `loss_fn` and central finite differences.
/// loss_fn must rebuild the graph from the same parameter tensors.
inline double fd_check(spectraldip::Tensor param,
                       const std::function<spectraldip::Tensor()>& loss_fn,
                       double h = 1e-5) {
  using spectraldip::Tensor;
  param.zero_grad();
  Tensor loss = loss_fn();
  spectraldip::backward(loss);
  const std::vector<double> analytic = param.grad();

  double worst = 0.0;
  for (std::size_t i = 0; i < param.data().size(); ++i) {
    const double keep = param.data()[i];
    param.data()[i] = keep + h;
    const double up = loss_fn().item();
    param.data()[i] = keep - h;
    const double dn = loss_fn().item();
    param.data()[i] = keep;
    const double fd = (up - dn) / (2.0 * h);
    worst = std::max(worst, rel_err(analytic[i], fd));
  }
  return worst;
}

/// Scalar loss = sum(weights * x) with fixed random weights; exercises the
/// full Jacobian rather than the row-sum only.
inline std::function<spectraldip::Tensor()> weighted_sum_loss(
    const std::function<spectraldip::Tensor()>& forward, std::uint64_t seed) {
  using spectraldip::Tensor;
  auto weights = std::make_shared<Tensor>();
  return [forward, weights, seed]() {
    Tensor y = forward();
    if (!weights->defined()) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> uni(-1.0, 1.0);
      std::vector<double> w(static_cast<std::size_t>(y.size()));
      for (double& v : w) v = uni(rng);
      *weights = Tensor::from_data(y.shape(), std::move(w));
    }
    return spectraldip::sum(spectraldip::mul(y, *weights));
  };
}

inline spectraldip::Tensor random_tensor(std::vector<int> shape,
                                         std::uint64_t seed,
                                         bool requires_grad = false,
                                         double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(lo, hi);
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  std::vector<double> data(static_cast<std::size_t>(n));
  for (double& v : data) v = uni(rng);
  return spectraldip::Tensor::from_data(std::move(shape), std::move(data),
                                        requires_grad);
}

inline spectraldip::Image random_image(int c, int h, int w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  spectraldip::Image img(c, h, w);
  for (double& v : img.data) v = uni(rng);
  return img;
}

/// Direct per-window SSIM: for every fully-contained 11x11 window, local
/// weighted moments by explicit summation.
inline double ssim_direct(const spectraldip::Image& a,
                          const spectraldip::Image& b, double range) {
  const spectraldip::Image ga = spectraldip::to_gray(a);
  const spectraldip::Image gb = spectraldip::to_gray(b);
  const int k = 11;
  const double sigma = 1.5;
  std::vector<double> win(static_cast<std::size_t>(k) * k);
  double wsum = 0.0;
  for (int y = 0; y < k; ++y)
    for (int x = 0; x < k; ++x) {
      const double dy = y - k / 2, dx = x - k / 2;
      const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      win[static_cast<std::size_t>(y) * k + x] = v;
      wsum += v;
    }
  for (double& v : win) v /= wsum;

  const double c1 = (0.01 * range) * (0.01 * range);
  const double c2 = (0.03 * range) * (0.03 * range);
  double total = 0.0;
  int count = 0;
  for (int y0 = 0; y0 + k <= ga.height; ++y0)
    for (int x0 = 0; x0 + k <= ga.width; ++x0) {
      double ma = 0.0, mb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
      for (int y = 0; y < k; ++y)
        for (int x = 0; x < k; ++x) {
          const double w = win[static_cast<std::size_t>(y) * k + x];
          const double va = ga.at(0, y0 + y, x0 + x);
          const double vb = gb.at(0, y0 + y, x0 + x);
          ma += w * va;
          mb += w * vb;
          saa += w * va * va;
          sbb += w * vb * vb;
          sab += w * va * vb;
        }
      const double va = saa - ma * ma;
      const double vb = sbb - mb * mb;
      const double cov = sab - ma * mb;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) /
               ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  return total / count;
}

/// Tie-aware Spearman rank correlation.
inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ranks = [](const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
      for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> ra = ranks(a), rb = ranks(b);
  const std::size_t n = ra.size();
  double sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sa += ra[i];
    sb += rb[i];
  }
  sa /= static_cast<double>(n);
  sb /= static_cast<double>(n);
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (ra[i] - sa) * (rb[i] - sb);
    da += (ra[i] - sa) * (ra[i] - sa);
    db += (rb[i] - sb) * (rb[i] - sb);
  }
  return num / std::sqrt(da * db);
}

}  // namespace oracle
