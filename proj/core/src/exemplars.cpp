#include "spectraldip/exemplars.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace spectraldip {

namespace {

constexpr double kPi = std::numbers::pi;

void normalize_range(Image& img, double lo, double hi) {
  double mn = img.data[0], mx = img.data[0];
  for (double v : img.data) {
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  const double span = mx - mn < 1e-12 ? 1.0 : mx - mn;
  for (double& v : img.data) v = lo + (hi - lo) * (v - mn) / span;
}

struct Blob {
  double cy, cx, sigma, amp;
};

void add_blobs(Image& img, std::mt19937_64& rng, int count, double sig_lo,
               double sig_hi, double amp) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int b = 0; b < count; ++b) {
    Blob blob;
    blob.cy = uni(rng) * img.height;
    blob.cx = uni(rng) * img.width;
    blob.sigma = sig_lo + uni(rng) * (sig_hi - sig_lo);
    blob.amp = (uni(rng) * 2.0 - 1.0) * amp;
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        const double d2 = (y - blob.cy) * (y - blob.cy) + (x - blob.cx) * (x - blob.cx);
        img.at(0, y, x) += blob.amp * std::exp(-d2 / (2.0 * blob.sigma * blob.sigma));
      }
  }
}

}  // namespace

Image value_noise(int size, int grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Image g(1, grid, grid);
  for (double& v : g.data) v = uni(rng);
  Image out = resize_bicubic(g, size, size);
  normalize_range(out, 0.0, 1.0);
  return out;
}

Image coarse_exemplar(int size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Image img(1, size, size);

  const double gx = 0.4 + 0.4 * uni(rng);
  const double gy = 0.4 + 0.4 * uni(rng);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      img.at(0, y, x) = gx * x / size + gy * y / size;

  add_blobs(img, rng, 5, size * 0.12, size * 0.25, 0.55);

  const Image low = value_noise(size, 6, rng());
  for (std::size_t i = 0; i < img.data.size(); ++i)
    img.data[i] += 0.25 * (low.data[i] - 0.5);

  normalize_range(img, 0.08, 0.92);
  return img;
}

Image fine_exemplar(int size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Image img(1, size, size);

  // Smooth base.
  const Image base = value_noise(size, 5, rng());
  for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = 0.55 * base.data[i];
  add_blobs(img, rng, 3, size * 0.15, size * 0.3, 0.25);

  // Oriented gratings with a slowly varying orientation and period, locally
  // amplitude-modulated; this is the fine-grained content.
  const Image orient = value_noise(size, 4, rng());
  const Image freq = value_noise(size, 4, rng());
  const Image env = value_noise(size, 5, rng());
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double theta = orient.at(0, y, x) * kPi;
      const double period = 3.5 + 3.0 * freq.at(0, y, x);
      const double phase =
          2.0 * kPi * (std::cos(theta) * x + std::sin(theta) * y) / period;
      const double a = 0.14 + 0.22 * env.at(0, y, x);
      img.at(0, y, x) += a * std::sin(phase);
    }

  // A pinch of fine-grain stochastic texture.
  const Image fine = value_noise(size, std::max(8, size / 2), rng());
  for (std::size_t i = 0; i < img.data.size(); ++i)
    img.data[i] += 0.10 * (fine.data[i] - 0.5);

  normalize_range(img, 0.05, 0.95);
  return img;
}

Image texture_sample(int texture_class, int idx, int size) {
  const std::uint64_t seed =
      0x51D5 + static_cast<std::uint64_t>(texture_class) * 1000 +
      static_cast<std::uint64_t>(idx);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  switch (texture_class) {
    case 0: {  // coarse
      return coarse_exemplar(size, seed);
    }
    case 1: {  // medium: mid-frequency waves over smooth structure
      Image img(1, size, size);
      const Image base = value_noise(size, 6, rng());
      for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = 0.6 * base.data[i];
      add_blobs(img, rng, 3, size * 0.12, size * 0.22, 0.3);
      const double theta = uni(rng) * kPi;
      const double period = size * (0.07 + 0.05 * uni(rng));
      const Image env = value_noise(size, 4, rng());
      for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
          const double phase =
              2.0 * kPi * (std::cos(theta) * x + std::sin(theta) * y) / period;
          img.at(0, y, x) += (0.1 + 0.15 * env.at(0, y, x)) * std::sin(phase);
        }
      const Image mid = value_noise(size, size / 6, rng());
      for (std::size_t i = 0; i < img.data.size(); ++i)
        img.data[i] += 0.12 * (mid.data[i] - 0.5);
      normalize_range(img, 0.06, 0.94);
      return img;
    }
    case 2: {  // fine
      return fine_exemplar(size, seed);
    }
    default:
      throw std::invalid_argument("texture_sample: class must be 0, 1 or 2");
  }
}

}  // namespace spectraldip
