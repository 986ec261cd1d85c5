#include "spectraldip/dft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spectraldip {

namespace {

std::vector<std::complex<double>> dft_direct_impl(
    std::span<const std::complex<double>> x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  const double base = -2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ang = base * static_cast<double>(k) * static_cast<double>(i);
      acc += x[i] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

}  // namespace

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void fft_radix2(std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  if (!is_power_of_two(static_cast<int>(n)))
    throw std::invalid_argument("fft_radix2: size must be a power of two");
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = x[i + j];
        const std::complex<double> v = x[i + j + len / 2] * w;
        x[i + j] = u + v;
        x[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

std::vector<std::complex<double>> dft(std::span<const std::complex<double>> x) {
  if (is_power_of_two(static_cast<int>(x.size()))) {
    std::vector<std::complex<double>> out(x.begin(), x.end());
    fft_radix2(out);
    return out;
  }
  return dft_direct_impl(x);
}

std::vector<std::complex<double>> dft(std::span<const double> x) {
  std::vector<std::complex<double>> cx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) cx[i] = x[i];
  return dft(std::span<const std::complex<double>>(cx));
}

std::vector<std::complex<double>> dft_direct(std::span<const double> x) {
  std::vector<std::complex<double>> cx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) cx[i] = x[i];
  return dft_direct_impl(cx);
}

std::vector<double> power_spectrum_2d(std::span<const double> img, int rows,
                                      int cols) {
  if (rows <= 0 || cols <= 0 ||
      img.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
    throw std::invalid_argument("power_spectrum_2d: bad dimensions");

  std::vector<std::complex<double>> work(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) work[i] = img[i];

  // Row transforms, then column transforms.
  std::vector<std::complex<double>> line;
  for (int r = 0; r < rows; ++r) {
    line.assign(work.begin() + static_cast<std::ptrdiff_t>(r) * cols,
                work.begin() + static_cast<std::ptrdiff_t>(r + 1) * cols);
    auto t = dft(std::span<const std::complex<double>>(line));
    std::copy(t.begin(), t.end(), work.begin() + static_cast<std::ptrdiff_t>(r) * cols);
  }
  for (int c = 0; c < cols; ++c) {
    line.resize(static_cast<std::size_t>(rows));
    for (int r = 0; r < rows; ++r) line[static_cast<std::size_t>(r)] = work[static_cast<std::size_t>(r) * cols + c];
    auto t = dft(std::span<const std::complex<double>>(line));
    for (int r = 0; r < rows; ++r) work[static_cast<std::size_t>(r) * cols + c] = t[static_cast<std::size_t>(r)];
  }

  std::vector<double> power(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) power[i] = std::norm(work[i]);
  return power;
}

}  // namespace spectraldip
