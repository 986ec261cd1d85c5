#pragma once

#include <complex>
#include <span>
#include <vector>

namespace spectraldip {

/// Forward DFT, X(k) = sum_n x(n) e^{-i 2 pi k n / N}. Dispatches to a
/// radix-2 FFT for power-of-two lengths and to the direct O(N^2) transform
/// otherwise.
std::vector<std::complex<double>> dft(std::span<const double> x);
std::vector<std::complex<double>> dft(std::span<const std::complex<double>> x);

/// Direct O(N^2) evaluation; kept as an independent reference path.
std::vector<std::complex<double>> dft_direct(std::span<const double> x);

/// In-place iterative radix-2 FFT; size must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& x);

/// 2D power spectrum |DFT(img)|^2 of a rows x cols image (row-major),
/// DC at index (0,0).
std::vector<double> power_spectrum_2d(std::span<const double> img, int rows,
                                      int cols);

bool is_power_of_two(int n);

}  // namespace spectraldip
