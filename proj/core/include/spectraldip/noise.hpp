#pragma once

#include <cstdint>
#include <string>

#include "spectraldip/image.hpp"

namespace spectraldip {

/// Degradation description. sigma is stated in 8-bit gray levels and is
/// applied as sigma/255 on the internal [0,1] range; zeta is the Poisson
/// scale of y = zeta * Poisson(x / zeta).
struct NoiseSpec {
  enum class Kind { None, Gaussian, Poisson };
  Kind kind = Kind::None;
  double sigma = 0.0;
  double zeta = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  std::string name() const;
  /// "gaussian:25", "poisson:0.1", "none".
  static NoiseSpec parse(const std::string& text, std::uint64_t seed = 0);
};

/// y = clamp(x + n), n iid N(0, sigma^2); sigma shares the image's value
/// scale, with the image assumed to live in [0, peak].
Image add_gaussian_noise(const Image& image, double sigma, std::uint64_t seed,
                         double peak = 1.0);

/// y = zeta * Poisson(x / zeta) per pixel; image must be non-negative.
Image add_poisson_noise(const Image& image, double zeta, std::uint64_t seed);

/// Applies the spec on the internal [0,1] range.
Image apply_noise(const Image& image, const NoiseSpec& spec);

}  // namespace spectraldip
