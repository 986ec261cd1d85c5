#pragma once

#include "spectraldip/image.hpp"

namespace spectraldip {

/// 10*log10(peak^2 / MSE) over all channels; +inf when the images are
/// identical.
double psnr(const Image& a, const Image& b, double peak);

/// Mean local SSIM with an 11x11 Gaussian window (sigma 1.5),
/// C1 = (0.01 L)^2, C2 = (0.03 L)^2, computed over fully-valid windows.
/// Color inputs are converted to luminance first.
double ssim(const Image& a, const Image& b, double range = 255.0);

}  // namespace spectraldip
