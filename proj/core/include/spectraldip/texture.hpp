#pragma once

#include <optional>
#include <vector>

#include "spectraldip/image.hpp"

namespace spectraldip {

struct TextureConfig {
  int glcm_levels = 16;
  int psd_bins = 32;
  int analysis_size = 256;  // images are resized here before analysis
};

/// GLCM scalars plus the azimuthally averaged log-power spectrum.
/// correlation is absent for zero-variance (constant) images.
struct TextureFeatures {
  std::optional<double> glcm_correlation_0;
  double glcm_homogeneity_45 = 0.0;
  double glcm_contrast_0 = 0.0;
  std::vector<double> radial_psd;  // log10 scale, length psd_bins

  /// Flat vector [correlation, homogeneity, contrast, psd...]; an undefined
  /// correlation becomes 0 with the caller expected to have checked.
  std::vector<double> flatten() const;
};

struct GlcmMatrix {
  int levels = 0;
  std::vector<double> p;  // levels x levels, sums to 1
  double at(int i, int j) const { return p[static_cast<std::size_t>(i) * levels + j]; }
};

/// Normalized symmetric co-occurrence matrix of a grayscale image at the
/// given offset. Values in [0,1] are quantized to `levels` uniform bins of
/// the 8-bit range.
GlcmMatrix glcm(const Image& gray, int dx, int dy, int levels);

struct GlcmFeatures {
  std::optional<double> correlation;  // absent when the image has no variance
  double homogeneity = 0.0;
  double contrast = 0.0;
};

/// correlation at 0 deg, homogeneity at 45 deg, contrast at 0 deg.
/// 0 deg -> offset (1,0); 45 deg -> offset (1,-1).
GlcmFeatures glcm_features(const Image& gray, int levels);

/// Azimuthally averaged power spectral density of a square grayscale image:
/// per-radial-bin mean of |DFT|^2 with DC centered, log10 scale with
/// epsilon 1e-12. Frequencies beyond the Nyquist radius (corners) are
/// dropped. n_bins must not exceed half the side length.
std::vector<double> radial_psd(const Image& gray, int n_bins);

TextureFeatures texture_features(const Image& img, const TextureConfig& cfg = {});

}  // namespace spectraldip
