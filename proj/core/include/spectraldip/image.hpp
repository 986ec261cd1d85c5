#pragma once

#include <cstdint>
#include <vector>

#include "spectraldip/tensor.hpp"

namespace spectraldip {

/// Channel-first image of doubles in [0,1] (values outside the range are
/// tolerated by the container; producers clamp where it matters).
struct Image {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;  // row-major per channel

  Image() = default;
  Image(int c, int h, int w)
      : channels(c), height(h), width(w),
        data(static_cast<std::size_t>(c) * h * w, 0.0) {}

  double& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  double at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height) * width;
  }
  bool same_shape(const Image& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
};

/// Luminance conversion (0.299/0.587/0.114 for RGB); 1-channel images pass
/// through unchanged, other channel counts average.
Image to_gray(const Image& img);

/// Separable Catmull-Rom bicubic resize with clamped borders.
Image resize_bicubic(const Image& img, int out_h, int out_w);

/// Largest centered square crop.
Image center_crop_square(const Image& img);

Image clamp01(Image img);

Tensor image_to_tensor(const Image& img);
Image tensor_to_image(const Tensor& t);

}  // namespace spectraldip
