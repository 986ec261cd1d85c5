#include "spectraldip/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spectraldip {

Image to_gray(const Image& img) {
  if (img.channels == 1) return img;
  Image out(1, img.height, img.width);
  if (img.channels == 3) {
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        out.at(0, y, x) = 0.299 * img.at(0, y, x) + 0.587 * img.at(1, y, x) +
                          0.114 * img.at(2, y, x);
    return out;
  }
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double s = 0.0;
      for (int c = 0; c < img.channels; ++c) s += img.at(c, y, x);
      out.at(0, y, x) = s / img.channels;
    }
  return out;
}

namespace {

// Catmull-Rom weights (a = -0.5).
double cubic_weight(double t) {
  const double a = -0.5;
  const double at = std::abs(t);
  if (at <= 1.0) return (a + 2.0) * at * at * at - (a + 3.0) * at * at + 1.0;
  if (at < 2.0) return a * at * at * at - 5.0 * a * at * at + 8.0 * a * at - 4.0 * a;
  return 0.0;
}

int clampi(int v, int lo, int hi) { return std::min(std::max(v, lo), hi); }

}  // namespace

Image resize_bicubic(const Image& img, int out_h, int out_w) {
  if (out_h <= 0 || out_w <= 0)
    throw std::invalid_argument("resize_bicubic: bad output size");
  if (img.height == out_h && img.width == out_w) return img;

  // Horizontal pass, then vertical.
  Image tmp(img.channels, img.height, out_w);
  const double sx = static_cast<double>(img.width) / out_w;
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int ox = 0; ox < out_w; ++ox) {
        const double srcx = (ox + 0.5) * sx - 0.5;
        const int x0 = static_cast<int>(std::floor(srcx));
        double acc = 0.0, wsum = 0.0;
        for (int k = -1; k <= 2; ++k) {
          const double w = cubic_weight(srcx - (x0 + k));
          acc += w * img.at(c, y, clampi(x0 + k, 0, img.width - 1));
          wsum += w;
        }
        tmp.at(c, y, ox) = acc / wsum;
      }

  Image out(img.channels, out_h, out_w);
  const double sy = static_cast<double>(img.height) / out_h;
  for (int c = 0; c < img.channels; ++c)
    for (int oy = 0; oy < out_h; ++oy) {
      const double srcy = (oy + 0.5) * sy - 0.5;
      const int y0 = static_cast<int>(std::floor(srcy));
      for (int ox = 0; ox < out_w; ++ox) {
        double acc = 0.0, wsum = 0.0;
        for (int k = -1; k <= 2; ++k) {
          const double w = cubic_weight(srcy - (y0 + k));
          acc += w * tmp.at(c, clampi(y0 + k, 0, tmp.height - 1), ox);
          wsum += w;
        }
        out.at(c, oy, ox) = acc / wsum;
      }
    }
  return out;
}

Image center_crop_square(const Image& img) {
  const int side = std::min(img.height, img.width);
  if (side == img.height && side == img.width) return img;
  const int y0 = (img.height - side) / 2;
  const int x0 = (img.width - side) / 2;
  Image out(img.channels, side, side);
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x) out.at(c, y, x) = img.at(c, y0 + y, x0 + x);
  return out;
}

Image clamp01(Image img) {
  for (double& v : img.data) v = std::clamp(v, 0.0, 1.0);
  return img;
}

Tensor image_to_tensor(const Image& img) {
  return Tensor::from_data({img.channels, img.height, img.width}, img.data);
}

Image tensor_to_image(const Tensor& t) {
  if (t.shape().size() != 3)
    throw std::invalid_argument("tensor_to_image: expected [C,H,W]");
  Image img(t.dim(0), t.dim(1), t.dim(2));
  img.data = t.data();
  return img;
}

}  // namespace spectraldip
