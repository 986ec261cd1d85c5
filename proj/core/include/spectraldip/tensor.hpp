#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace spectraldip {

namespace detail {
struct TensorNode;
}

/// Dense n-dimensional array of doubles with an optional reverse-mode
/// autodiff node. Copies are shallow; the underlying buffer is shared.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor full(std::vector<int> shape, double value);
  static Tensor from_data(std::vector<int> shape, std::vector<double> data,
                          bool requires_grad = false);
  static Tensor scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const std::vector<int>& shape() const;
  std::int64_t size() const;
  int dim(int i) const { return shape()[static_cast<std::size_t>(i)]; }

  std::vector<double>& data();
  const std::vector<double>& data() const;
  double item() const;

  bool requires_grad() const;
  /// Gradient buffer; zero-sized until first accumulation or zero_grad().
  std::vector<double>& grad();
  const std::vector<double>& grad() const;
  void zero_grad();

  std::shared_ptr<detail::TensorNode> node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::TensorNode> node)
      : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::TensorNode> node_;
};

namespace detail {
struct TensorNode {
  std::vector<int> shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;
  bool backward_done = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backprop;

  std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }
  void ensure_grad();
};
}  // namespace detail

// Forward operations. All are pure: inputs are never modified and the same
// inputs produce bitwise-identical outputs.

/// 2D convolution, zero padding. input [Cin,H,W], kernel [Cout,Cin,k,k],
/// bias [Cout] (may be an undefined Tensor for no bias).
/// H' = floor((H + 2*padding - k)/stride) + 1.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              int stride, int padding);

Tensor relu(const Tensor& input);
/// slope*x for x < 0. The subgradient at 0 follows the negative branch,
/// so plain relu has gradient 0 at x == 0.
Tensor leaky_relu(const Tensor& input, double slope);
Tensor sigmoid(const Tensor& input);

/// Per-channel normalization over spatial positions (batch size is 1):
/// y = scale * (x - mean) / sqrt(var + eps) + shift, per channel.
/// input [C,H,W], scale/shift [C].
Tensor channel_norm(const Tensor& input, const Tensor& scale,
                    const Tensor& shift, double eps);

/// [Ca,H,W] + [Cb,H,W] -> [Ca+Cb,H,W]. Either side may have 0 channels.
Tensor concat_channels(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor sum(const Tensor& input);

/// Mean of squared differences; gradient 2*(pred - target)/N.
Tensor mse_loss(const Tensor& pred, const Tensor& target);

/// Zero-insertion upsampling along one spatial axis followed by 1D
/// convolution with (kernel * gain), zero-padded. axis: 1 = rows (H),
/// 2 = cols (W). input [C,H,W]; kernel is a 1D tensor and may require
/// grad (learnable low-pass filter).
Tensor upsample_axis(const Tensor& input, const Tensor& kernel, int factor,
                     double gain, int axis);

/// Reverse-mode backpropagation from a scalar loss node. Every parameter
/// reachable from the loss accumulates its gradient; unreachable
/// parameters keep their (zeroed) gradient. Calling backward twice on the
/// same loss without rebuilding the graph is a logic error.
void backward(const Tensor& loss);

}  // namespace spectraldip
