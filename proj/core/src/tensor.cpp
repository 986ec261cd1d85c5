#include "spectraldip/tensor.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_set>

namespace spectraldip {

namespace detail {

void TensorNode::ensure_grad() {
  if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}

namespace {

std::int64_t shape_numel(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int d : shape) {
    if (d < 0) throw std::invalid_argument("tensor: negative dimension");
    n *= d;
  }
  return n;
}

std::shared_ptr<TensorNode> make_node(std::vector<int> shape) {
  auto n = std::make_shared<TensorNode>();
  n->shape = std::move(shape);
  n->data.assign(static_cast<std::size_t>(shape_numel(n->shape)), 0.0);
  return n;
}

#ifndef NDEBUG
void debug_check_finite(const TensorNode& n) {
  for (double v : n.data) assert(std::isfinite(v) && "non-finite forward value");
}
#else
void debug_check_finite(const TensorNode&) {}
#endif

bool participates(const TensorNode& n) {
  return n.requires_grad || n.backprop || !n.parents.empty();
}

// Attaches parents/backprop only when some input participates in the tape,
// so purely numeric uses carry no graph. Undefined tensors (e.g. a missing
// bias) are dropped from the parent list.
void attach(const std::shared_ptr<TensorNode>& out,
            std::vector<Tensor> parents,
            std::function<void(TensorNode&)> fn) {
  bool traced = false;
  for (const Tensor& p : parents) {
    const auto& n = p.node();
    if (n && participates(*n)) traced = true;
  }
  if (!traced) return;
  out->parents.reserve(parents.size());
  for (Tensor& p : parents)
    if (p.node()) out->parents.push_back(p.node());
  out->backprop = std::move(fn);
}

}  // namespace
}  // namespace detail

using detail::TensorNode;

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  auto n = detail::make_node(std::move(shape));
  n->requires_grad = requires_grad;
  if (requires_grad) n->ensure_grad();
  return Tensor(std::move(n));
}

Tensor Tensor::full(std::vector<int> shape, double value) {
  Tensor t = zeros(std::move(shape));
  std::fill(t.data().begin(), t.data().end(), value);
  return t;
}

Tensor Tensor::from_data(std::vector<int> shape, std::vector<double> data,
                         bool requires_grad) {
  if (detail::shape_numel(shape) != static_cast<std::int64_t>(data.size()))
    throw std::invalid_argument("tensor: shape does not match data length");
  auto n = std::make_shared<TensorNode>();
  n->shape = std::move(shape);
  n->data = std::move(data);
  n->requires_grad = requires_grad;
  if (requires_grad) n->ensure_grad();
  return Tensor(std::move(n));
}

Tensor Tensor::scalar(double value) { return from_data({1}, {value}); }

const std::vector<int>& Tensor::shape() const { return node_->shape; }
std::int64_t Tensor::size() const { return node_->size(); }
std::vector<double>& Tensor::data() { return node_->data; }
const std::vector<double>& Tensor::data() const { return node_->data; }

double Tensor::item() const {
  if (size() != 1) throw std::logic_error("tensor: item() on non-scalar");
  return node_->data[0];
}

bool Tensor::requires_grad() const { return node_->requires_grad; }
std::vector<double>& Tensor::grad() { return node_->grad; }
const std::vector<double>& Tensor::grad() const { return node_->grad; }

void Tensor::zero_grad() {
  node_->grad.assign(node_->data.size(), 0.0);
  node_->backward_done = false;
}

namespace {

void check_3d(const Tensor& t, const char* what) {
  if (t.shape().size() != 3)
    throw std::invalid_argument(std::string(what) + ": expected a [C,H,W] tensor");
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              int stride, int padding) {
  check_3d(input, "conv2d input");
  if (kernel.shape().size() != 4)
    throw std::invalid_argument("conv2d: kernel must be [Cout,Cin,k,k]");
  const int cin = input.dim(0), h = input.dim(1), w = input.dim(2);
  const int cout = kernel.dim(0), k = kernel.dim(2);
  if (kernel.dim(1) != cin)
    throw std::invalid_argument("conv2d: input channel mismatch");
  if (kernel.dim(3) != k) throw std::invalid_argument("conv2d: non-square kernel");
  if (stride < 1) throw std::invalid_argument("conv2d: stride must be >= 1");
  if (bias.defined() && (bias.shape().size() != 1 || bias.dim(0) != cout))
    throw std::invalid_argument("conv2d: bias must be [Cout]");

  const int oh = (h + 2 * padding - k) / stride + 1;
  const int ow = (w + 2 * padding - k) / stride + 1;
  if (oh <= 0 || ow <= 0) throw std::invalid_argument("conv2d: empty output");

  auto out = detail::make_node({cout, oh, ow});
  const double* x = input.data().data();
  const double* wk = kernel.data().data();
  double* y = out->data.data();

  for (int co = 0; co < cout; ++co) {
    double* ych = y + static_cast<std::ptrdiff_t>(co) * oh * ow;
    if (bias.defined()) {
      const double b = bias.data()[static_cast<std::size_t>(co)];
      std::fill(ych, ych + static_cast<std::ptrdiff_t>(oh) * ow, b);
    }
    for (int ci = 0; ci < cin; ++ci) {
      const double* xch = x + static_cast<std::ptrdiff_t>(ci) * h * w;
      const double* wch = wk + (static_cast<std::ptrdiff_t>(co) * cin + ci) * k * k;
      for (int ky = 0; ky < k; ++ky) {
        for (int kx = 0; kx < k; ++kx) {
          const double wv = wch[ky * k + kx];
          if (wv == 0.0) continue;
          for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy * stride + ky - padding;
            if (iy < 0 || iy >= h) continue;
            const double* xrow = xch + static_cast<std::ptrdiff_t>(iy) * w;
            double* yrow = ych + static_cast<std::ptrdiff_t>(oy) * ow;
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * stride + kx - padding;
              if (ix < 0 || ix >= w) continue;
              yrow[ox] += wv * xrow[ix];
            }
          }
        }
      }
    }
  }
  detail::debug_check_finite(*out);

  detail::attach(out, {input, kernel, bias},
                 [stride, padding, cin, cout, h, w, k, oh, ow](TensorNode& o) {
    auto& xin = *o.parents[0];
    auto& ker = *o.parents[1];
    auto bia = o.parents.size() > 2 ? o.parents[2] : nullptr;
    const double* gy = o.grad.data();

    if (detail::participates(xin)) {
    xin.ensure_grad();
    double* gx = xin.grad.data();
    const double* wk = ker.data.data();
    for (int co = 0; co < cout; ++co) {
      const double* gych = gy + static_cast<std::ptrdiff_t>(co) * oh * ow;
      for (int ci = 0; ci < cin; ++ci) {
        double* gxch = gx + static_cast<std::ptrdiff_t>(ci) * h * w;
        const double* wch = wk + (static_cast<std::ptrdiff_t>(co) * cin + ci) * k * k;
        for (int ky = 0; ky < k; ++ky) {
          for (int kx = 0; kx < k; ++kx) {
            const double wv = wch[ky * k + kx];
            if (wv == 0.0) continue;
            for (int oy = 0; oy < oh; ++oy) {
              const int iy = oy * stride + ky - padding;
              if (iy < 0 || iy >= h) continue;
              const double* gyrow = gych + static_cast<std::ptrdiff_t>(oy) * ow;
              double* gxrow = gxch + static_cast<std::ptrdiff_t>(iy) * w;
              for (int ox = 0; ox < ow; ++ox) {
                const int ix = ox * stride + kx - padding;
                if (ix < 0 || ix >= w) continue;
                gxrow[ix] += wv * gyrow[ox];
              }
            }
          }
        }
      }
    }

    }

    ker.ensure_grad();
    double* gw = ker.grad.data();
    const double* x = xin.data.data();
    for (int co = 0; co < cout; ++co) {
      const double* gych = gy + static_cast<std::ptrdiff_t>(co) * oh * ow;
      for (int ci = 0; ci < cin; ++ci) {
        const double* xch = x + static_cast<std::ptrdiff_t>(ci) * h * w;
        double* gwch = gw + (static_cast<std::ptrdiff_t>(co) * cin + ci) * k * k;
        for (int ky = 0; ky < k; ++ky) {
          for (int kx = 0; kx < k; ++kx) {
            double acc = 0.0;
            for (int oy = 0; oy < oh; ++oy) {
              const int iy = oy * stride + ky - padding;
              if (iy < 0 || iy >= h) continue;
              const double* xrow = xch + static_cast<std::ptrdiff_t>(iy) * w;
              const double* gyrow = gych + static_cast<std::ptrdiff_t>(oy) * ow;
              for (int ox = 0; ox < ow; ++ox) {
                const int ix = ox * stride + kx - padding;
                if (ix < 0 || ix >= w) continue;
                acc += xrow[ix] * gyrow[ox];
              }
            }
            gwch[ky * k + kx] += acc;
          }
        }
      }
    }

    if (bia) {
      bia->ensure_grad();
      for (int co = 0; co < cout; ++co) {
        double acc = 0.0;
        const double* gych = gy + static_cast<std::ptrdiff_t>(co) * oh * ow;
        for (int i = 0; i < oh * ow; ++i) acc += gych[i];
        bia->grad[static_cast<std::size_t>(co)] += acc;
      }
    }
  });
  return Tensor(std::move(out));
}

namespace {

Tensor unary_elementwise(const Tensor& input,
                         const std::function<double(double)>& f,
                         const std::function<double(double)>& dfdx_from_x) {
  auto out = detail::make_node(input.shape());
  const auto& x = input.data();
  for (std::size_t i = 0; i < x.size(); ++i) out->data[i] = f(x[i]);
  detail::debug_check_finite(*out);
  detail::attach(out, {input}, [dfdx_from_x](TensorNode& o) {
    auto& in = *o.parents[0];
    in.ensure_grad();
    for (std::size_t i = 0; i < o.grad.size(); ++i)
      in.grad[i] += o.grad[i] * dfdx_from_x(in.data[i]);
  });
  return Tensor(std::move(out));
}

}  // namespace

Tensor relu(const Tensor& input) {
  return unary_elementwise(
      input, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& input, double slope) {
  return unary_elementwise(
      input, [slope](double v) { return v > 0.0 ? v : slope * v; },
      [slope](double v) { return v > 0.0 ? 1.0 : slope; });
}

Tensor sigmoid(const Tensor& input) {
  auto out = detail::make_node(input.shape());
  const auto& x = input.data();
  for (std::size_t i = 0; i < x.size(); ++i) out->data[i] = 1.0 / (1.0 + std::exp(-x[i]));
  detail::debug_check_finite(*out);
  detail::attach(out, {input}, [](TensorNode& o) {
    auto& in = *o.parents[0];
    in.ensure_grad();
    for (std::size_t i = 0; i < o.grad.size(); ++i) {
      const double s = o.data[i];
      in.grad[i] += o.grad[i] * s * (1.0 - s);
    }
  });
  return Tensor(std::move(out));
}

Tensor channel_norm(const Tensor& input, const Tensor& scale,
                    const Tensor& shift, double eps) {
  check_3d(input, "channel_norm");
  const int c = input.dim(0), h = input.dim(1), w = input.dim(2);
  const std::int64_t n = static_cast<std::int64_t>(h) * w;
  if (n < 1) throw std::invalid_argument("channel_norm: empty channel");
  if (scale.size() != c || shift.size() != c)
    throw std::invalid_argument("channel_norm: scale/shift must be [C]");

  auto out = detail::make_node(input.shape());
  // Per-channel statistics are cached for the backward pass.
  auto mean = std::make_shared<std::vector<double>>(static_cast<std::size_t>(c));
  auto inv_std = std::make_shared<std::vector<double>>(static_cast<std::size_t>(c));

  const double* x = input.data().data();
  double* y = out->data.data();
  for (int ch = 0; ch < c; ++ch) {
    const double* xc = x + static_cast<std::ptrdiff_t>(ch) * n;
    double* yc = y + static_cast<std::ptrdiff_t>(ch) * n;
    double m = 0.0;
    for (std::int64_t i = 0; i < n; ++i) m += xc[i];
    m /= static_cast<double>(n);
    double var = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      const double d = xc[i] - m;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const double is = 1.0 / std::sqrt(var + eps);
    (*mean)[static_cast<std::size_t>(ch)] = m;
    (*inv_std)[static_cast<std::size_t>(ch)] = is;
    const double g = scale.data()[static_cast<std::size_t>(ch)];
    const double b = shift.data()[static_cast<std::size_t>(ch)];
    for (std::int64_t i = 0; i < n; ++i) yc[i] = g * (xc[i] - m) * is + b;
  }
  detail::debug_check_finite(*out);

  detail::attach(out, {input, scale, shift}, [mean, inv_std, c, n](TensorNode& o) {
    auto& xin = *o.parents[0];
    auto& sc = *o.parents[1];
    auto& sh = *o.parents[2];
    xin.ensure_grad();
    sc.ensure_grad();
    sh.ensure_grad();
    const double* x = xin.data.data();
    const double* gy = o.grad.data();
    for (int ch = 0; ch < c; ++ch) {
      const double m = (*mean)[static_cast<std::size_t>(ch)];
      const double is = (*inv_std)[static_cast<std::size_t>(ch)];
      const double g = sc.data[static_cast<std::size_t>(ch)];
      const double* xc = x + static_cast<std::ptrdiff_t>(ch) * n;
      const double* gyc = gy + static_cast<std::ptrdiff_t>(ch) * n;
      double* gxc = xin.grad.data() + static_cast<std::ptrdiff_t>(ch) * n;

      double sum_gy = 0.0, sum_gy_xhat = 0.0;
      for (std::int64_t i = 0; i < n; ++i) {
        const double xhat = (xc[i] - m) * is;
        sum_gy += gyc[i];
        sum_gy_xhat += gyc[i] * xhat;
      }
      sc.grad[static_cast<std::size_t>(ch)] += sum_gy_xhat;
      sh.grad[static_cast<std::size_t>(ch)] += sum_gy;

      const double inv_n = 1.0 / static_cast<double>(n);
      for (std::int64_t i = 0; i < n; ++i) {
        const double xhat = (xc[i] - m) * is;
        gxc[i] += g * is * (gyc[i] - sum_gy * inv_n - xhat * sum_gy_xhat * inv_n);
      }
    }
  });
  return Tensor(std::move(out));
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  check_3d(a, "concat_channels");
  check_3d(b, "concat_channels");
  if (a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2))
    throw std::invalid_argument("concat_channels: spatial dims differ");
  const int ca = a.dim(0), cb = b.dim(0), h = a.dim(1), w = a.dim(2);
  auto out = detail::make_node({ca + cb, h, w});
  std::copy(a.data().begin(), a.data().end(), out->data.begin());
  std::copy(b.data().begin(), b.data().end(), out->data.begin() + a.size());
  detail::attach(out, {a, b}, [na = a.size()](TensorNode& o) {
    auto& pa = *o.parents[0];
    auto& pb = *o.parents[1];
    pa.ensure_grad();
    pb.ensure_grad();
    for (std::int64_t i = 0; i < na; ++i) pa.grad[static_cast<std::size_t>(i)] += o.grad[static_cast<std::size_t>(i)];
    const std::int64_t nb = o.size() - na;
    for (std::int64_t i = 0; i < nb; ++i)
      pb.grad[static_cast<std::size_t>(i)] += o.grad[static_cast<std::size_t>(na + i)];
  });
  return Tensor(std::move(out));
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) throw std::invalid_argument("add: shape mismatch");
  auto out = detail::make_node(a.shape());
  for (std::size_t i = 0; i < out->data.size(); ++i)
    out->data[i] = a.data()[i] + b.data()[i];
  detail::attach(out, {a, b}, [](TensorNode& o) {
    for (int p = 0; p < 2; ++p) {
      auto& t = *o.parents[static_cast<std::size_t>(p)];
      t.ensure_grad();
      for (std::size_t i = 0; i < o.grad.size(); ++i) t.grad[i] += o.grad[i];
    }
  });
  return Tensor(std::move(out));
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) throw std::invalid_argument("mul: shape mismatch");
  auto out = detail::make_node(a.shape());
  for (std::size_t i = 0; i < out->data.size(); ++i)
    out->data[i] = a.data()[i] * b.data()[i];
  detail::attach(out, {a, b}, [](TensorNode& o) {
    auto& pa = *o.parents[0];
    auto& pb = *o.parents[1];
    pa.ensure_grad();
    pb.ensure_grad();
    for (std::size_t i = 0; i < o.grad.size(); ++i) {
      pa.grad[i] += o.grad[i] * pb.data[i];
      pb.grad[i] += o.grad[i] * pa.data[i];
    }
  });
  return Tensor(std::move(out));
}

Tensor sum(const Tensor& input) {
  auto out = detail::make_node({1});
  double acc = 0.0;
  for (double v : input.data()) acc += v;
  out->data[0] = acc;
  detail::attach(out, {input}, [](TensorNode& o) {
    auto& in = *o.parents[0];
    in.ensure_grad();
    const double g = o.grad[0];
    for (auto& v : in.grad) v += g;
  });
  return Tensor(std::move(out));
}

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape())
    throw std::invalid_argument("mse_loss: shape mismatch");
  auto out = detail::make_node({1});
  const auto& p = pred.data();
  const auto& t = target.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - t[i];
    acc += d * d;
  }
  out->data[0] = acc / static_cast<double>(p.size());
  detail::attach(out, {pred, target}, [](TensorNode& o) {
    auto& p = *o.parents[0];
    auto& t = *o.parents[1];
    p.ensure_grad();
    const double g = o.grad[0] * 2.0 / static_cast<double>(p.data.size());
    for (std::size_t i = 0; i < p.data.size(); ++i)
      p.grad[i] += g * (p.data[i] - t.data[i]);
    if (t.requires_grad || t.backprop || !t.parents.empty()) {
      t.ensure_grad();
      for (std::size_t i = 0; i < t.data.size(); ++i)
        t.grad[i] -= g * (p.data[i] - t.data[i]);
    }
  });
  return Tensor(std::move(out));
}

namespace {

// out(i) = gain * sum_j k(j) * u(i + c - j) with u the zero-inserted signal
// and c = (len-1)/2; zero padding outside. The adjoint is correlation with
// the same kernel followed by stride-R sampling.
void upsample_line(const double* x, std::int64_t n, int factor,
                   const double* k, int klen, double gain, double* y,
                   std::int64_t stride_x, std::int64_t stride_y) {
  const std::int64_t m = n * factor;
  const int c = (klen - 1) / 2;
  for (std::int64_t i = 0; i < m; ++i) {
    double acc = 0.0;
    // u(q) is nonzero only at q = factor*t.
    // q = i + c - j in [0, m) and q % factor == 0.
    for (int j = 0; j < klen; ++j) {
      const std::int64_t q = i + c - j;
      if (q < 0 || q >= m || q % factor != 0) continue;
      acc += k[j] * x[(q / factor) * stride_x];
    }
    y[i * stride_y] = gain * acc;
  }
}

void upsample_line_adjoint(const double* gy, std::int64_t n, int factor,
                           const double* k, int klen, double gain, double* gx,
                           std::int64_t stride_gy, std::int64_t stride_gx) {
  const std::int64_t m = n * factor;
  const int c = (klen - 1) / 2;
  for (std::int64_t t = 0; t < n; ++t) {
    const std::int64_t q = t * factor;
    double acc = 0.0;
    for (int j = 0; j < klen; ++j) {
      const std::int64_t i = q - c + j;
      if (i < 0 || i >= m) continue;
      acc += k[j] * gy[i * stride_gy];
    }
    gx[t * stride_gx] += gain * acc;
  }
}

void upsample_line_kernel_grad(const double* x, std::int64_t n, int factor,
                               const double* gy, int klen, double gain,
                               double* gk, std::int64_t stride_x,
                               std::int64_t stride_gy) {
  const std::int64_t m = n * factor;
  const int c = (klen - 1) / 2;
  for (int j = 0; j < klen; ++j) {
    double acc = 0.0;
    for (std::int64_t t = 0; t < n; ++t) {
      const std::int64_t i = t * factor - c + j;
      if (i < 0 || i >= m) continue;
      acc += x[t * stride_x] * gy[i * stride_gy];
    }
    gk[j] += gain * acc;
  }
}

}  // namespace

Tensor upsample_axis(const Tensor& input, const Tensor& kernel, int factor,
                     double gain, int axis) {
  check_3d(input, "upsample_axis");
  if (axis != 1 && axis != 2) throw std::invalid_argument("upsample_axis: axis must be 1 or 2");
  if (factor < 2) throw std::invalid_argument("upsample_axis: factor must be >= 2");
  if (kernel.shape().size() != 1 || kernel.size() < 1)
    throw std::invalid_argument("upsample_axis: kernel must be a non-empty 1D tensor");

  const int c = input.dim(0), h = input.dim(1), w = input.dim(2);
  const int oh = axis == 1 ? h * factor : h;
  const int ow = axis == 2 ? w * factor : w;
  auto out = detail::make_node({c, oh, ow});
  const double* x = input.data().data();
  const double* k = kernel.data().data();
  const int klen = static_cast<int>(kernel.size());
  double* y = out->data.data();

  for (int ch = 0; ch < c; ++ch) {
    const double* xc = x + static_cast<std::ptrdiff_t>(ch) * h * w;
    double* yc = y + static_cast<std::ptrdiff_t>(ch) * oh * ow;
    if (axis == 2) {
      for (int row = 0; row < h; ++row)
        upsample_line(xc + static_cast<std::ptrdiff_t>(row) * w, w, factor, k,
                      klen, gain, yc + static_cast<std::ptrdiff_t>(row) * ow, 1, 1);
    } else {
      for (int col = 0; col < w; ++col)
        upsample_line(xc + col, h, factor, k, klen, gain, yc + col, w, ow);
    }
  }
  detail::debug_check_finite(*out);

  detail::attach(out, {input, kernel},
                 [factor, gain, axis, c, h, w, oh, ow](TensorNode& o) {
    auto& xin = *o.parents[0];
    auto& ker = *o.parents[1];
    const double* k = ker.data.data();
    const int klen = static_cast<int>(ker.data.size());
    const double* gy = o.grad.data();

    if (detail::participates(xin)) {
      xin.ensure_grad();
      for (int ch = 0; ch < c; ++ch) {
        const double* gyc = gy + static_cast<std::ptrdiff_t>(ch) * oh * ow;
        double* gxc = xin.grad.data() + static_cast<std::ptrdiff_t>(ch) * h * w;
        if (axis == 2) {
          for (int row = 0; row < h; ++row)
            upsample_line_adjoint(gyc + static_cast<std::ptrdiff_t>(row) * ow, w,
                                  factor, k, klen, gain,
                                  gxc + static_cast<std::ptrdiff_t>(row) * w, 1, 1);
        } else {
          for (int col = 0; col < w; ++col)
            upsample_line_adjoint(gyc + col, h, factor, k, klen, gain, gxc + col,
                                  ow, w);
        }
      }
    }

    if (detail::participates(ker)) {
      ker.ensure_grad();
      const double* x = xin.data.data();
      for (int ch = 0; ch < c; ++ch) {
        const double* xc = x + static_cast<std::ptrdiff_t>(ch) * h * w;
        const double* gyc = gy + static_cast<std::ptrdiff_t>(ch) * oh * ow;
        if (axis == 2) {
          for (int row = 0; row < h; ++row)
            upsample_line_kernel_grad(xc + static_cast<std::ptrdiff_t>(row) * w,
                                      w, factor,
                                      gyc + static_cast<std::ptrdiff_t>(row) * ow,
                                      klen, gain, ker.grad.data(), 1, 1);
        } else {
          for (int col = 0; col < w; ++col)
            upsample_line_kernel_grad(xc + col, h, factor, gyc + col, klen,
                                      gain, ker.grad.data(), w, ow);
        }
      }
    }
  });
  return Tensor(std::move(out));
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1)
    throw std::logic_error("backward: loss must be a defined scalar");
  auto root = loss.node();
  if (root->backward_done)
    throw std::logic_error("backward: already called on this tape");
  if (!root->backprop && root->parents.empty())
    throw std::logic_error("backward: loss is not part of a taped graph");

  // Postorder DFS gives a topological order; visiting in reverse runs each
  // node's backprop after all its consumers.
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> seen;
  std::vector<std::pair<TensorNode*, std::size_t>> stack;
  stack.emplace_back(root.get(), 0);
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      TensorNode* p = node->parents[next++].get();
      if (seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->ensure_grad();
  root->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorNode* n = *it;
    if (n->backprop && !n->grad.empty()) n->backprop(*n);
  }
  root->backward_done = true;
}

}  // namespace spectraldip
