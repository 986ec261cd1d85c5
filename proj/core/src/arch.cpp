#include "spectraldip/arch.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace spectraldip {

using nlohmann::json;

std::string family_name(Family f) {
  switch (f) {
    case Family::Hourglass: return "hourglass";
    case Family::ConvDecoder: return "conv_decoder";
    case Family::MlpDecoder: return "mlp_decoder";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  if (name == "hourglass") return Family::Hourglass;
  if (name == "conv_decoder" || name == "convdecoder") return Family::ConvDecoder;
  if (name == "mlp_decoder" || name == "mlpdecoder") return Family::MlpDecoder;
  throw std::invalid_argument("unknown family '" + name + "'");
}

int ArchSpec::levels() const {
  return family == Family::Hourglass ? depth_levels : effective_num_conv_layers();
}

int ArchSpec::width_at(int i) const {
  if (width.empty()) throw std::invalid_argument("arch: empty width");
  if (width.size() == 1) return width[0];
  return width.at(static_cast<std::size_t>(i));
}

int ArchSpec::skip_at(int t) const {
  if (t < 0 || t >= static_cast<int>(skip_channels.size())) return 0;
  return skip_channels[static_cast<std::size_t>(t)];
}

int ArchSpec::effective_input_channels() const {
  if (input_channels > 0) return input_channels;
  return family == Family::Hourglass ? 32 : 128;
}

int ArchSpec::effective_num_conv_layers() const {
  return num_conv_layers > 0 ? num_conv_layers : depth_levels;
}

void ArchSpec::validate() const {
  if (depth_levels < 0) throw std::invalid_argument("arch: depth_levels < 0");
  if (family == Family::Hourglass && depth_levels < 1)
    throw std::invalid_argument("arch: hourglass needs depth_levels >= 1");
  if (kernel_size != 1 && kernel_size != 3)
    throw std::invalid_argument("arch: kernel_size must be 1 or 3");
  if (family == Family::MlpDecoder && kernel_size != 1)
    throw std::invalid_argument("arch: mlp_decoder requires kernel_size 1");
  if (width.empty()) throw std::invalid_argument("arch: width empty");
  for (int w : width)
    if (w < 1) throw std::invalid_argument("arch: width must be positive");
  if (width.size() != 1 && static_cast<int>(width.size()) < levels())
    throw std::invalid_argument("arch: per-level width list shorter than levels");
  if (family != Family::Hourglass &&
      effective_num_conv_layers() < depth_levels)
    throw std::invalid_argument("arch: num_conv_layers must be >= depth_levels");
  if (family == Family::Hourglass &&
      upsampler.kind == UpsamplerSpec::Kind::None)
    throw std::invalid_argument("arch: hourglass requires an upsampler");
  if (output_channels < 1)
    throw std::invalid_argument("arch: output_channels must be >= 1");
  if (upsampler.kind != UpsamplerSpec::Kind::None && upsampler.factor < 2)
    throw std::invalid_argument("arch: upsample factor must be >= 2");
}

namespace {

json upsampler_to_json(const UpsamplerSpec& u) {
  json j;
  switch (u.kind) {
    case UpsamplerSpec::Kind::None: j["kind"] = "none"; break;
    case UpsamplerSpec::Kind::NearestNeighbor: j["kind"] = "nn"; break;
    case UpsamplerSpec::Kind::Bilinear: j["kind"] = "bilinear"; break;
    case UpsamplerSpec::Kind::TransposedConv: j["kind"] = "transposed"; break;
    case UpsamplerSpec::Kind::CustomLPF:
      j["kind"] = "custom_lpf";
      if (u.stopband_db) j["stopband_db"] = *u.stopband_db;
      j["kernel"] = u.kernel;
      j["gain"] = u.gain;
      break;
  }
  j["factor"] = u.factor;
  return j;
}

UpsamplerSpec upsampler_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const int factor = j.value("factor", 2);
  if (kind == "none") return UpsamplerSpec::none();
  if (kind == "nn") return UpsamplerSpec::nearest(factor);
  if (kind == "bilinear") return UpsamplerSpec::bilinear(factor);
  if (kind == "transposed") return UpsamplerSpec::transposed(factor);
  if (kind == "custom_lpf") {
    if (j.contains("kernel")) {
      UpsamplerSpec u;
      u.kind = UpsamplerSpec::Kind::CustomLPF;
      u.factor = factor;
      u.kernel = j.at("kernel").get<std::vector<double>>();
      u.gain = j.value("gain", 1.0);
      if (j.contains("stopband_db")) u.stopband_db = j.at("stopband_db").get<double>();
      return u;
    }
    return UpsamplerSpec::kaiser(j.at("stopband_db").get<double>(), factor);
  }
  throw std::invalid_argument("arch: unknown upsampler kind '" + kind + "'");
}

}  // namespace

std::string ArchSpec::to_json() const {
  json j;
  j["version"] = 1;
  j["family"] = family_name(family);
  j["depth_levels"] = depth_levels;
  j["width"] = width;
  j["skip_channels"] = skip_channels;
  j["upsampler"] = upsampler_to_json(upsampler);
  j["kernel_size"] = kernel_size;
  j["num_conv_layers"] = effective_num_conv_layers();
  j["input_channels"] = effective_input_channels();
  j["output_channels"] = output_channels;
  return j.dump(2);
}

ArchSpec ArchSpec::from_json(const std::string& text) {
  const json j = json::parse(text);
  if (j.at("version").get<int>() != 1)
    throw std::invalid_argument("arch: unsupported version");
  ArchSpec s;
  s.family = parse_family(j.at("family").get<std::string>());
  s.depth_levels = j.at("depth_levels").get<int>();
  if (j.at("width").is_number())
    s.width = {j.at("width").get<int>()};
  else
    s.width = j.at("width").get<std::vector<int>>();
  s.skip_channels = j.value("skip_channels", std::vector<int>{});
  s.upsampler = upsampler_from_json(j.at("upsampler"));
  s.kernel_size = j.at("kernel_size").get<int>();
  s.num_conv_layers = j.value("num_conv_layers", 0);
  s.input_channels = j.value("input_channels", 0);
  s.output_channels = j.value("output_channels", 1);
  s.validate();
  return s;
}

ArchSpec ArchSpec::dip_baseline(int output_channels) {
  ArchSpec s;
  s.family = Family::Hourglass;
  s.depth_levels = 5;
  s.width = {128};
  s.skip_channels.assign(5, 32);
  s.upsampler = UpsamplerSpec::bilinear();
  s.kernel_size = 3;
  s.input_channels = 32;
  s.output_channels = output_channels;
  return s;
}

ArchSpec ArchSpec::conv_decoder_base(int output_channels) {
  ArchSpec s;
  s.family = Family::ConvDecoder;
  s.depth_levels = 5;
  s.num_conv_layers = 6;
  s.width = {128};
  s.upsampler = UpsamplerSpec::bilinear();
  s.kernel_size = 3;
  s.input_channels = 128;
  s.output_channels = output_channels;
  return s;
}

namespace {

struct ParamInit {
  std::mt19937_64 rng;
  explicit ParamInit(std::uint64_t seed) : rng(seed) {}

  Tensor kaiming_conv(int cout, int cin, int k) {
    const double bound = std::sqrt(6.0 / (static_cast<double>(cin) * k * k));
    std::uniform_real_distribution<double> dist(-bound, bound);
    std::vector<double> w(static_cast<std::size_t>(cout) * cin * k * k);
    for (double& v : w) v = dist(rng);
    return Tensor::from_data({cout, cin, k, k}, std::move(w), true);
  }
  Tensor zeros_param(int n) { return Tensor::zeros({n}, true); }
  Tensor ones_param(int n) {
    Tensor t = Tensor::full({n}, 1.0);
    return Tensor::from_data({n}, t.data(), true);
  }
  Tensor noisy_kernel(const std::vector<double>& base) {
    std::uniform_real_distribution<double> dist(-0.01, 0.01);
    std::vector<double> k = base;
    for (double& v : k) v += dist(rng);
    return Tensor::from_data({static_cast<int>(k.size())}, std::move(k), true);
  }
};

}  // namespace

Network::Network(ArchSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  spec_.validate();
  ParamInit init(seed);
  const int k = spec_.kernel_size;
  const int pad = (k - 1) / 2;
  (void)pad;

  const bool learnable_up =
      spec_.upsampler.kind == UpsamplerSpec::Kind::TransposedConv;
  if (spec_.upsampler.kind != UpsamplerSpec::Kind::None && !learnable_up) {
    LpfDesign d = design_lpf(spec_.upsampler);
    fixed_kernel_ = std::move(d.kernel);
    fixed_gain_ = d.gain;
  }

  auto add_block = [&](int cin, int cout, int stride) {
    ConvBlock blk;
    blk.w = init.kaiming_conv(cout, cin, k);
    blk.b = init.zeros_param(cout);
    blk.scale = init.ones_param(cout);
    blk.shift = init.zeros_param(cout);
    blk.stride = stride;
    params_.push_back(blk.w);
    params_.push_back(blk.b);
    params_.push_back(blk.scale);
    params_.push_back(blk.shift);
    return blk;
  };
  auto add_up_kernel = [&]() {
    if (!learnable_up) {
      up_kernels_.emplace_back();
      return;
    }
    Tensor t = init.noisy_kernel(design_lpf_bilinear().kernel);
    up_kernels_.push_back(t);
    params_.push_back(t);
  };

  if (spec_.family == Family::Hourglass) {
    const int d = spec_.depth_levels;
    int prev = spec_.effective_input_channels();
    for (int l = 1; l <= d; ++l) {
      encoder_.push_back(add_block(prev, spec_.width_at(l - 1), 2));
      prev = spec_.width_at(l - 1);
    }
    skip_convs_w_.resize(static_cast<std::size_t>(d));
    skip_convs_b_.resize(static_cast<std::size_t>(d));
    for (int t = d - 1; t >= 0; --t) {
      add_up_kernel();
      const int src_channels =
          t == 0 ? spec_.effective_input_channels() : spec_.width_at(t - 1);
      const int sc = spec_.skip_at(t);
      if (sc > 0) {
        Tensor w = init.kaiming_conv(sc, src_channels, 1);
        Tensor b = init.zeros_param(sc);
        skip_convs_w_[static_cast<std::size_t>(t)] = w;
        skip_convs_b_[static_cast<std::size_t>(t)] = b;
        params_.push_back(w);
        params_.push_back(b);
      }
      const int cin = (t == d - 1 ? spec_.width_at(d - 1) : spec_.width_at(t + 1)) + sc;
      decoder_.push_back(add_block(cin, spec_.width_at(t), 1));
      prev = spec_.width_at(t);
    }
    head_w_ = init.kaiming_conv(spec_.output_channels, prev, 1);
  } else {
    const int layers = spec_.effective_num_conv_layers();
    int prev = spec_.effective_input_channels();
    for (int i = 1; i <= layers; ++i) {
      decoder_.push_back(add_block(prev, spec_.width_at(i - 1), 1));
      prev = spec_.width_at(i - 1);
      if (i <= spec_.depth_levels &&
          spec_.upsampler.kind != UpsamplerSpec::Kind::None)
        add_up_kernel();
    }
    head_w_ = init.kaiming_conv(spec_.output_channels, prev, 1);
  }
  head_b_ = init.zeros_param(spec_.output_channels);
  params_.push_back(head_w_);
  params_.push_back(head_b_);
}

Tensor Network::conv_block(const Tensor& x, const ConvBlock& blk, int pad,
                           bool leaky) const {
  Tensor y = conv2d(x, blk.w, blk.b, blk.stride, pad);
  y = channel_norm(y, blk.scale, blk.shift, 1e-5);
  return leaky ? leaky_relu(y, 0.1) : relu(y);
}

Tensor Network::apply_upsample(const Tensor& x, int stage) const {
  const UpsamplerSpec& u = spec_.upsampler;
  Tensor kernel;
  double gain = 1.0;
  if (u.kind == UpsamplerSpec::Kind::TransposedConv) {
    kernel = up_kernels_.at(static_cast<std::size_t>(stage));
  } else {
    kernel = Tensor::from_data({static_cast<int>(fixed_kernel_.size())},
                               fixed_kernel_);
    gain = fixed_gain_;
  }
  Tensor y = upsample_axis(x, kernel, u.factor, gain, 2);
  return upsample_axis(y, kernel, u.factor, gain, 1);
}

std::pair<int, int> Network::input_spatial(int out_h, int out_w) const {
  if (spec_.family == Family::Hourglass) {
    const int div = 1 << spec_.depth_levels;
    if (out_h % div != 0 || out_w % div != 0)
      throw std::invalid_argument(
          "network: spatial size must be divisible by 2^depth_levels");
    return {out_h, out_w};
  }
  if (spec_.upsampler.kind == UpsamplerSpec::Kind::None) return {out_h, out_w};
  int div = 1;
  for (int i = 0; i < spec_.depth_levels; ++i) div *= spec_.upsampler.factor;
  if (out_h % div != 0 || out_w % div != 0)
    throw std::invalid_argument(
        "network: spatial size must be divisible by factor^depth_levels");
  return {out_h / div, out_w / div};
}

Tensor Network::forward(const Tensor& z) const {
  if (z.shape().size() != 3 || z.dim(0) != spec_.effective_input_channels())
    throw std::invalid_argument("network: bad input tensor shape");
  const int pad = (spec_.kernel_size - 1) / 2;

  if (spec_.family == Family::Hourglass) {
    const int d = spec_.depth_levels;
    const int div = 1 << d;
    if (z.dim(1) % div != 0 || z.dim(2) % div != 0)
      throw std::invalid_argument(
          "network: spatial size must be divisible by 2^depth_levels");

    std::vector<Tensor> e(static_cast<std::size_t>(d) + 1);
    e[0] = z;
    for (int l = 1; l <= d; ++l)
      e[static_cast<std::size_t>(l)] =
          conv_block(e[static_cast<std::size_t>(l - 1)],
                     encoder_[static_cast<std::size_t>(l - 1)], pad, true);

    Tensor x = e[static_cast<std::size_t>(d)];
    int stage = 0;
    for (int t = d - 1; t >= 0; --t, ++stage) {
      x = apply_upsample(x, stage);
      if (spec_.skip_at(t) > 0) {
        Tensor s = conv2d(e[static_cast<std::size_t>(t)],
                          skip_convs_w_[static_cast<std::size_t>(t)],
                          skip_convs_b_[static_cast<std::size_t>(t)], 1, 0);
        x = concat_channels(x, s);
      }
      x = conv_block(x, decoder_[static_cast<std::size_t>(stage)], pad, true);
    }
    return sigmoid(conv2d(x, head_w_, head_b_, 1, 0));
  }

  Tensor x = z;
  int stage = 0;
  const int layers = spec_.effective_num_conv_layers();
  for (int i = 1; i <= layers; ++i) {
    x = conv_block(x, decoder_[static_cast<std::size_t>(i - 1)], pad, false);
    if (i <= spec_.depth_levels &&
        spec_.upsampler.kind != UpsamplerSpec::Kind::None) {
      x = apply_upsample(x, stage);
      ++stage;
    }
  }
  return sigmoid(conv2d(x, head_w_, head_b_, 1, 0));
}

Network build_network(const ArchSpec& spec, std::uint64_t seed) {
  return Network(spec, seed);
}

std::int64_t param_count(const ArchSpec& spec) {
  spec.validate();
  const auto conv = [](int cin, int cout, int k) {
    return static_cast<std::int64_t>(k) * k * cin * cout + cout;
  };
  const auto norm = [](int c) { return static_cast<std::int64_t>(2) * c; };
  const int k = spec.kernel_size;
  const bool learnable_up =
      spec.upsampler.kind == UpsamplerSpec::Kind::TransposedConv;
  const std::int64_t up_taps =
      learnable_up ? static_cast<std::int64_t>(2 * spec.upsampler.factor - 1) : 0;

  std::int64_t total = 0;
  if (spec.family == Family::Hourglass) {
    const int d = spec.depth_levels;
    int prev = spec.effective_input_channels();
    for (int l = 1; l <= d; ++l) {
      total += conv(prev, spec.width_at(l - 1), k) + norm(spec.width_at(l - 1));
      prev = spec.width_at(l - 1);
    }
    for (int t = d - 1; t >= 0; --t) {
      total += up_taps;
      const int src = t == 0 ? spec.effective_input_channels() : spec.width_at(t - 1);
      const int sc = spec.skip_at(t);
      if (sc > 0) total += conv(src, sc, 1);
      const int cin = (t == d - 1 ? spec.width_at(d - 1) : spec.width_at(t + 1)) + sc;
      total += conv(cin, spec.width_at(t), k) + norm(spec.width_at(t));
      prev = spec.width_at(t);
    }
    total += conv(prev, spec.output_channels, 1);
  } else {
    const int layers = spec.effective_num_conv_layers();
    int prev = spec.effective_input_channels();
    for (int i = 1; i <= layers; ++i) {
      total += conv(prev, spec.width_at(i - 1), k) + norm(spec.width_at(i - 1));
      prev = spec.width_at(i - 1);
      if (i <= spec.depth_levels &&
          spec.upsampler.kind != UpsamplerSpec::Kind::None)
        total += up_taps;
    }
    total += conv(prev, spec.output_channels, 1);
  }
  return total;
}

ArchSpec recommend_arch(const TextureFeatures& features, Family family,
                        const WidthClassifier& classifier,
                        int output_channels) {
  const int w = classify_width(features, classifier);
  ArchSpec s;
  s.family = family;
  s.width = {w};
  s.upsampler = UpsamplerSpec::bilinear();
  s.output_channels = output_channels;
  if (family == Family::Hourglass) {
    s.depth_levels = 2;
    s.kernel_size = 3;
    if (w == 128) s.skip_channels = {0, w / 4};
  } else {
    s.num_conv_layers = 6;
    s.depth_levels = w == 128 ? 2 : (w == 64 ? 3 : 5);
    s.kernel_size = family == Family::MlpDecoder ? 1 : 3;
  }
  s.validate();
  return s;
}

}  // namespace spectraldip
