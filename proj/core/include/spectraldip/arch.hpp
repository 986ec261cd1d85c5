#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spectraldip/classifier.hpp"
#include "spectraldip/resample.hpp"
#include "spectraldip/tensor.hpp"
#include "spectraldip/texture.hpp"

namespace spectraldip {

enum class Family { Hourglass, ConvDecoder, MlpDecoder };

std::string family_name(Family f);
Family parse_family(const std::string& name);

/// Declarative network description.
///
/// Hourglass: depth_levels stride-2 encoder blocks, then per decoder stage
/// (upsample -> optional skip concat -> conv -> channel_norm -> leaky_relu),
/// 1x1 sigmoid head. skip_channels[t] routes encoder activation e_t (t = 0
/// is the network input) through a 1x1 conv into the decoder stage working
/// at resolution H/2^t.
///
/// ConvDecoder / MlpDecoder: num_conv_layers blocks of
/// (conv -> channel_norm -> relu) with an upsample after each of the first
/// depth_levels blocks, 1x1 sigmoid head. MlpDecoder uses 1x1 convs.
struct ArchSpec {
  Family family = Family::Hourglass;
  int depth_levels = 2;
  std::vector<int> width = {128};      // uniform when size 1, else per level
  std::vector<int> skip_channels;      // per level; empty = no skips
  UpsamplerSpec upsampler = UpsamplerSpec::bilinear();
  int kernel_size = 3;
  int num_conv_layers = 0;             // decoder families; 0 means depth_levels
  int input_channels = 0;              // 0 means the family default (32 / 128)
  int output_channels = 1;

  int levels() const;        // depth for hourglass, conv layers for decoders
  int width_at(int i) const; // 0-based level/layer index
  int skip_at(int t) const;
  int effective_input_channels() const;
  int effective_num_conv_layers() const;
  void validate() const;

  std::string to_json() const;
  static ArchSpec from_json(const std::string& text);

  /// The 5-level full-skip width-128 reference used for parameter budget
  /// comparisons.
  static ArchSpec dip_baseline(int output_channels = 1);
  /// The 6-layer, 5-upsampler, width-128 convolutional decoder.
  static ArchSpec conv_decoder_base(int output_channels = 3);
};

/// A built network: parameter tensors plus the forward wiring of the spec.
class Network {
 public:
  Network(ArchSpec spec, std::uint64_t seed);

  Tensor forward(const Tensor& z) const;
  const std::vector<Tensor>& parameters() const { return params_; }
  const ArchSpec& spec() const { return spec_; }

  /// Spatial size of the input tensor needed to produce out_h x out_w;
  /// throws on divisibility violations before anything is allocated.
  std::pair<int, int> input_spatial(int out_h, int out_w) const;
  int input_channels() const { return spec_.effective_input_channels(); }

 private:
  struct ConvBlock {
    Tensor w, b, scale, shift;
    int stride = 1;
  };
  Tensor conv_block(const Tensor& x, const ConvBlock& blk, int pad,
                    bool leaky) const;
  Tensor apply_upsample(const Tensor& x, int stage) const;

  ArchSpec spec_;
  std::vector<ConvBlock> encoder_;
  std::vector<ConvBlock> decoder_;
  std::vector<Tensor> skip_convs_w_, skip_convs_b_;  // indexed by level t
  std::vector<Tensor> up_kernels_;                   // learnable when TransposedConv
  std::vector<double> fixed_kernel_;
  double fixed_gain_ = 1.0;
  Tensor head_w_, head_b_;
  std::vector<Tensor> params_;
};

Network build_network(const ArchSpec& spec, std::uint64_t seed);

/// Exact parameter count from the per-layer closed form
/// (conv: k^2*Cin*Cout + Cout; norm: 2*C; learnable upsample kernels: taps).
std::int64_t param_count(const ArchSpec& spec);

/// Depth/width/skip recommendation: 2-level hourglass with width from the
/// classifier and one skip connection for the widest class; decoders keep
/// all conv layers and shed upsampling stages as width grows.
ArchSpec recommend_arch(const TextureFeatures& features, Family family,
                        const WidthClassifier& classifier,
                        int output_channels = 1);

}  // namespace spectraldip
