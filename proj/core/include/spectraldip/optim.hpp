#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spectraldip/tensor.hpp"

namespace spectraldip {

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment estimates for one flattened parameter vector.
struct OptimizerState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::int64_t step_count = 0;
  AdamConfig config;

  explicit OptimizerState(std::size_t n, AdamConfig cfg = {})
      : first_moment(n, 0.0), second_moment(n, 0.0), config(cfg) {}
};

/// One Adam update with bias correction. Throws on non-finite gradients,
/// naming the offending index.
void adam_step(std::span<double> params, std::span<const double> grads,
               OptimizerState& state);

/// Adam over a set of parameter tensors (one OptimizerState per tensor,
/// stepped in registration order).
class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamConfig cfg = {});

  void zero_grad();
  void step();
  std::int64_t step_count() const { return step_count_; }
  const std::vector<Tensor>& params() const { return params_; }

 private:
  std::vector<Tensor> params_;
  std::vector<OptimizerState> states_;
  std::int64_t step_count_ = 0;
};

}  // namespace spectraldip
