#include "spectraldip/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spectraldip {

void adam_step(std::span<double> params, std::span<const double> grads,
               OptimizerState& state) {
  if (params.size() != grads.size() ||
      params.size() != state.first_moment.size())
    throw std::invalid_argument("adam_step: length mismatch");
  if (state.config.learning_rate <= 0.0)
    throw std::invalid_argument("adam_step: learning_rate must be positive");

  const AdamConfig& c = state.config;
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    if (!std::isfinite(g))
      throw std::runtime_error("adam_step: non-finite gradient at index " +
                               std::to_string(i) + " (step " +
                               std::to_string(state.step_count) + ")");
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g * g;
    const double mhat = m / bc1;
    const double vhat = v / bc2;
    params[i] -= c.learning_rate * mhat / (std::sqrt(vhat) + c.epsilon);
  }
}

Adam::Adam(std::vector<Tensor> params, AdamConfig cfg)
    : params_(std::move(params)) {
  states_.reserve(params_.size());
  for (const Tensor& p : params_)
    states_.emplace_back(static_cast<std::size_t>(p.size()), cfg);
}

void Adam::zero_grad() {
  for (Tensor& p : params_) p.zero_grad();
}

void Adam::step() {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i];
    if (p.grad().empty()) p.zero_grad();
    adam_step(p.data(), p.grad(), states_[i]);
  }
  step_count_ += 1;
}

}  // namespace spectraldip
