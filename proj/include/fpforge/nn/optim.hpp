#pragma once

#include <cmath>
#include <cstdint>

#include "fpforge/nn/tensor.hpp"

namespace fpforge::nn {

// Adam with bias correction. Moment buffers align with ParamStore entries.
template <typename T>
struct AdamState {
  std::int64_t step = 0;
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::vector<std::vector<T>> m, v;

  void attach(const ParamStore<T>& params) {
    m.clear();
    v.clear();
    for (const auto& e : params.entries) {
      m.emplace_back(e.value.size(), T(0));
      v.emplace_back(e.value.size(), T(0));
    }
    step = 0;
  }
};

// theta <- theta - lr * m_hat / (sqrt(v_hat) + eps), reading gradients from
// each parameter's grad buffer.
template <typename T>
void adam_step(ParamStore<T>& params, AdamState<T>& state) {
  if (state.m.size() != params.entries.size())
    throw InvalidArgument("adam_step: state not attached to this parameter set");
  state.step += 1;
  const double bias1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t pi = 0; pi < params.entries.size(); ++pi) {
    auto& value = params.entries[pi].value;
    auto& m = state.m[pi];
    auto& v = state.v[pi];
    if (value.grad.size() != value.data.size())
      throw InvalidArgument("adam_step: parameter grad missing");
    for (std::size_t i = 0; i < value.data.size(); ++i) {
      const T g = value.grad[i];
      m[i] = static_cast<T>(state.beta1) * m[i] + static_cast<T>(1.0 - state.beta1) * g;
      v[i] = static_cast<T>(state.beta2) * v[i] + static_cast<T>(1.0 - state.beta2) * g * g;
      const double m_hat = static_cast<double>(m[i]) / bias1;
      const double v_hat = static_cast<double>(v[i]) / bias2;
      value.data[i] -= static_cast<T>(state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon));
    }
  }
}

// Constant until decay_start, then linear to zero at total_epochs.
inline double lr_schedule(double base_lr, int epoch, int total_epochs, int decay_start) {
  if (epoch < decay_start) return base_lr;
  const int span = total_epochs - decay_start;
  if (span <= 0) return epoch >= total_epochs ? 0.0 : base_lr;
  const double scale = static_cast<double>(total_epochs - epoch) / static_cast<double>(span);
  return base_lr * (scale < 0.0 ? 0.0 : scale);
}

}  // namespace fpforge::nn
