#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dt6d/nn/network.hpp"

namespace dt6d::nn {

/// ADAM with bias correction and per-step learning-rate decay
/// lr_t = lr / (1 + decay * t), t = 1 on the first step.
template <typename T>
struct OptimizerState {
  std::vector<std::vector<T>> m, v;  // aligned with for_each_trainable order
  int64_t step = 0;
  double lr = 0.005;
  double decay = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static OptimizerState for_params(NetworkParams<T>& params, double lr, double decay) {
    OptimizerState s;
    s.lr = lr;
    s.decay = decay;
    params.for_each_trainable([&s](const std::string&, std::span<T> span) {
      s.m.emplace_back(span.size(), T{0});
      s.v.emplace_back(span.size(), T{0});
    });
    return s;
  }

  double current_lr() const { return lr / (1.0 + decay * static_cast<double>(step)); }
};

template <typename T>
void adam_step(NetworkParams<T>& params, NetworkParams<T>& grads, OptimizerState<T>& state) {
  ++state.step;
  const double lr_t = state.current_lr();
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

  std::vector<std::span<T>> param_spans, grad_spans;
  params.for_each_trainable([&](const std::string&, std::span<T> s) { param_spans.push_back(s); });
  grads.for_each_trainable([&](const std::string&, std::span<T> s) { grad_spans.push_back(s); });
  if (param_spans.size() != grad_spans.size() || param_spans.size() != state.m.size())
    throw std::invalid_argument("adam: parameter/gradient layout mismatch");

  for (size_t a = 0; a < param_spans.size(); ++a) {
    std::span<T> p = param_spans[a];
    std::span<T> g = grad_spans[a];
    if (p.size() != g.size()) throw std::invalid_argument("adam: span size mismatch");
    std::vector<T>& m = state.m[a];
    std::vector<T>& v = state.v[a];
    for (size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i];
      const double mi = state.beta1 * m[i] + (1 - state.beta1) * gi;
      const double vi = state.beta2 * v[i] + (1 - state.beta2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double m_hat = mi / bc1;
      const double v_hat = vi / bc2;
      p[i] = static_cast<T>(p[i] - lr_t * m_hat / (std::sqrt(v_hat) + state.eps));
    }
  }
}

}  // namespace dt6d::nn
