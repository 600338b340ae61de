#pragma once

#include <cmath>
#include <vector>

#include "texflow/nn/params.hpp"
#include "texflow/nn/tensor.hpp"

namespace texflow::nn {

// Bias-corrected Adam. Moment tensors are laid out in parameter-store order.
template <typename T>
struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long long step_count = 0;
  std::vector<Tensor<T>> m, v;

  explicit AdamState(const ParameterStore<T>& params, double lr = 1e-3)
      : learning_rate(lr) {
    m.reserve(params.count());
    v.reserve(params.count());
    for (size_t i = 0; i < params.count(); ++i) {
      m.emplace_back(params.entry(i).value.shape());
      v.emplace_back(params.entry(i).value.shape());
    }
  }
};

// theta -= alpha * m_hat / (sqrt(v_hat) + eps); gradients are zeroed after
// being consumed.
template <typename T>
void adam_step(ParameterStore<T>& params, AdamState<T>& state) {
  state.step_count += 1;
  const double b1 = state.beta1, b2 = state.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));
  const double alpha = state.learning_rate;
  for (size_t i = 0; i < params.count(); ++i) {
    auto& e = params.entry(i);
    T* th = e.value.data();
    T* g = e.grad.data();
    T* mi = state.m[i].data();
    T* vi = state.v[i].data();
    const size_t n = e.value.size();
    for (size_t j = 0; j < n; ++j) {
      const double gj = static_cast<double>(g[j]);
      const double mj = b1 * mi[j] + (1.0 - b1) * gj;
      const double vj = b2 * vi[j] + (1.0 - b2) * gj * gj;
      mi[j] = static_cast<T>(mj);
      vi[j] = static_cast<T>(vj);
      const double mhat = mj / bc1;
      const double vhat = vj / bc2;
      th[j] = static_cast<T>(th[j] - alpha * mhat / (std::sqrt(vhat) + state.eps));
      g[j] = T{};
    }
    e.touched = false;
  }
}

}  // namespace texflow::nn
