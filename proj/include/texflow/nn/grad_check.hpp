#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "texflow/nn/tensor.hpp"

namespace texflow::nn {

// Central finite-difference verification harness. `loss` evaluates the
// scalar objective on the given inputs; `grads` returns reverse-mode
// gradients with respect to every input. Each component is perturbed by
// +-eps and compared against the analytic gradient; the worst relative
// error is returned. Always runs in double.
struct GradCheckProblem {
  std::function<double(const std::vector<Tensor<double>>&)> loss;
  std::function<std::vector<Tensor<double>>(
      const std::vector<Tensor<double>>&)>
      grads;
};

inline double grad_check(const GradCheckProblem& problem,
                         std::vector<Tensor<double>> inputs,
                         double eps = 1e-3) {
  const std::vector<Tensor<double>> analytic = problem.grads(inputs);
  double worst = 0.0;
  for (size_t t = 0; t < inputs.size(); ++t) {
    for (size_t i = 0; i < inputs[t].size(); ++i) {
      const double keep = inputs[t][i];
      inputs[t][i] = keep + eps;
      const double lp = problem.loss(inputs);
      inputs[t][i] = keep - eps;
      const double lm = problem.loss(inputs);
      inputs[t][i] = keep;
      const double numeric = (lp - lm) / (2.0 * eps);
      const double exact = analytic[t][i];
      const double denom =
          std::max({std::abs(numeric), std::abs(exact), 1e-8});
      worst = std::max(worst, std::abs(numeric - exact) / denom);
    }
  }
  return worst;
}

}  // namespace texflow::nn
