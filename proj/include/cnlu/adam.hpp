#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "cnlu/tensor.hpp"

namespace cnlu {

// Bias-corrected Adam over a fixed group of parameter tensors. Moment
// buffers mirror the parameter shapes; t advances by exactly 1 per step.
template <typename T>
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t t = 0;
  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;

  void init(std::span<const Tensor<T>* const> params) {
    m.clear();
    v.clear();
    for (const Tensor<T>* p : params) {
      m.push_back(Tensor<T>::zeros(p->shape));
      v.push_back(Tensor<T>::zeros(p->shape));
    }
    t = 0;
  }
};

template <typename T>
void adam_step(std::span<Tensor<T>* const> params, std::span<const Tensor<T>* const> grads,
               AdamState<T>& state) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw DimensionError("adam_step: parameter/gradient/state group sizes differ");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor<T>& p = *params[i];
    const Tensor<T>& g = *grads[i];
    if (!same_shape(p, g) || !same_shape(p, state.m[i]))
      throw DimensionError("adam_step: shape mismatch on parameter " + std::to_string(i));
    const T b1 = static_cast<T>(state.beta1), b2 = static_cast<T>(state.beta2);
    for (int64_t j = 0; j < p.size(); ++j) {
      T& m = state.m[i].at(j);
      T& v = state.v[i].at(j);
      const T gj = g.at(j);
      m = b1 * m + (T(1) - b1) * gj;
      v = b2 * v + (T(1) - b2) * gj * gj;
      const T mhat = static_cast<T>(m / bc1);
      const T vhat = static_cast<T>(v / bc2);
      p.at(j) -= static_cast<T>(state.lr) * mhat /
                 (std::sqrt(vhat) + static_cast<T>(state.eps));
    }
  }
}

}  // namespace cnlu
