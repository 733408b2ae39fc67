#pragma once

#include "pdn/nn/tensor.hpp"

namespace pdn::nn {

/// Mean over all elements of (p - t)^2, accumulated in double.
template <typename T>
double mse_loss(const Tensor4<T>& prediction, const Tensor4<T>& target) {
  if (prediction.shape() != target.shape()) throw ShapeMismatch("mse_loss: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const double d = static_cast<double>(prediction[i]) - static_cast<double>(target[i]);
    acc += d * d;
  }
  return prediction.size() == 0 ? 0.0 : acc / static_cast<double>(prediction.size());
}

/// 2 (p - t) / N.
template <typename T>
Tensor4<T> mse_backward(const Tensor4<T>& prediction, const Tensor4<T>& target) {
  if (prediction.shape() != target.shape()) throw ShapeMismatch("mse_backward: shape mismatch");
  Tensor4<T> grad(prediction.shape());
  const T scale = T(2) / static_cast<T>(prediction.size());
  for (std::size_t i = 0; i < prediction.size(); ++i) grad[i] = scale * (prediction[i] - target[i]);
  return grad;
}

}  // namespace pdn::nn
