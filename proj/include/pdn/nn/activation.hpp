#pragma once

#include "pdn/nn/tensor.hpp"

namespace pdn::nn {

template <typename T>
Tensor4<T> relu(Tensor4<T> x) {
  for (auto& v : x.vec()) v = v > T{0} ? v : T{0};
  return x;
}

/// dL/dx given the forward input; the subgradient at 0 is 0.
template <typename T>
Tensor4<T> relu_backward(const Tensor4<T>& x, Tensor4<T> dy) {
  if (x.shape() != dy.shape()) throw ShapeMismatch("relu_backward: shape mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > T{0})) dy[i] = T{0};
  }
  return dy;
}

}  // namespace pdn::nn
