#pragma once

// Single-layer adapters for gradient_check().

#include <cstdint>
#include <span>
#include <vector>

#include "pdn/nn/activation.hpp"
#include "pdn/nn/conv.hpp"
#include "pdn/nn/loss.hpp"
#include "pdn/nn/tensor.hpp"

namespace pdn::nn {

class ConvFragment {
 public:
  explicit ConvFragment(ConvLayer<double> layer) : layer_(std::move(layer)), grad_(layer_) {}

  Tensor4<double> forward(const Tensor4<double>& x) { return apply(layer_, x); }
  Tensor4<double> backward(const Tensor4<double>& x, const Tensor4<double>& dy) {
    return apply_backward(layer_, x, dy, grad_);
  }
  std::vector<std::span<double>> parameters() { return {layer_.weight, layer_.bias}; }
  std::vector<std::span<double>> gradients() { return {grad_.weight, grad_.bias}; }
  void zero_grad() { grad_.zero(); }

  ConvLayer<double>& layer() noexcept { return layer_; }

 private:
  ConvLayer<double> layer_;
  LayerGrad<double> grad_;
};

class ReluFragment {
 public:
  Tensor4<double> forward(const Tensor4<double>& x) {
    signature_ = 1469598103934665603ull;
    for (double v : x.vec()) {
      signature_ ^= v > 0.0 ? 1u : 0u;
      signature_ *= 1099511628211ull;
    }
    return relu(x);
  }
  Tensor4<double> backward(const Tensor4<double>& x, const Tensor4<double>& dy) { return relu_backward(x, dy); }
  std::vector<std::span<double>> parameters() { return {}; }
  std::vector<std::span<double>> gradients() { return {}; }
  void zero_grad() {}
  std::uint64_t activation_signature() const { return signature_; }

 private:
  std::uint64_t signature_ = 0;
};

/// MSE against a fixed target, exposed as a 1x1x1x1 output.
class MseFragment {
 public:
  explicit MseFragment(Tensor4<double> target) : target_(std::move(target)) {}

  Tensor4<double> forward(const Tensor4<double>& x) { return Tensor4<double>(Shape4{1, 1, 1, 1}, mse_loss(x, target_)); }
  Tensor4<double> backward(const Tensor4<double>& x, const Tensor4<double>& dy) {
    auto g = mse_backward(x, target_);
    for (auto& v : g.vec()) v *= dy[0];
    return g;
  }
  std::vector<std::span<double>> parameters() { return {}; }
  std::vector<std::span<double>> gradients() { return {}; }
  void zero_grad() {}

 private:
  Tensor4<double> target_;
};

}  // namespace pdn::nn
