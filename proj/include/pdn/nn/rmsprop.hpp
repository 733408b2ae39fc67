#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "pdn/error.hpp"

namespace pdn::nn {

struct RmsPropConfig {
  double learning_rate = 1e-3;
  double decay = 0.9;  // rho
  double epsilon = 1e-8;
};

/// Running mean of squared gradients, one buffer per parameter tensor.
template <typename T>
struct OptimizerState {
  RmsPropConfig config;
  std::vector<std::vector<T>> mean_square;
};

/// v <- rho v + (1 - rho) g^2;  p <- p - lr g / (sqrt(v) + eps).
/// Throws NumericalError (parameters untouched) on a non-finite gradient.
template <typename T>
void rmsprop_step(std::span<T> params, std::span<const T> grads, std::span<T> mean_square, const RmsPropConfig& cfg) {
  if (params.size() != grads.size() || params.size() != mean_square.size()) {
    throw ShapeMismatch("rmsprop_step: parameter/gradient/state sizes differ");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw NumericalError("rmsprop_step: non-finite gradient at element " + std::to_string(i));
    }
  }
  const T rho = static_cast<T>(cfg.decay);
  const T one_minus_rho = static_cast<T>(1.0 - cfg.decay);
  const T lr = static_cast<T>(cfg.learning_rate);
  const T eps = static_cast<T>(cfg.epsilon);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const T g = grads[i];
    mean_square[i] = rho * mean_square[i] + one_minus_rho * g * g;
    const T denom = std::sqrt(mean_square[i]) + eps;
    if (denom > T{0}) params[i] -= lr * g / denom;
  }
}

}  // namespace pdn::nn
