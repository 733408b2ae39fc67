#pragma once

// Finite-difference verification of analytic gradients.
//
// The checked scalar is L = sum_i r_i * f(x)_i with a fixed random projection
// r, so every output element contributes. Each parameter and input element
// is perturbed by +-h and the central difference is compared with the
// analytic gradient from one backward pass.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pdn/nn/tensor.hpp"
#include "pdn/random.hpp"

namespace pdn::nn {

/// Anything with forward/backward over double tensors and flat parameter views.
/// backward() accumulates parameter gradients and returns dL/dx.
template <typename F>
concept CheckableFragment = requires(F f, const Tensor4<double>& x) {
  { f.forward(x) } -> std::convertible_to<Tensor4<double>>;
  { f.backward(x, x) } -> std::convertible_to<Tensor4<double>>;
  { f.parameters() } -> std::convertible_to<std::vector<std::span<double>>>;
  { f.gradients() } -> std::convertible_to<std::vector<std::span<double>>>;
  f.zero_grad();
};

/// Fragments that can fingerprint their ReLU masks from the last forward().
template <typename F>
concept HasActivationSignature = requires(const F f) {
  { f.activation_signature() } -> std::convertible_to<std::uint64_t>;
};

/// Fragments that can cheaply recompute their output after parameter tensor
/// t changed, reusing state from the previous evaluation at the same input.
template <typename F>
concept HasIncrementalForward = requires(F f, std::size_t t) {
  { f.forward_after_change(t) } -> std::convertible_to<Tensor4<double>>;
};

struct GradientCheckOptions {
  double step = 1e-5;
  // Elements whose gradient is far below the largest one are compared against
  // floor_ratio * max|grad| instead of their own magnitude.
  double floor_ratio = 1e-3;
  double tolerance = 1e-6;
  std::uint64_t seed = 1;
  bool check_input = true;
};

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::string worst;  // "param[t][i]" or "input[i]"
  std::size_t checked = 0;
  // Perturbations that flipped a ReLU mask (central difference undefined).
  std::size_t kink_skipped = 0;
  bool passed = false;
};

template <CheckableFragment F>
GradientCheckResult gradient_check(F& fragment, const Tensor4<double>& input, const GradientCheckOptions& opt = {}) {
  Tensor4<double> x = input;
  const Tensor4<double> out0 = fragment.forward(x);
  std::uint64_t signature0 = 0;
  if constexpr (HasActivationSignature<F>) signature0 = fragment.activation_signature();

  Tensor4<double> projection(out0.shape());
  CounterRng rng(opt.seed, RngDomain::kGradientCheck);
  for (auto& v : projection.vec()) v = 2.0 * rng.uniform() - 1.0;

  fragment.zero_grad();
  const Tensor4<double> dx = fragment.backward(x, projection);

  // tensor < 0: the input changed.
  auto loss = [&](bool& same_pattern, long tensor) {
    Tensor4<double> out;
    if constexpr (HasIncrementalForward<F>) {
      out = tensor >= 0 ? fragment.forward_after_change(static_cast<std::size_t>(tensor)) : fragment.forward(x);
    } else {
      out = fragment.forward(x);
    }
    same_pattern = true;
    if constexpr (HasActivationSignature<F>) same_pattern = fragment.activation_signature() == signature0;
    return dot(out.span(), projection.span());
  };

  struct Pair {
    double analytic, numeric;
    std::string label;
  };
  std::vector<Pair> pairs;
  GradientCheckResult result;

  auto probe = [&](double& slot, double analytic, long tensor, std::string label) {
    const double saved = slot;
    bool same_plus = true;
    bool same_minus = true;
    slot = saved + opt.step;
    const double up = loss(same_plus, tensor);
    slot = saved - opt.step;
    const double down = loss(same_minus, tensor);
    slot = saved;
    if (!same_plus || !same_minus) {
      ++result.kink_skipped;
      return;
    }
    pairs.push_back({analytic, (up - down) / (2.0 * opt.step), std::move(label)});
  };

  auto params = fragment.parameters();
  std::vector<std::vector<double>> analytic;
  for (const auto& g : fragment.gradients()) analytic.emplace_back(g.begin(), g.end());
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      probe(params[t][i], analytic[t][i], static_cast<long>(t), "param[" + std::to_string(t) + "][" + std::to_string(i) + "]");
    }
  }
  if (opt.check_input) {
    for (std::size_t i = 0; i < x.size(); ++i) probe(x[i], dx[i], -1, "input[" + std::to_string(i) + "]");
  }
  fragment.forward(input);

  double scale = 0.0;
  for (const auto& p : pairs) scale = std::max({scale, std::fabs(p.analytic), std::fabs(p.numeric)});
  const double floor = std::max(opt.floor_ratio * scale, 1e-300);
  for (const auto& p : pairs) {
    const double denom = std::max({std::fabs(p.analytic), std::fabs(p.numeric), floor});
    const double err = std::fabs(p.analytic - p.numeric) / denom;
    if (err >= result.max_relative_error) {
      result.max_relative_error = err;
      result.worst = p.label;
    }
  }
  result.checked = pairs.size();
  result.passed = result.checked > 0 && result.max_relative_error < opt.tolerance;
  return result;
}

}  // namespace pdn::nn
