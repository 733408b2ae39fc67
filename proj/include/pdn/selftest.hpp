#pragma once

// Built-in consistency checks run by `pdn selftest`.

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "pdn/eval/stats.hpp"
#include "pdn/model/network.hpp"
#include "pdn/nn/conv.hpp"
#include "pdn/nn/fragments.hpp"
#include "pdn/nn/gradient_check.hpp"
#include "pdn/noise_vst.hpp"
#include "pdn/patchwork.hpp"
#include "pdn/random.hpp"

namespace pdn::selftest {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// PSNR gains (candidate - baseline, dB) of the 21 standard images at peak 4.
inline const std::vector<double>& table1_gains() {
  static const std::vector<double> gains = {0.49, 0.54, 0.96, 0.40, 0.33, 0.93,  -0.14, 0.58, 0.30, 0.32, 0.34,
                                            -0.82, 0.32, -0.16, 0.53, 0.30, 0.68, 0.27, 0.21, 1.05, 0.50};
  return gains;
}

template <typename T>
nn::Tensor4<T> random_tensor(nn::Shape4 shape, CounterRng& rng, double lo = -1.0, double hi = 1.0) {
  nn::Tensor4<T> t(shape);
  for (auto& v : t.vec()) v = static_cast<T>(lo + (hi - lo) * rng.uniform());
  return t;
}

template <typename T>
void randomize(nn::ConvLayer<T>& layer, CounterRng& rng, double scale = 0.5) {
  for (auto& w : layer.weight) w = static_cast<T>(scale * (2.0 * rng.uniform() - 1.0));
  for (auto& b : layer.bias) b = static_cast<T>(0.1 * (2.0 * rng.uniform() - 1.0));
}

/// Worst |<conv x, y> - <x, deconv y>| / (|x| |y|) over random shared-kernel
/// layer pairs, in single precision.
inline double adjoint_max_error(std::size_t trials, std::uint64_t seed) {
  CounterRng rng(seed, RngDomain::kTest, 11);
  double worst = 0.0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::size_t in_c = 1 + rng.below(4);
    const std::size_t out_c = 1 + rng.below(4);
    const std::size_t kernel = 1 + 2 * rng.below(3);
    const std::size_t stride = 1 + rng.below(2);
    const std::size_t size = stride * (4 + rng.below(8));
    auto conv = nn::ConvLayer<float>::make(in_c, out_c, kernel, stride, false);
    randomize(conv, rng);
    std::fill(conv.bias.begin(), conv.bias.end(), 0.0f);
    auto deconv = nn::ConvLayer<float>::make(out_c, in_c, kernel, stride, true);
    deconv.weight = conv.weight;
    const auto x = random_tensor<float>({1, in_c, size, size}, rng);
    const auto y = random_tensor<float>(conv.output_shape(x.shape()), rng);
    const double lhs = nn::dot(nn::conv2d(x, conv).span(), y.span());
    const double rhs = nn::dot(x.span(), nn::deconv2d(y, deconv).span());
    const double norm = std::sqrt(nn::dot(x.span(), x.span()) * nn::dot(y.span(), y.span()));
    worst = std::max(worst, std::fabs(lhs - rhs) / norm);
  }
  return worst;
}

inline nn::GradientCheckResult check_conv_layer(bool transposed, std::uint64_t seed) {
  CounterRng rng(seed, RngDomain::kTest, transposed ? 21 : 20);
  auto layer = nn::ConvLayer<double>::make(2, 3, 3, 2, transposed);
  randomize(layer, rng);
  nn::ConvFragment f(layer);
  const nn::Shape4 in = transposed ? nn::Shape4{1, 2, 4, 4} : nn::Shape4{1, 2, 8, 8};
  return nn::gradient_check(f, random_tensor<double>(in, rng), {.seed = seed});
}

inline nn::GradientCheckResult check_relu(std::uint64_t seed) {
  CounterRng rng(seed, RngDomain::kTest, 22);
  nn::ReluFragment f;
  return nn::gradient_check(f, random_tensor<double>({1, 2, 8, 8}, rng), {.seed = seed});
}

inline nn::GradientCheckResult check_mse(std::uint64_t seed) {
  CounterRng rng(seed, RngDomain::kTest, 23);
  nn::MseFragment f(random_tensor<double>({1, 1, 8, 8}, rng));
  return nn::gradient_check(f, random_tensor<double>({1, 1, 8, 8}, rng), {.seed = seed});
}

/// Default branch plan at a reduced patch size, double precision, random
/// biases so no unit sits exactly on a ReLU kink.
inline nn::GradientCheckResult check_network(std::size_t patch_size, std::uint64_t seed) {
  model::NetworkConfig cfg;
  cfg.patch_size = patch_size;
  cfg.seed = seed;
  model::Network<double> net(cfg);
  CounterRng rng(seed, RngDomain::kTest, 24);
  for (auto& l : net.layers()) {
    for (auto& b : l.bias) b = 0.05 * (2.0 * rng.uniform() - 1.0);
  }
  model::CheckedNetwork f(std::move(net));
  return nn::gradient_check(f, random_tensor<double>({1, 1, patch_size, patch_size}, rng, 0.0, 1.0), {.seed = seed});
}

inline std::string describe(const nn::GradientCheckResult& r) {
  std::ostringstream out;
  out << "max rel error " << r.max_relative_error << " over " << r.checked << " elements";
  if (r.kink_skipped) out << " (" << r.kink_skipped << " kink-straddling skipped)";
  return out.str();
}

inline std::vector<CheckResult> run_all(std::uint64_t seed = 1) {
  std::vector<CheckResult> out;
  auto add = [&out](std::string name, bool ok, std::string detail) {
    out.push_back({std::move(name), ok, std::move(detail)});
  };

  {
    struct Case {
      const char* label;
      double got;
      double want;
    };
    const Case cases[] = {{"forward(0)", static_cast<double>(anscombe_forward(0.0)), 1.22474487139159},
                          {"forward(1)", static_cast<double>(anscombe_forward(1.0)), 2.34520787991171},
                          {"naive_inverse(2)", static_cast<double>(anscombe_inverse_naive(2.0)), 0.625},
                          {"unbiased_inverse(2)", anscombe_inverse_unbiased(2.0), 0.780026302001417},
                          {"unbiased_inverse(10)", anscombe_inverse_unbiased(10.0), 24.8926340873294}};
    bool ok = true;
    std::ostringstream detail;
    for (const auto& c : cases) {
      ok = ok && std::fabs(c.got - c.want) < 1e-6;
      detail << c.label << "=" << c.got << " ";
    }
    add("anscombe unit values", ok, detail.str());
  }

  {
    const auto t = eval::paired_t_test(table1_gains());
    std::ostringstream detail;
    detail << "mean=" << t.mean << " t=" << t.t << " p=" << t.p_two_tailed;
    add("table-1 paired t-test", t.mean >= 0.375 && t.mean <= 0.381 && t.t >= 4.19 && t.t <= 4.29 &&
                                     t.p_two_tailed >= 0.0001 && t.p_two_tailed <= 0.0007,
        detail.str());
  }

  {
    const double err = adjoint_max_error(20, seed);
    add("conv/deconv adjoint identity", err < 1e-5, "max normalized error " + std::to_string(err));
  }

  {
    const auto n = grid_patch_count(512, 512, 64, 2);
    add("patch grid arithmetic", n == 50625, "512x512 stride 2 -> " + std::to_string(n) + " patches");
  }

  const std::pair<const char*, std::function<nn::GradientCheckResult()>> grads[] = {
      {"gradient check conv2d", [&] { return check_conv_layer(false, seed); }},
      {"gradient check deconv2d", [&] { return check_conv_layer(true, seed); }},
      {"gradient check relu", [&] { return check_relu(seed); }},
      {"gradient check mse", [&] { return check_mse(seed); }},
      {"gradient check network 16x16", [&] { return check_network(16, seed); }},
  };
  for (const auto& [name, run] : grads) {
    const auto r = run();
    add(name, r.passed, describe(r));
  }
  return out;
}

}  // namespace pdn::selftest
