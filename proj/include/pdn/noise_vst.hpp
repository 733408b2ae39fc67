#pragma once

// Poisson corruption and the Anscombe variance-stabilizing transform family.

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pdn/error.hpp"
#include "pdn/image.hpp"
#include "pdn/parallel.hpp"
#include "pdn/random.hpp"

namespace pdn {

/// Reproducibility key for noise synthesis.
struct NoiseSeed {
  std::uint64_t seed = 0;
};

namespace detail {

// Sequential search of the Poisson CDF.
inline std::uint64_t poisson_inversion(double lambda, CounterRng& rng) {
  const double u = rng.uniform();
  std::uint64_t k = 0;
  double p = std::exp(-lambda);
  double cdf = p;
  while (u > cdf && k < 1000) {
    ++k;
    p *= lambda / static_cast<double>(k);
    cdf += p;
    if (p == 0.0 && static_cast<double>(k) > lambda) break;
  }
  return k;
}

// Hormann's transformed rejection with squeeze (PTRS); exact for lambda >= 10.
inline std::uint64_t poisson_ptrs(double lambda, CounterRng& rng) {
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <= -lambda + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace detail

inline constexpr double kPoissonInversionLimit = 10.0;

/// One Poisson(lambda) draw; lambda == 0 yields 0 exactly.
inline std::uint64_t poisson_sample(double lambda, CounterRng& rng) {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw InvalidArgument("poisson_sample: lambda must be finite and >= 0, got " + std::to_string(lambda));
  }
  if (lambda == 0.0) return 0;
  return lambda < kPoissonInversionLimit ? detail::poisson_inversion(lambda, rng) : detail::poisson_ptrs(lambda, rng);
}

/// Replaces every pixel by an independent Poisson draw with the pixel value
/// as rate. Pixel i uses stream i of (seed, kNoise), so the output is the same
/// for any thread count or visiting order.
inline Image corrupt_image(const Image& img, NoiseSeed seed, unsigned threads = 1) {
  std::vector<double> out(img.size());
  parallel_for(img.size(), threads, [&](std::size_t i) {
    CounterRng rng(seed.seed, RngDomain::kNoise, i);
    out[i] = static_cast<double>(poisson_sample(img.pixels()[i], rng));
  });
  return Image(img.width(), img.height(), std::move(out), img.peak());
}

// Forward and naive inverse run in extended precision. In double, the forward
// map is not injective above x = 8192 (one step of x moves y by ~0.7 ulp), so
// no inverse could recover x there to better than one ulp of x.
inline long double anscombe_forward(long double x) {
  if (!(x >= 0.0L)) throw InvalidArgument("anscombe_forward: x must be >= 0");
  return 2.0L * std::sqrt(x + 0.375L);
}

/// Algebraic inverse (y/2)^2 - 3/8.
inline long double anscombe_inverse_naive(long double y) {
  if (!(y > 0.0L)) throw InvalidArgument("anscombe_inverse_naive: y must be > 0");
  const long double h = 0.5L * y;
  return h * h - 0.375L;
}

/// Closed-form approximation of the exact unbiased inverse.
inline double anscombe_inverse_unbiased(double y) {
  if (!(y > 0.0) || !std::isfinite(y)) throw InvalidArgument("anscombe_inverse_unbiased: y must be > 0");
  const double s = std::sqrt(1.5);
  const double inv = 1.0 / y;
  return 0.25 * y * y - 0.125 + 0.25 * s * inv - 1.375 * inv * inv + 0.625 * s * inv * inv * inv;
}

/// A Gaussian-noise denoiser operating on VST-domain images.
using GaussianDenoiser = std::function<Image(const Image&)>;

/// Separable Gaussian blur with mirrored borders. A pipeline placeholder,
/// not a competitive Gaussian denoiser.
inline Image gaussian_blur(const Image& img, double sigma = 1.0) {
  if (!(sigma > 0.0)) throw InvalidArgument("gaussian_blur: sigma must be > 0");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    total += kernel[i + radius];
  }
  for (double& k : kernel) k /= total;

  const auto w = static_cast<long>(img.width());
  const auto h = static_cast<long>(img.height());
  auto mirror = [](long i, long n) {
    if (n == 1) return 0L;
    const long period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
  };
  std::vector<double> tmp(img.size());
  std::vector<double> out(img.size());
  const auto& src = img.pixels();
  for (long r = 0; r < h; ++r) {
    for (long c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * src[r * w + mirror(c + k, w)];
      tmp[r * w + c] = acc;
    }
  }
  for (long r = 0; r < h; ++r) {
    for (long c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * tmp[mirror(r + k, h) * w + c];
      out[r * w + c] = std::max(0.0, acc);
    }
  }
  return Image(img.width(), img.height(), std::move(out), img.peak());
}

/// Anscombe forward, Gaussian denoiser, unbiased inverse, clamp at zero.
inline Image vst_denoise_pipeline(const Image& img, const GaussianDenoiser& denoiser) {
  std::vector<double> stabilized(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) stabilized[i] = static_cast<double>(anscombe_forward(img.pixels()[i]));
  const Image vst(img.width(), img.height(), std::move(stabilized), static_cast<double>(anscombe_forward(img.peak())));
  const Image filtered = denoiser(vst);
  if (!filtered.same_shape(vst)) throw ShapeMismatch("vst_denoise_pipeline: denoiser changed the image shape");
  // Anscombe values of non-negative data are >= anscombe_forward(0), where the
  // inverse is exactly zero; lower values are pinned there.
  const double floor = static_cast<double>(anscombe_forward(0.0));
  std::vector<double> out(img.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::max(0.0, anscombe_inverse_unbiased(std::max(floor, filtered.pixels()[i])));
  }
  return Image(img.width(), img.height(), std::move(out), img.peak());
}

}  // namespace pdn
