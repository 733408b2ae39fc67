#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "pdn/error.hpp"
#include "pdn/image.hpp"
#include "pdn/log.hpp"
#include "pdn/model/network.hpp"
#include "pdn/parallel.hpp"
#include "pdn/patchwork.hpp"

namespace pdn::model {

/// Patches handed to the patch function per thread between accumulations.
inline constexpr std::size_t kDenoiseChunk = 64;

/// Maps one peak-normalized patch to its denoised version.
using PatchFunction = std::function<std::vector<float>(std::vector<float>)>;

struct DenoiseStats {
  std::size_t forward_passes = 0;
};

/// Single-patch inference; the output is clamped at zero.
inline std::vector<float> forward_full(const Network<float>& net, std::vector<float> patch) {
  const std::size_t p = net.config().patch_size;
  if (patch.size() != p * p) {
    throw ShapeMismatch("forward_full: expected " + std::to_string(p * p) + " values, got " + std::to_string(patch.size()));
  }
  auto y = net.forward(Tensor4<float>({1, 1, p, p}, std::move(patch)));
  for (auto& v : y.vec()) v = std::max(v, 0.0f);
  return std::move(y.vec());
}

/// Grid extraction, peak normalization, per-patch inference, denormalization
/// and Gaussian-weighted reconstruction; the result is clamped to [0, peak].
inline Image denoise_with(const PatchFunction& fn, const Image& img, std::size_t patch_size, std::size_t stride,
                          double sigma, unsigned threads = 1, DenoiseStats* stats = nullptr) {
  if (img.width() < patch_size || img.height() < patch_size) {
    throw InvalidArgument("denoise: image smaller than the " + std::to_string(patch_size) + "-pixel patch");
  }
  const auto grid = make_grid(img.height(), img.width(), patch_size, stride, img.peak());
  const double peak = img.peak();
  PatchAccumulator acc(img.height(), img.width(), patch_size, sigma, peak);
  // Patches run in parallel chunk by chunk and are accumulated in anchor
  // order, so memory stays bounded and the sum is thread-count independent.
  const std::size_t chunk = kDenoiseChunk * std::max(1u, threads);
  std::vector<Patch> outputs(std::min(chunk, grid.size()));
  std::size_t passes = 0;
  for (std::size_t begin = 0; begin < grid.size(); begin += chunk) {
    const std::size_t count = std::min(chunk, grid.size() - begin);
    parallel_for(count, threads, [&](std::size_t k) {
      const Patch patch = copy_patch(img, grid.anchors[begin + k], patch_size);
      std::vector<float> in(patch.size());
      for (std::size_t i = 0; i < patch.size(); ++i) in[i] = static_cast<float>(patch[i] / peak);
      const auto out = fn(std::move(in));
      if (out.size() != patch.size()) throw ShapeMismatch("denoise: patch function changed the patch size");
      auto& dst = outputs[k];
      dst.resize(patch.size());
      for (std::size_t i = 0; i < patch.size(); ++i) dst[i] = std::max(0.0, static_cast<double>(out[i]) * peak);
    });
    for (std::size_t k = 0; k < count; ++k) acc.add(grid.anchors[begin + k], outputs[k]);
    passes += count;
  }
  Image result = std::move(acc).finish();
  for (double& v : result.pixels()) v = std::clamp(v, 0.0, peak);
  if (stats) stats->forward_passes = passes;
  return result;
}

inline Image denoise_image(const Network<float>& net, const Image& img, std::size_t stride, double sigma,
                           unsigned threads = 1, DenoiseStats* stats = nullptr) {
  if (net.peak() > 0.0 && std::fabs(net.peak() - img.peak()) > 1e-9 * net.peak()) {
    std::ostringstream msg;
    msg << "network was trained for peak " << net.peak() << " but the image has peak " << img.peak();
    warn(msg.str());
  }
  const PatchFunction fn = [&net](std::vector<float> patch) { return forward_full(net, std::move(patch)); };
  return denoise_with(fn, img, net.config().patch_size, stride, sigma, threads, stats);
}

}  // namespace pdn::model
