#pragma once

// Patch extraction on strided grids and Gaussian-weighted overlap
// reconstruction.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pdn/error.hpp"
#include "pdn/image.hpp"
#include "pdn/random.hpp"

namespace pdn {

struct Anchor {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const Anchor&, const Anchor&) = default;
};

/// Square patch of patch_size^2 row-major values.
using Patch = std::vector<double>;

struct PatchGrid {
  std::size_t patch_size = 0;
  std::size_t stride = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  double peak = 255.0;
  std::vector<Anchor> anchors;

  std::size_t size() const noexcept { return anchors.size(); }
};

/// Anchor positions along one axis: multiples of stride, plus extent - patch
/// when the stride does not land there, so the whole axis is covered. Steps
/// wider than the patch would leave gaps and are capped at the patch size.
inline std::vector<std::size_t> axis_anchors(std::size_t extent, std::size_t patch_size, std::size_t stride) {
  if (stride == 0) throw InvalidArgument("stride must be >= 1");
  if (patch_size == 0 || patch_size > extent) throw InvalidArgument("patch larger than image");
  std::vector<std::size_t> out;
  const std::size_t last = extent - patch_size;
  const std::size_t step = std::min(stride, patch_size);
  for (std::size_t a = 0; a <= last; a += step) out.push_back(a);
  if (out.back() != last) out.push_back(last);
  return out;
}

/// Patch count an extract_grid call would produce, without touching pixels.
inline std::size_t grid_patch_count(std::size_t height, std::size_t width, std::size_t patch_size, std::size_t stride) {
  return axis_anchors(height, patch_size, stride).size() * axis_anchors(width, patch_size, stride).size();
}

inline PatchGrid make_grid(std::size_t height, std::size_t width, std::size_t patch_size, std::size_t stride,
                           double peak = 255.0) {
  PatchGrid grid{patch_size, stride, height, width, peak, {}};
  const auto rows = axis_anchors(height, patch_size, stride);
  const auto cols = axis_anchors(width, patch_size, stride);
  grid.anchors.reserve(rows.size() * cols.size());
  for (auto r : rows) {
    for (auto c : cols) grid.anchors.push_back({r, c});
  }
  return grid;
}

inline Patch copy_patch(const Image& img, Anchor at, std::size_t patch_size) {
  Patch p(patch_size * patch_size);
  for (std::size_t r = 0; r < patch_size; ++r) {
    const double* src = img.pixels().data() + (at.row + r) * img.width() + at.col;
    std::copy(src, src + patch_size, p.begin() + static_cast<std::ptrdiff_t>(r * patch_size));
  }
  return p;
}

struct GridPatches {
  PatchGrid grid;
  std::vector<Patch> patches;
};

inline GridPatches extract_grid(const Image& img, std::size_t patch_size, std::size_t stride) {
  if (patch_size == 0 || img.height() < patch_size || img.width() < patch_size) {
    throw InvalidArgument("extract_grid: image " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                          " smaller than patch " + std::to_string(patch_size));
  }
  GridPatches out{make_grid(img.height(), img.width(), patch_size, stride, img.peak()), {}};
  out.patches.reserve(out.grid.size());
  for (const auto& a : out.grid.anchors) out.patches.push_back(copy_patch(img, a, patch_size));
  return out;
}

/// `count` anchors drawn uniformly over all valid positions.
inline std::vector<Anchor> sample_anchors(std::size_t height, std::size_t width, std::size_t count,
                                          std::size_t patch_size, CounterRng& rng) {
  if (patch_size == 0 || height < patch_size || width < patch_size) {
    throw InvalidArgument("sample_anchors: image smaller than patch");
  }
  std::vector<Anchor> out(count);
  for (auto& a : out) {
    a.row = static_cast<std::size_t>(rng.below(height - patch_size + 1));
    a.col = static_cast<std::size_t>(rng.below(width - patch_size + 1));
  }
  return out;
}

struct SampledPatches {
  std::vector<Anchor> anchors;
  std::vector<Patch> patches;
};

inline SampledPatches sample_random_patches(const Image& img, std::size_t count, std::size_t patch_size,
                                            std::uint64_t seed, std::uint64_t stream = 0) {
  CounterRng rng(seed, RngDomain::kPatchSampling, stream);
  SampledPatches out{sample_anchors(img.height(), img.width(), count, patch_size, rng), {}};
  out.patches.reserve(count);
  for (const auto& a : out.anchors) out.patches.push_back(copy_patch(img, a, patch_size));
  return out;
}

inline double default_sigma(std::size_t patch_size) { return static_cast<double>(patch_size) / 4.0; }

/// w(i,j) = exp(-((i-c)^2 + (j-c)^2) / (2 sigma^2)), c = (patch_size-1)/2.
inline std::vector<double> gaussian_weight_map(std::size_t patch_size, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("gaussian_weight_map: sigma must be > 0");
  const double c = (static_cast<double>(patch_size) - 1.0) / 2.0;
  std::vector<double> w(patch_size * patch_size);
  for (std::size_t i = 0; i < patch_size; ++i) {
    for (std::size_t j = 0; j < patch_size; ++j) {
      const double di = static_cast<double>(i) - c;
      const double dj = static_cast<double>(j) - c;
      w[i * patch_size + j] = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
    }
  }
  return w;
}

/// Running Gaussian-weighted overlap average. Patches may arrive one at a
/// time, so a full grid never has to be held in memory; the result depends on
/// the order of add() calls only through floating-point rounding.
class PatchAccumulator {
 public:
  PatchAccumulator(std::size_t height, std::size_t width, std::size_t patch_size, double sigma, double peak = 255.0)
      : height_(height), width_(width), p_(patch_size), peak_(peak), weights_(gaussian_weight_map(patch_size, sigma)),
        sum_(height * width, 0.0), norm_(height * width, 0.0) {}

  void add(Anchor a, std::span<const double> patch) {
    if (patch.size() != p_ * p_) throw ShapeMismatch("reconstruct_from_patches: wrong patch size");
    if (a.row + p_ > height_ || a.col + p_ > width_) throw InvalidArgument("reconstruct_from_patches: anchor outside image");
    for (std::size_t r = 0; r < p_; ++r) {
      const std::size_t base = (a.row + r) * width_ + a.col;
      const double* w = weights_.data() + r * p_;
      const double* v = patch.data() + r * p_;
      for (std::size_t c = 0; c < p_; ++c) {
        sum_[base + c] += w[c] * v[c];
        norm_[base + c] += w[c];
      }
    }
  }

  Image finish() && {
    for (std::size_t i = 0; i < sum_.size(); ++i) {
      if (!(norm_[i] > 0.0)) throw Error("reconstruct_from_patches: pixel not covered by any patch");
      sum_[i] = std::max(0.0, sum_[i] / norm_[i]);
    }
    return Image(width_, height_, std::move(sum_), peak_);
  }

 private:
  std::size_t height_, width_, p_;
  double peak_;
  std::vector<double> weights_;
  std::vector<double> sum_;
  std::vector<double> norm_;
};

/// Weighted overlap average of patches placed at their grid anchors.
inline Image reconstruct_from_patches(const std::vector<Patch>& patches, const PatchGrid& grid, double sigma) {
  if (patches.size() != grid.size()) {
    throw ShapeMismatch("reconstruct_from_patches: " + std::to_string(patches.size()) + " patches for " +
                        std::to_string(grid.size()) + " anchors");
  }
  PatchAccumulator acc(grid.height, grid.width, grid.patch_size, sigma, grid.peak);
  for (std::size_t k = 0; k < patches.size(); ++k) acc.add(grid.anchors[k], patches[k]);
  return std::move(acc).finish();
}

}  // namespace pdn
