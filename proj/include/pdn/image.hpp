#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pdn/error.hpp"

namespace pdn {

/// Grayscale image with row-major non-negative pixels and the peak intensity
/// the clean source was scaled to.
class Image {
 public:
  Image() = default;

  Image(std::size_t width, std::size_t height, double peak = 255.0)
      : Image(width, height, std::vector<double>(width * height, 0.0), peak) {}

  Image(std::size_t width, std::size_t height, std::vector<double> pixels, double peak = 255.0)
      : width_(width), height_(height), pixels_(std::move(pixels)), peak_(peak) {
    if (width == 0 || height == 0) throw InvalidArgument("image dimensions must be positive");
    if (pixels_.size() != width * height) throw ShapeMismatch("pixel count does not match width*height");
    if (!(peak > 0.0) || !std::isfinite(peak)) throw InvalidArgument("image peak must be positive and finite");
    for (double p : pixels_) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidArgument("pixel values must be finite and >= 0");
    }
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  double peak() const noexcept { return peak_; }
  void set_peak(double peak) {
    if (!(peak > 0.0) || !std::isfinite(peak)) throw InvalidArgument("image peak must be positive and finite");
    peak_ = peak;
  }

  const std::vector<double>& pixels() const noexcept { return pixels_; }
  /// Mutable access; callers keep values finite and non-negative.
  std::vector<double>& pixels() noexcept { return pixels_; }

  double& at(std::size_t row, std::size_t col) { return pixels_[row * width_ + col]; }
  double at(std::size_t row, std::size_t col) const { return pixels_[row * width_ + col]; }

  double max_value() const { return pixels_.empty() ? 0.0 : *std::max_element(pixels_.begin(), pixels_.end()); }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> pixels_;
  double peak_ = 255.0;
};

/// Linearly rescales so that the brightest pixel equals `peak`.
inline Image scale_to_peak(const Image& img, double peak) {
  if (!(peak > 0.0) || !std::isfinite(peak)) throw InvalidArgument("scale_to_peak: peak must be positive");
  const double max_value = img.max_value();
  if (!(max_value > 0.0)) throw InvalidArgument("scale_to_peak: all-zero image cannot be scaled");
  const double factor = peak / max_value;
  std::vector<double> out(img.pixels());
  for (double& p : out) p *= factor;
  // Pin the maximum exactly; the product can land one ulp off.
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (img.pixels()[i] == max_value) out[i] = peak;
  }
  return Image(img.width(), img.height(), std::move(out), peak);
}

/// Maps pixels from the [0, peak] scale of `img` onto [0, new_peak] without
/// looking at the image content (unlike scale_to_peak).
inline Image rescale_range(const Image& img, double new_peak) {
  const double factor = new_peak / img.peak();
  std::vector<double> out(img.pixels());
  for (double& p : out) p *= factor;
  return Image(img.width(), img.height(), std::move(out), new_peak);
}

}  // namespace pdn
