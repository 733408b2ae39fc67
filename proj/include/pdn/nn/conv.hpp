#pragma once

// Strided 2-D convolution with "same" zero padding and its transpose.
//
// Both layer kinds share one correlation kernel W[c_out][c_in][k][k] between a
// "wide" side (c_in planes of H x W) and a "narrow" side (c_out planes of
// ceil(H/s) x ceil(W/s)). A convolution maps wide -> narrow; a transposed
// convolution maps narrow -> wide with the adjoint of the same linear map.
//
// Strided access is removed by splitting the zero-padded wide side into s*s
// polyphase planes, so every inner loop runs over contiguous memory.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "pdn/error.hpp"
#include "pdn/nn/tensor.hpp"

namespace pdn::nn {

template <typename T>
struct ConvLayer {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 0;
  std::size_t stride = 1;
  bool transposed = false;
  // Conv: [out][in][k][k]. Transposed: [in][out][k][k].
  std::vector<T> weight;
  std::vector<T> bias;

  static ConvLayer make(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride, bool transposed) {
    if (in == 0 || out == 0) throw InvalidArgument("conv layer channels must be positive");
    if (kernel % 2 == 0) throw InvalidArgument("conv kernel size must be odd, got " + std::to_string(kernel));
    if (stride == 0) throw InvalidArgument("conv stride must be >= 1");
    ConvLayer l{in, out, kernel, stride, transposed, {}, {}};
    l.weight.assign(kernel * kernel * in * out, T{0});
    l.bias.assign(out, T{0});
    return l;
  }

  std::size_t parameter_count() const noexcept { return weight.size() + bias.size(); }
  std::size_t padding() const noexcept { return (kernel - 1) / 2; }

  Shape4 output_shape(const Shape4& in) const {
    if (in.channels != in_channels) {
      throw ShapeMismatch("conv layer expects " + std::to_string(in_channels) + " input channels, got " +
                          std::to_string(in.channels));
    }
    if (transposed) return {in.batch, out_channels, in.height * stride, in.width * stride};
    return {in.batch, out_channels, (in.height + stride - 1) / stride, (in.width + stride - 1) / stride};
  }

  template <typename U>
  ConvLayer<U> cast() const {
    return {in_channels, out_channels, kernel, stride, transposed, std::vector<U>(weight.begin(), weight.end()),
            std::vector<U>(bias.begin(), bias.end())};
  }

  friend bool operator==(const ConvLayer&, const ConvLayer&) = default;
};

/// Parameter gradients of one ConvLayer (same layout as the layer).
template <typename T>
struct LayerGrad {
  std::vector<T> weight;
  std::vector<T> bias;

  LayerGrad() = default;
  explicit LayerGrad(const ConvLayer<T>& l) : weight(l.weight.size(), T{0}), bias(l.bias.size(), T{0}) {}
  void zero() {
    std::fill(weight.begin(), weight.end(), T{0});
    std::fill(bias.begin(), bias.end(), T{0});
  }
};

namespace detail {

struct CorrelationGeometry {
  std::size_t wide_channels, narrow_channels;
  std::size_t kernel, stride, pad;
  std::size_t wide_h, wide_w;      // H, W
  std::size_t narrow_h, narrow_w;  // ceil(H/s), ceil(W/s)
  std::size_t phase_h, phase_w;    // ceil((H+2p)/s), ceil((W+2p)/s)

  CorrelationGeometry(std::size_t wide_c, std::size_t narrow_c, std::size_t k, std::size_t s, std::size_t h,
                      std::size_t w)
      : wide_channels(wide_c),
        narrow_channels(narrow_c),
        kernel(k),
        stride(s),
        pad((k - 1) / 2),
        wide_h(h),
        wide_w(w),
        narrow_h((h + s - 1) / s),
        narrow_w((w + s - 1) / s),
        phase_h((h + 2 * pad + s - 1) / s),
        phase_w((w + 2 * pad + s - 1) / s) {}

  std::size_t phase_plane() const noexcept { return phase_h * phase_w; }
  // Flat kernels read up to max_shift() past the last phase plane.
  std::size_t max_shift() const noexcept { return ((kernel - 1) / stride) * (phase_w + 1); }
  std::size_t phase_size() const noexcept { return wide_channels * stride * stride * phase_plane(); }
  // Narrow planes widened to phase_w columns.
  std::size_t ext_plane() const noexcept { return narrow_h * phase_w; }
  // Offset of the phase plane (and shift inside it) touched by tap (ky, kx) of wide channel c.
  std::size_t tap_offset(std::size_t c, std::size_t ky, std::size_t kx) const noexcept {
    const std::size_t phase = (c * stride + ky % stride) * stride + kx % stride;
    return phase * phase_plane() + (ky / stride) * phase_w + kx / stride;
  }
};

// Zero-padded wide planes -> polyphase layout.
template <typename T>
void pack_phases(const CorrelationGeometry& g, const T* wide, std::vector<T>& phases) {
  phases.assign(g.phase_size() + g.max_shift(), T{0});
  const auto s = g.stride;
  for (std::size_t c = 0; c < g.wide_channels; ++c) {
    const T* plane = wide + c * g.wide_h * g.wide_w;
    for (std::size_t a = 0; a < s; ++a) {
      for (std::size_t b = 0; b < s; ++b) {
        T* dst = phases.data() + ((c * s + a) * s + b) * g.phase_plane();
        for (std::size_t i = 0; i < g.phase_h; ++i) {
          const std::size_t row = a + s * i;
          if (row < g.pad || row - g.pad >= g.wide_h) continue;
          const T* src = plane + (row - g.pad) * g.wide_w;
          for (std::size_t j = 0; j < g.phase_w; ++j) {
            const std::size_t col = b + s * j;
            if (col < g.pad || col - g.pad >= g.wide_w) continue;
            dst[i * g.phase_w + j] = src[col - g.pad];
          }
        }
      }
    }
  }
}

// Polyphase layout -> wide planes (cropping the padding), added into `wide`.
template <typename T>
void unpack_phases_add(const CorrelationGeometry& g, const std::vector<T>& phases, T* wide) {
  const auto s = g.stride;
  for (std::size_t c = 0; c < g.wide_channels; ++c) {
    T* plane = wide + c * g.wide_h * g.wide_w;
    for (std::size_t r = 0; r < g.wide_h; ++r) {
      const std::size_t pr = r + g.pad;
      for (std::size_t col = 0; col < g.wide_w; ++col) {
        const std::size_t pc = col + g.pad;
        const std::size_t phase = (c * s + pr % s) * s + pc % s;
        plane[r * g.wide_w + col] += phases[phase * g.phase_plane() + (pr / s) * g.phase_w + pc / s];
      }
    }
  }
}

// Narrow planes -> phase_w-wide rows with zeroed extra columns.
template <typename T>
void widen(const CorrelationGeometry& g, const T* narrow, std::vector<T>& ext) {
  ext.assign(g.narrow_channels * g.ext_plane(), T{0});
  for (std::size_t c = 0; c < g.narrow_channels; ++c) {
    for (std::size_t oy = 0; oy < g.narrow_h; ++oy) {
      const T* src = narrow + (c * g.narrow_h + oy) * g.narrow_w;
      std::copy(src, src + g.narrow_w, ext.data() + c * g.ext_plane() + oy * g.phase_w);
    }
  }
}

inline constexpr std::size_t kTapBlock = 8;

inline std::size_t padded_taps(std::size_t n) { return (n + kTapBlock - 1) / kTapBlock * kTapBlock; }

// out[f] += sum_t w[t] * base[offset[t] + f] for f < len. Taps are consumed
// in blocks of kTapBlock (callers zero-pad both lists) so each output element
// is loaded and stored once per block.
template <typename T>
void accumulate_taps(T* __restrict out, std::size_t len, const T* base, const std::vector<std::size_t>& offset,
                     const std::vector<T>& w) {
  for (std::size_t t = 0; t < offset.size(); t += kTapBlock) {
    const T* __restrict p0 = base + offset[t];
    const T* __restrict p1 = base + offset[t + 1];
    const T* __restrict p2 = base + offset[t + 2];
    const T* __restrict p3 = base + offset[t + 3];
    const T* __restrict p4 = base + offset[t + 4];
    const T* __restrict p5 = base + offset[t + 5];
    const T* __restrict p6 = base + offset[t + 6];
    const T* __restrict p7 = base + offset[t + 7];
    const T w0 = w[t], w1 = w[t + 1], w2 = w[t + 2], w3 = w[t + 3];
    const T w4 = w[t + 4], w5 = w[t + 5], w6 = w[t + 6], w7 = w[t + 7];
    for (std::size_t f = 0; f < len; ++f) {
      out[f] += ((w0 * p0[f] + w1 * p1[f]) + (w2 * p2[f] + w3 * p3[f])) +
                ((w4 * p4[f] + w5 * p5[f]) + (w6 * p6[f] + w7 * p7[f]));
    }
  }
}

// Phase offsets of all (ci, ky, kx) taps, in weight order.
inline std::vector<std::size_t> tap_offsets(const CorrelationGeometry& g) {
  const std::size_t k = g.kernel;
  std::vector<std::size_t> offsets;
  offsets.reserve(g.wide_channels * k * k);
  for (std::size_t ci = 0; ci < g.wide_channels; ++ci) {
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) offsets.push_back(g.tap_offset(ci, ky, kx));
    }
  }
  return offsets;
}

// The loops below run over whole widened planes: position f = oy*phase_w + ox
// reads phase element f + tap_offset. Columns ox >= narrow_w wrap into the
// next row; they are discarded (correlate) or multiplied by zero (others).

// narrow[co] += sum_ci,ky,kx W[co][ci][ky][kx] * wide_padded[ci][s*oy+ky][s*ox+kx]
template <typename T>
void correlate(const CorrelationGeometry& g, const std::vector<T>& phases, const T* weight, T* narrow) {
  const std::size_t len = g.ext_plane();
  const std::size_t per_out = g.wide_channels * g.kernel * g.kernel;
  std::vector<std::size_t> offsets = tap_offsets(g);
  offsets.resize(padded_taps(per_out), 0);
  std::vector<T> w(offsets.size(), T{0});
  std::vector<T> acc(len);
  for (std::size_t co = 0; co < g.narrow_channels; ++co) {
    std::copy(weight + co * per_out, weight + (co + 1) * per_out, w.begin());
    std::fill(acc.begin(), acc.end(), T{0});
    accumulate_taps(acc.data(), len, phases.data(), offsets, w);
    T* out = narrow + co * g.narrow_h * g.narrow_w;
    for (std::size_t oy = 0; oy < g.narrow_h; ++oy) {
      for (std::size_t ox = 0; ox < g.narrow_w; ++ox) out[oy * g.narrow_w + ox] += acc[oy * g.phase_w + ox];
    }
  }
}

// Adjoint of correlate, phases[ci] += W[co][ci] (x) narrow[co], written as a
// gather: phase position q collects narrow position q - shift of every tap.
template <typename T>
void correlate_transpose(const CorrelationGeometry& g, const T* narrow, const T* weight, std::vector<T>& phases) {
  phases.assign(g.phase_size() + g.max_shift(), T{0});
  const std::size_t k = g.kernel;
  const std::size_t s = g.stride;
  const std::size_t lead = g.max_shift();
  const std::size_t span = lead + g.phase_plane();
  // Each narrow plane widened to phase_w columns, with `lead` zeros in front
  // and zeros after it up to a full phase plane.
  std::vector<T> ext(g.narrow_channels * span, T{0});
  for (std::size_t c = 0; c < g.narrow_channels; ++c) {
    for (std::size_t oy = 0; oy < g.narrow_h; ++oy) {
      const T* src = narrow + (c * g.narrow_h + oy) * g.narrow_w;
      std::copy(src, src + g.narrow_w, ext.data() + c * span + lead + oy * g.phase_w);
    }
  }
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> weight_index;
  std::vector<T> w;
  for (std::size_t a = 0; a < s; ++a) {
    for (std::size_t b = 0; b < s; ++b) {
      offsets.clear();
      weight_index.clear();
      for (std::size_t co = 0; co < g.narrow_channels; ++co) {
        for (std::size_t ky = a; ky < k; ky += s) {
          for (std::size_t kx = b; kx < k; kx += s) {
            offsets.push_back(co * span + lead - (ky / s) * g.phase_w - kx / s);
            weight_index.push_back(co * g.wide_channels * k * k + ky * k + kx);
          }
        }
      }
      const std::size_t count = offsets.size();
      offsets.resize(padded_taps(count), 0);
      w.assign(offsets.size(), T{0});
      for (std::size_t ci = 0; ci < g.wide_channels; ++ci) {
        for (std::size_t t = 0; t < count; ++t) w[t] = weight[weight_index[t] + ci * k * k];
        T* dst = phases.data() + ((ci * s + a) * s + b) * g.phase_plane();
        accumulate_taps(dst, g.phase_plane(), ext.data(), offsets, w);
      }
    }
  }
}

// Dot product with fixed lane-wise partial sums, so the result does not
// depend on the vector width the compiler picks.
template <typename T>
T lane_dot(const T* __restrict a, const T* __restrict b, std::size_t n) {
  constexpr std::size_t kLanes = 8;
  T lanes[kLanes] = {};
  const std::size_t body = n - n % kLanes;
  for (std::size_t f = 0; f < body; f += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) lanes[l] += a[f + l] * b[f + l];
  }
  T total{0};
  for (std::size_t f = body; f < n; ++f) total += a[f] * b[f];
  for (std::size_t l = 0; l < kLanes; ++l) total += lanes[l];
  return total;
}

// dW[co][ci][ky][kx] += sum_oy,ox narrow[co][oy][ox] * wide_padded[ci][s*oy+ky][s*ox+kx]
template <typename T>
void correlate_weight_grad(const CorrelationGeometry& g, const std::vector<T>& phases, const T* narrow, T* dweight) {
  const std::size_t len = g.ext_plane();
  const std::size_t per_out = g.wide_channels * g.kernel * g.kernel;
  std::vector<T> ext;
  widen(g, narrow, ext);
  const std::vector<std::size_t> offsets = tap_offsets(g);
  for (std::size_t co = 0; co < g.narrow_channels; ++co) {
    const T* dn = ext.data() + co * len;
    T* dw = dweight + co * per_out;
    for (std::size_t t = 0; t < per_out; ++t) dw[t] += lane_dot(dn, phases.data() + offsets[t], len);
  }
}

template <typename T>
void add_bias(T* planes, const std::vector<T>& bias, std::size_t plane) {
  for (std::size_t c = 0; c < bias.size(); ++c) {
    T* p = planes + c * plane;
    for (std::size_t i = 0; i < plane; ++i) p[i] += bias[c];
  }
}

template <typename T>
void accumulate_bias_grad(const T* planes, std::vector<T>& dbias, std::size_t plane) {
  for (std::size_t c = 0; c < dbias.size(); ++c) {
    const T* p = planes + c * plane;
    T total{0};
    for (std::size_t i = 0; i < plane; ++i) total += p[i];
    dbias[c] += total;
  }
}

template <typename T>
void require_kind(const ConvLayer<T>& layer, bool transposed) {
  if (layer.transposed != transposed) {
    throw InvalidArgument(transposed ? "deconv2d needs a transposed layer" : "conv2d needs a non-transposed layer");
  }
  if (layer.kernel % 2 == 0) throw InvalidArgument("conv kernel size must be odd");
}

}  // namespace detail

template <typename T>
Tensor4<T> conv2d(const Tensor4<T>& x, const ConvLayer<T>& layer) {
  detail::require_kind(layer, false);
  Tensor4<T> y(layer.output_shape(x.shape()));
  const detail::CorrelationGeometry g(layer.in_channels, layer.out_channels, layer.kernel, layer.stride, x.height(),
                                      x.width());
  std::vector<T> phases;
  for (std::size_t n = 0; n < x.batch(); ++n) {
    detail::pack_phases(g, x.item(n), phases);
    detail::add_bias(y.item(n), layer.bias, y.shape().plane());
    detail::correlate(g, phases, layer.weight.data(), y.item(n));
  }
  return y;
}

/// Accumulates parameter gradients into `grad`; returns dL/dx.
template <typename T>
Tensor4<T> conv2d_backward(const Tensor4<T>& x, const ConvLayer<T>& layer, const Tensor4<T>& dy, LayerGrad<T>& grad) {
  detail::require_kind(layer, false);
  if (dy.shape() != layer.output_shape(x.shape())) throw ShapeMismatch("conv2d_backward: gradient shape mismatch");
  const detail::CorrelationGeometry g(layer.in_channels, layer.out_channels, layer.kernel, layer.stride, x.height(),
                                      x.width());
  Tensor4<T> dx(x.shape());
  std::vector<T> phases;
  for (std::size_t n = 0; n < x.batch(); ++n) {
    detail::pack_phases(g, x.item(n), phases);
    detail::correlate_weight_grad(g, phases, dy.item(n), grad.weight.data());
    detail::accumulate_bias_grad(dy.item(n), grad.bias, dy.shape().plane());
    detail::correlate_transpose(g, dy.item(n), layer.weight.data(), phases);
    detail::unpack_phases_add(g, phases, dx.item(n));
  }
  return dx;
}

template <typename T>
Tensor4<T> deconv2d(const Tensor4<T>& x, const ConvLayer<T>& layer) {
  detail::require_kind(layer, true);
  Tensor4<T> y(layer.output_shape(x.shape()));
  const detail::CorrelationGeometry g(layer.out_channels, layer.in_channels, layer.kernel, layer.stride, y.height(),
                                      y.width());
  std::vector<T> phases;
  for (std::size_t n = 0; n < x.batch(); ++n) {
    detail::correlate_transpose(g, x.item(n), layer.weight.data(), phases);
    detail::add_bias(y.item(n), layer.bias, y.shape().plane());
    detail::unpack_phases_add(g, phases, y.item(n));
  }
  return y;
}

template <typename T>
Tensor4<T> deconv2d_backward(const Tensor4<T>& x, const ConvLayer<T>& layer, const Tensor4<T>& dy, LayerGrad<T>& grad) {
  detail::require_kind(layer, true);
  if (dy.shape() != layer.output_shape(x.shape())) throw ShapeMismatch("deconv2d_backward: gradient shape mismatch");
  const detail::CorrelationGeometry g(layer.out_channels, layer.in_channels, layer.kernel, layer.stride, dy.height(),
                                      dy.width());
  Tensor4<T> dx(x.shape());
  std::vector<T> phases;
  for (std::size_t n = 0; n < x.batch(); ++n) {
    detail::pack_phases(g, dy.item(n), phases);
    detail::correlate_weight_grad(g, phases, x.item(n), grad.weight.data());
    detail::accumulate_bias_grad(dy.item(n), grad.bias, dy.shape().plane());
    detail::correlate(g, phases, layer.weight.data(), dx.item(n));
  }
  return dx;
}

/// Dispatches on layer.transposed.
template <typename T>
Tensor4<T> apply(const ConvLayer<T>& layer, const Tensor4<T>& x) {
  return layer.transposed ? deconv2d(x, layer) : conv2d(x, layer);
}

template <typename T>
Tensor4<T> apply_backward(const ConvLayer<T>& layer, const Tensor4<T>& x, const Tensor4<T>& dy, LayerGrad<T>& grad) {
  return layer.transposed ? deconv2d_backward(x, layer, dy, grad) : conv2d_backward(x, layer, dy, grad);
}

}  // namespace pdn::nn
