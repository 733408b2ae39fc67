#pragma once

// Two-branch convolutional autoencoder with symmetric skip connections.
//
// Each branch is a chain of strided convolutions followed by the mirrored
// chain of transposed convolutions. The output of compressing layer i is
// added to the (post-ReLU) output of the transposed layer producing the same
// shape. The last transposed layer of each branch is linear and the branch
// outputs are averaged.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <span>
#include <string>
#include <vector>

#include "pdn/error.hpp"
#include "pdn/model/config.hpp"
#include "pdn/nn/activation.hpp"
#include "pdn/nn/conv.hpp"
#include "pdn/nn/rmsprop.hpp"
#include "pdn/nn/tensor.hpp"
#include "pdn/random.hpp"

namespace pdn::model {

using nn::ConvLayer;
using nn::LayerGrad;
using nn::Shape4;
using nn::Tensor4;

/// Activations of one forward pass, needed by backward().
template <typename T>
struct Tape {
  struct BranchTape {
    std::vector<Tensor4<T>> hidden;       // hidden[0] = input, hidden[i] = relu(conv_i)
    std::vector<Tensor4<T>> encoder_pre;  // conv outputs before ReLU
    std::vector<Tensor4<T>> decoder_in;   // input of each transposed layer
    std::vector<Tensor4<T>> decoder_pre;  // transposed-layer outputs before ReLU/skip
  };
  std::vector<BranchTape> branches;
  Tensor4<T> output;
};

template <typename T>
class Network {
 public:
  Network() = default;

  /// Builds the layers described by `cfg` and initializes them from cfg.seed.
  explicit Network(NetworkConfig cfg) : config_(std::move(cfg)) {
    validate(config_);
    for (const auto& branch : config_.branches) {
      branch_offsets_.push_back(layers_.size());
      std::vector<std::size_t> channels{1};
      for (const auto& l : branch) {
        layers_.push_back(ConvLayer<T>::make(channels.back(), l.out_channels, l.kernel, l.stride, false));
        channels.push_back(l.out_channels);
      }
      const std::size_t n = branch.size();
      for (std::size_t j = 0; j < n; ++j) {
        const LayerSpec& mirror = branch[n - 1 - j];
        layers_.push_back(ConvLayer<T>::make(channels[n - j], channels[n - 1 - j], mirror.kernel, mirror.stride, true));
      }
    }
    initialize(config_.seed);
  }

  const NetworkConfig& config() const noexcept { return config_; }

  /// Peak value the weights were trained for; 0 when unknown.
  double peak() const noexcept { return peak_; }
  void set_peak(double peak) { peak_ = peak; }

  std::size_t branch_count() const noexcept { return config_.branches.size(); }
  std::size_t depth(std::size_t branch) const { return config_.branches[branch].size(); }
  std::size_t encoder_index(std::size_t branch, std::size_t i) const { return branch_offsets_[branch] + i; }
  std::size_t decoder_index(std::size_t branch, std::size_t j) const {
    return branch_offsets_[branch] + depth(branch) + j;
  }

  std::vector<ConvLayer<T>>& layers() noexcept { return layers_; }
  const std::vector<ConvLayer<T>>& layers() const noexcept { return layers_; }

  std::size_t parameter_count() const {
    std::size_t total = 0;
    for (const auto& l : layers_) total += l.parameter_count();
    return total;
  }

  /// Weight and bias spans of every layer in declaration order.
  std::vector<std::span<T>> parameters() {
    std::vector<std::span<T>> out;
    for (auto& l : layers_) {
      out.emplace_back(l.weight);
      out.emplace_back(l.bias);
    }
    return out;
  }

  /// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  void initialize(std::uint64_t seed) {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      auto& l = layers_[i];
      const double kk = static_cast<double>(l.kernel * l.kernel);
      const double limit = std::sqrt(6.0 / (kk * static_cast<double>(l.in_channels + l.out_channels)));
      CounterRng rng(seed, RngDomain::kWeightInit, i);
      for (auto& w : l.weight) w = static_cast<T>((2.0 * rng.uniform() - 1.0) * limit);
      std::fill(l.bias.begin(), l.bias.end(), T{0});
    }
  }

  std::vector<LayerGrad<T>> make_gradients() const {
    std::vector<LayerGrad<T>> g;
    g.reserve(layers_.size());
    for (const auto& l : layers_) g.emplace_back(l);
    return g;
  }

  /// Forward pass over an N x 1 x P x P batch, recording activations in `tape`.
  Tensor4<T> forward(const Tensor4<T>& x, Tape<T>& tape) const {
    check_input(x.shape());
    tape.branches.assign(branch_count(), {});
    for (std::size_t b = 0; b < branch_count(); ++b) {
      auto& bt = tape.branches[b];
      const std::size_t n = depth(b);
      bt.hidden.resize(n + 1);
      bt.encoder_pre.resize(n);
      bt.decoder_in.resize(n);
      bt.decoder_pre.resize(n);
      bt.hidden[0] = x;
      run_branch(b, 0, bt);
    }
    merge(tape);
    return tape.output;
  }

  /// Re-runs branch `b` from layer position `from` (encoder layers first,
  /// then transposed layers) reusing the earlier activations in `tape`, then
  /// re-merges the output. Used after changing one layer's parameters.
  const Tensor4<T>& forward_from(std::size_t b, std::size_t from, Tape<T>& tape) const {
    run_branch(b, from, tape.branches[b]);
    merge(tape);
    return tape.output;
  }

  /// Branch and layer position of layer index `layer`.
  std::pair<std::size_t, std::size_t> locate(std::size_t layer) const {
    for (std::size_t b = branch_count(); b-- > 0;) {
      if (layer >= branch_offsets_[b]) return {b, layer - branch_offsets_[b]};
    }
    throw InvalidArgument("layer index out of range");
  }

  Tensor4<T> forward(const Tensor4<T>& x) const {
    Tape<T> tape;
    return forward(x, tape);
  }

  /// Accumulates parameter gradients into `grads`; returns dL/dx.
  Tensor4<T> backward(const Tape<T>& tape, const Tensor4<T>& doutput, std::vector<LayerGrad<T>>& grads) const {
    if (grads.size() != layers_.size()) throw ShapeMismatch("backward: gradient list does not match layers");
    if (doutput.shape() != tape.output.shape()) throw ShapeMismatch("backward: output gradient shape mismatch");
    Tensor4<T> dx(tape.branches.front().hidden.front().shape());
    const T inv = T(1) / static_cast<T>(branch_count());
    for (std::size_t b = 0; b < branch_count(); ++b) {
      const auto& bt = tape.branches[b];
      const std::size_t n = depth(b);
      // Gradients reaching hidden[i] through skip connections.
      std::vector<Tensor4<T>> skip_grad(n + 1);
      Tensor4<T> g = doutput;
      for (auto& v : g.vec()) v *= inv;
      for (std::size_t jj = n; jj-- > 0;) {
        Tensor4<T> dz;
        if (jj + 1 == n) {
          dz = std::move(g);
        } else {
          if (config_.skip) skip_grad[n - 1 - jj] = g;
          dz = nn::relu_backward(bt.decoder_pre[jj], std::move(g));
        }
        const std::size_t li = decoder_index(b, jj);
        g = nn::deconv2d_backward(bt.decoder_in[jj], layers_[li], dz, grads[li]);
      }
      for (std::size_t i = n; i >= 1; --i) {
        if (i < n && config_.skip) add_into(g, skip_grad[i]);
        const Tensor4<T> dz = nn::relu_backward(bt.encoder_pre[i - 1], std::move(g));
        const std::size_t li = encoder_index(b, i - 1);
        g = nn::conv2d_backward(bt.hidden[i - 1], layers_[li], dz, grads[li]);
      }
      add_into(dx, g);
    }
    return dx;
  }

  /// FNV-1a hash of every ReLU mask recorded in `tape`.
  static std::uint64_t activation_signature(const Tape<T>& tape) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const Tensor4<T>& t) {
      for (std::size_t i = 0; i < t.size(); ++i) {
        h ^= t[i] > T{0} ? 1u : 0u;
        h *= 1099511628211ull;
      }
    };
    for (const auto& bt : tape.branches) {
      for (const auto& z : bt.encoder_pre) mix(z);
      for (std::size_t j = 0; j + 1 < bt.decoder_pre.size(); ++j) mix(bt.decoder_pre[j]);
    }
    return h;
  }

  template <typename U>
  Network<U> cast() const {
    Network<U> out;
    out.config_ = config_;
    out.peak_ = peak_;
    out.branch_offsets_ = branch_offsets_;
    for (const auto& l : layers_) out.layers_.push_back(l.template cast<U>());
    return out;
  }

  nn::OptimizerState<T>& optimizer() noexcept { return optimizer_; }

 private:
  template <typename>
  friend class Network;

  void check_input(const Shape4& s) const {
    if (s.channels != 1 || s.height != config_.patch_size || s.width != config_.patch_size) {
      throw ShapeMismatch("network expects Nx1x" + std::to_string(config_.patch_size) + "x" +
                          std::to_string(config_.patch_size) + " input, got " + nn::to_string(s));
    }
  }

  void run_branch(std::size_t b, std::size_t from, typename Tape<T>::BranchTape& bt) const {
    const std::size_t n = depth(b);
    for (std::size_t i = std::min(from, n); i < n; ++i) {
      bt.encoder_pre[i] = nn::conv2d(bt.hidden[i], layers_[encoder_index(b, i)]);
      bt.hidden[i + 1] = nn::relu(bt.encoder_pre[i]);
    }
    for (std::size_t j = from > n ? from - n : 0; j < n; ++j) {
      if (j == 0) {
        bt.decoder_in[0] = bt.hidden[n];
      } else {
        bt.decoder_in[j] = nn::relu(bt.decoder_pre[j - 1]);
        if (config_.skip) add_into(bt.decoder_in[j], bt.hidden[n - j]);
      }
      bt.decoder_pre[j] = nn::deconv2d(bt.decoder_in[j], layers_[decoder_index(b, j)]);
    }
  }

  void merge(Tape<T>& tape) const {
    Tensor4<T> merged(tape.branches.front().hidden.front().shape());
    const T inv = T(1) / static_cast<T>(branch_count());
    for (const auto& bt : tape.branches) {
      const auto& out = bt.decoder_pre.back();
      for (std::size_t k = 0; k < merged.size(); ++k) merged[k] += inv * out[k];
    }
    tape.output = std::move(merged);
  }

  static void add_into(Tensor4<T>& dst, const Tensor4<T>& src) {
    if (dst.shape() != src.shape()) throw ShapeMismatch("skip connection shape mismatch");
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }

  NetworkConfig config_;
  double peak_ = 0.0;
  std::vector<std::size_t> branch_offsets_;
  std::vector<ConvLayer<T>> layers_;
  nn::OptimizerState<T> optimizer_;
};

/// Adapts a double-precision network to the gradient checker.
class CheckedNetwork {
 public:
  explicit CheckedNetwork(Network<double> net) : net_(std::move(net)), grads_(net_.make_gradients()) {}

  Tensor4<double> forward(const Tensor4<double>& x) {
    dirty_.reset();
    return net_.forward(x, tape_);
  }
  /// Output after parameter tensor `tensor` changed, given that the last
  /// forward() saw the same input. Only one tensor may differ from the state
  /// the tape was last synchronised with; earlier edits must be undone first.
  Tensor4<double> forward_after_change(std::size_t tensor) {
    auto [branch, position] = net_.locate(tensor / 2);
    if (dirty_) {
      if (dirty_->first == branch) {
        position = std::min(position, dirty_->second);
      } else {
        net_.forward_from(dirty_->first, dirty_->second, tape_);
      }
    }
    dirty_ = {branch, position};
    return net_.forward_from(branch, position, tape_);
  }
  Tensor4<double> backward(const Tensor4<double>& x, const Tensor4<double>& dy) {
    net_.forward(x, tape_);
    return net_.backward(tape_, dy, grads_);
  }
  std::vector<std::span<double>> parameters() { return net_.parameters(); }
  std::vector<std::span<double>> gradients() {
    std::vector<std::span<double>> out;
    for (auto& g : grads_) {
      out.emplace_back(g.weight);
      out.emplace_back(g.bias);
    }
    return out;
  }
  void zero_grad() {
    for (auto& g : grads_) g.zero();
  }
  std::uint64_t activation_signature() const { return Network<double>::activation_signature(tape_); }

  Network<double>& network() noexcept { return net_; }
  std::vector<LayerGrad<double>>& raw_gradients() noexcept { return grads_; }

 private:
  Network<double> net_;
  std::vector<LayerGrad<double>> grads_;
  Tape<double> tape_;
  std::optional<std::pair<std::size_t, std::size_t>> dirty_;
};

}  // namespace pdn::model
