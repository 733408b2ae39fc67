#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "pdn/dataset.hpp"
#include "pdn/error.hpp"
#include "pdn/model/network.hpp"
#include "pdn/nn/loss.hpp"
#include "pdn/nn/rmsprop.hpp"
#include "pdn/parallel.hpp"
#include "pdn/random.hpp"

namespace pdn::model {

struct TrainOptions {
  std::size_t epochs = 10;
  std::size_t batch_size = 100;
  nn::RmsPropConfig rmsprop;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct TrainReport {
  std::vector<double> train_mse;
  std::vector<double> validation_mse;
  std::vector<double> epoch_seconds;
  std::size_t epochs_completed = 0;
};

namespace detail {

inline Tensor4<float> patch_tensor(std::span<const float> values, std::size_t patch_size) {
  return Tensor4<float>({1, 1, patch_size, patch_size}, std::vector<float>(values.begin(), values.end()));
}

}  // namespace detail

/// Mean per-patch MSE of the network over `indices` (no clamping, no updates).
inline double dataset_mse(const Network<float>& net, const PatchDataset& ds, const std::vector<std::size_t>& indices,
                          unsigned threads = 1) {
  if (indices.empty()) return std::nan("");
  std::vector<double> losses(indices.size());
  parallel_for(indices.size(), threads, [&](std::size_t k) {
    const auto x = detail::patch_tensor(ds.input(indices[k]), ds.patch_size);
    const auto t = detail::patch_tensor(ds.target(indices[k]), ds.patch_size);
    losses[k] = nn::mse_loss(net.forward(x), t);
  });
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
}

/// RMSProp on the batch-mean MSE with a seeded shuffle per epoch. Per-sample
/// gradients are summed in sample order, so results do not depend on
/// `threads`.
inline TrainReport train(Network<float>& net, const PatchDataset& ds, const TrainOptions& opt) {
  if (ds.size() == 0) throw InvalidArgument("train: dataset is empty");
  if (ds.patch_size != net.config().patch_size) throw ShapeMismatch("train: dataset patch size differs from network");
  const auto train_idx = ds.indices(Split::kTrain);
  const auto val_idx = ds.indices(Split::kValidation);
  if (opt.batch_size == 0 || opt.batch_size > train_idx.size()) {
    throw InvalidArgument("train: batch size " + std::to_string(opt.batch_size) + " exceeds training set of " +
                          std::to_string(train_idx.size()));
  }
  TrainReport report;
  if (opt.epochs == 0) return report;

  auto& state = net.optimizer();
  state.config = opt.rmsprop;
  auto params = net.parameters();
  if (state.mean_square.size() != params.size()) {
    state.mean_square.clear();
    for (const auto& p : params) state.mean_square.emplace_back(p.size(), 0.0f);
  }

  std::vector<std::vector<LayerGrad<float>>> sample_grads(opt.batch_size, net.make_gradients());
  std::vector<double> sample_loss(opt.batch_size);
  auto total = net.make_gradients();

  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::size_t> order = train_idx;
    CounterRng rng(opt.seed, RngDomain::kEpochShuffle, epoch);
    shuffle(std::span<std::size_t>(order), rng);

    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += opt.batch_size, ++batch_index) {
      const std::size_t count = std::min(opt.batch_size, order.size() - begin);
      const float scale = 1.0f / static_cast<float>(count);
      parallel_for(count, opt.threads, [&](std::size_t k) {
        const std::size_t idx = order[begin + k];
        const auto x = detail::patch_tensor(ds.input(idx), ds.patch_size);
        const auto t = detail::patch_tensor(ds.target(idx), ds.patch_size);
        Tape<float> tape;
        const auto y = net.forward(x, tape);
        sample_loss[k] = nn::mse_loss(y, t);
        auto dy = nn::mse_backward(y, t);
        for (auto& v : dy.vec()) v *= scale;
        for (auto& g : sample_grads[k]) g.zero();
        net.backward(tape, dy, sample_grads[k]);
      });
      double batch_loss = 0.0;
      for (std::size_t k = 0; k < count; ++k) batch_loss += sample_loss[k];
      batch_loss /= static_cast<double>(count);
      if (!std::isfinite(batch_loss)) {
        throw NumericalError("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch_index));
      }
      for (std::size_t l = 0; l < total.size(); ++l) {
        total[l].zero();
        for (std::size_t k = 0; k < count; ++k) {
          for (std::size_t i = 0; i < total[l].weight.size(); ++i) total[l].weight[i] += sample_grads[k][l].weight[i];
          for (std::size_t i = 0; i < total[l].bias.size(); ++i) total[l].bias[i] += sample_grads[k][l].bias[i];
        }
      }
      for (const auto& g : total) {
        const bool finite = std::all_of(g.weight.begin(), g.weight.end(), [](float v) { return std::isfinite(v); }) &&
                            std::all_of(g.bias.begin(), g.bias.end(), [](float v) { return std::isfinite(v); });
        if (!finite) {
          throw NumericalError("train: non-finite gradient at epoch " + std::to_string(epoch) + ", batch " +
                               std::to_string(batch_index));
        }
      }
      try {
        for (std::size_t l = 0; l < total.size(); ++l) {
          nn::rmsprop_step<float>(params[2 * l], total[l].weight, state.mean_square[2 * l], opt.rmsprop);
          nn::rmsprop_step<float>(params[2 * l + 1], total[l].bias, state.mean_square[2 * l + 1], opt.rmsprop);
        }
      } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " (epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch_index) + ")");
      }
      loss_sum += batch_loss * static_cast<double>(count);
    }
    report.train_mse.push_back(loss_sum / static_cast<double>(order.size()));
    report.validation_mse.push_back(dataset_mse(net, ds, val_idx, opt.threads));
    report.epoch_seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    report.epochs_completed = epoch + 1;
  }
  net.set_peak(ds.peak);
  return report;
}

}  // namespace pdn::model
