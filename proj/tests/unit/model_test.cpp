#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pdn/dataset.hpp"
#include "pdn/eval/stats.hpp"
#include "pdn/log.hpp"
#include "pdn/model/config.hpp"
#include "pdn/model/denoise.hpp"
#include "pdn/model/network.hpp"
#include "pdn/model/train.hpp"
#include "pdn/model/weights_io.hpp"
#include "pdn/noise_vst.hpp"
#include "pdn/selftest.hpp"
#include "support/synthetic.hpp"

namespace {

using pdn::Image;
using pdn::model::Network;
using pdn::model::NetworkConfig;
using pdn::nn::Shape4;
using pdn::nn::Tensor4;

std::filesystem::path temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "pdn_model_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

class CaptureWarnings {
 public:
  CaptureWarnings() {
    previous_ = pdn::set_warning_handler([this](const std::string& m) { messages.push_back(m); });
  }
  ~CaptureWarnings() { pdn::set_warning_handler(previous_); }
  std::vector<std::string> messages;

 private:
  pdn::WarningHandler previous_;
};

NetworkConfig small_config(std::size_t patch = 16, std::uint64_t seed = 1) {
  NetworkConfig cfg;
  cfg.patch_size = patch;
  cfg.branches = {{{4, 3, 2}}, {{4, 3, 2}, {4, 3, 2}}};
  cfg.seed = seed;
  return cfg;
}

// A single 1x1 layer that jumps straight to a 4x4 map: nearly free to run.
NetworkConfig cheap_config() {
  NetworkConfig cfg;
  cfg.patch_size = 64;
  cfg.branches = {{{2, 1, 16}}};
  cfg.seed = 3;
  return cfg;
}

Tensor4<float> random_patch(std::size_t p, std::uint64_t seed) {
  pdn::CounterRng rng(seed, pdn::RngDomain::kTest, 200);
  return pdn::selftest::random_tensor<float>({1, 1, p, p}, rng, 0.0, 1.0);
}

pdn::PatchDataset small_dataset(std::size_t patch, std::size_t scenes, std::size_t per_image, std::uint64_t seed) {
  std::vector<pdn::SourceImage> sources;
  for (std::size_t i = 0; i < scenes; ++i) {
    sources.push_back({"s" + std::to_string(i), pdn::testing::synthetic_scene(48, 48, 100 + i)});
  }
  pdn::DatasetOptions opt;
  opt.patch_size = patch;
  opt.patches_per_image = per_image;
  opt.peak = 4.0;
  opt.seed = seed;
  return pdn::build_dataset(sources, opt);
}

TEST(Network, DefaultShapeChain) {
  const Network<float> net(NetworkConfig{});
  pdn::model::Tape<float> tape;
  const auto y = net.forward(random_patch(64, 1), tape);
  EXPECT_EQ(y.shape(), (Shape4{1, 1, 64, 64}));
  ASSERT_EQ(tape.branches.size(), 2u);
  const auto& upper = tape.branches[0];
  ASSERT_EQ(upper.hidden.size(), 3u);
  EXPECT_EQ(upper.hidden[1].shape(), (Shape4{1, 32, 32, 32}));
  EXPECT_EQ(upper.hidden[2].shape(), (Shape4{1, 16, 16, 16}));
  EXPECT_EQ(upper.decoder_pre[0].shape(), (Shape4{1, 32, 32, 32}));
  EXPECT_EQ(upper.decoder_pre[1].shape(), (Shape4{1, 1, 64, 64}));
  const auto& lower = tape.branches[1];
  ASSERT_EQ(lower.hidden.size(), 4u);
  EXPECT_EQ(lower.hidden[3].shape(), (Shape4{1, 8, 8, 8}));
  EXPECT_EQ(lower.decoder_pre[2].shape(), (Shape4{1, 1, 64, 64}));
}

TEST(Network, DefaultParameterCount) {
  const Network<float> net(NetworkConfig{});
  EXPECT_EQ(net.parameter_count(), 60986u);
  std::size_t by_formula = 0;
  for (const auto& l : net.layers()) by_formula += l.kernel * l.kernel * l.in_channels * l.out_channels + l.out_channels;
  EXPECT_EQ(by_formula, 60986u);
  EXPECT_EQ(net.layers().size(), 10u);
}

TEST(Network, RejectsBadConfigs) {
  NetworkConfig odd;
  odd.patch_size = 60;
  odd.branches = {{{4, 5, 8}}};
  EXPECT_THROW(Network<float>{odd}, pdn::ShapeMismatch);
  NetworkConfig even_kernel;
  even_kernel.branches = {{{4, 4, 2}}};
  EXPECT_THROW(Network<float>{even_kernel}, pdn::InvalidArgument);
  NetworkConfig none;
  none.branches.clear();
  EXPECT_THROW(Network<float>{none}, pdn::InvalidArgument);
  const Network<float> net(small_config());
  EXPECT_THROW(net.forward(random_patch(32, 1)), pdn::ShapeMismatch);
}

TEST(Network, ZeroWeightsGiveZeroOutput) {
  Network<float> net(NetworkConfig{});
  for (auto& l : net.layers()) {
    std::fill(l.weight.begin(), l.weight.end(), 0.0f);
    std::fill(l.bias.begin(), l.bias.end(), 0.0f);
  }
  const auto y = pdn::model::forward_full(net, random_patch(64, 2).vec());
  ASSERT_EQ(y.size(), 4096u);
  for (float v : y) EXPECT_EQ(v, 0.0f);
}

TEST(Network, ForwardFullIsDeterministicAndNonNegative) {
  const Network<float> a(NetworkConfig{});
  const Network<float> b(NetworkConfig{});
  const auto x = random_patch(64, 3).vec();
  const auto ya = pdn::model::forward_full(a, x);
  EXPECT_EQ(ya, pdn::model::forward_full(b, x));
  for (float v : ya) EXPECT_GE(v, 0.0f);
  EXPECT_THROW(pdn::model::forward_full(a, std::vector<float>(100)), pdn::ShapeMismatch);
}

TEST(Network, SkipConnectionsChangeOutput) {
  NetworkConfig on = small_config();
  NetworkConfig off = on;
  off.skip = false;
  const Network<float> a(on);
  const Network<float> b(off);
  const auto x = random_patch(16, 4);
  const auto ya = a.forward(x);
  const auto yb = b.forward(x);
  EXPECT_EQ(yb.shape(), (Shape4{1, 1, 16, 16}));
  EXPECT_NE(ya.vec(), yb.vec());
}

TEST(Network, ForwardFromMatchesFullForward) {
  Network<double> net(small_config(16, 5));
  pdn::CounterRng rng(6, pdn::RngDomain::kTest);
  const auto x = pdn::selftest::random_tensor<double>({1, 1, 16, 16}, rng);
  for (std::size_t layer = 0; layer < net.layers().size(); ++layer) {
    pdn::model::Tape<double> tape;
    net.forward(x, tape);
    net.layers()[layer].weight[0] += 0.25;
    const auto [b, pos] = net.locate(layer);
    const auto partial = net.forward_from(b, pos, tape);
    EXPECT_EQ(partial.vec(), net.forward(x).vec()) << layer;
  }
}

TEST(Network, GradientCheckOnReducedPatch) {
  const auto r = pdn::selftest::check_network(16, 1);
  EXPECT_TRUE(r.passed) << pdn::selftest::describe(r);
}

TEST(Train, ZeroEpochsLeavesWeightsAlone) {
  const auto ds = small_dataset(16, 2, 10, 1);
  Network<float> net(small_config());
  const auto before = net.layers();
  pdn::model::TrainOptions opt;
  opt.epochs = 0;
  opt.batch_size = 4;
  const auto report = pdn::model::train(net, ds, opt);
  EXPECT_EQ(report.epochs_completed, 0u);
  EXPECT_TRUE(report.train_mse.empty());
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(net.layers()[i].weight, before[i].weight);
}

TEST(Train, PreconditionsAreChecked) {
  const auto ds = small_dataset(16, 2, 10, 1);
  Network<float> net(small_config());
  pdn::model::TrainOptions opt;
  opt.batch_size = 17;  // 16 training records
  EXPECT_THROW(pdn::model::train(net, ds, opt), pdn::InvalidArgument);
  Network<float> wrong(small_config(32));
  opt.batch_size = 4;
  EXPECT_THROW(pdn::model::train(wrong, ds, opt), pdn::ShapeMismatch);
  EXPECT_THROW(pdn::model::train(net, pdn::PatchDataset{}, opt), pdn::InvalidArgument);
}

TEST(Train, SameSeedGivesIdenticalCurves) {
  const auto ds = small_dataset(16, 3, 12, 2);
  pdn::model::TrainOptions opt;
  opt.epochs = 3;
  opt.batch_size = 8;
  opt.seed = 11;
  Network<float> a(small_config());
  Network<float> b(small_config());
  const auto ra = pdn::model::train(a, ds, opt);
  const auto rb = pdn::model::train(b, ds, opt);
  EXPECT_EQ(ra.train_mse, rb.train_mse);
  EXPECT_EQ(ra.validation_mse, rb.validation_mse);
  EXPECT_EQ(ra.epochs_completed, 3u);
  EXPECT_EQ(ra.epoch_seconds.size(), 3u);
  EXPECT_EQ(a.layers()[0].weight, b.layers()[0].weight);
  EXPECT_EQ(a.peak(), 4.0);
}

TEST(Train, ThreadCountDoesNotChangeResult) {
  const auto ds = small_dataset(16, 2, 12, 3);
  pdn::model::TrainOptions opt;
  opt.epochs = 2;
  opt.batch_size = 6;
  Network<float> a(small_config());
  Network<float> b(small_config());
  const auto ra = pdn::model::train(a, ds, opt);
  opt.threads = 3;
  const auto rb = pdn::model::train(b, ds, opt);
  EXPECT_EQ(ra.train_mse, rb.train_mse);
}

TEST(Train, SmallStepOnFixedBatchDescends) {
  // Target equals input: the skip path can express an identity-like map.
  pdn::PatchDataset ds;
  ds.patch_size = 16;
  ds.peak = 1.0;
  pdn::CounterRng rng(9, pdn::RngDomain::kTest);
  for (std::size_t i = 0; i < 8; ++i) {
    std::vector<double> px(256);
    for (double& v : px) v = rng.uniform();
    ds.push("fixed", {0, 0}, px, px);
  }
  Network<float> net(small_config(16, 9));
  pdn::model::TrainOptions opt;
  opt.epochs = 4;
  opt.batch_size = 8;
  opt.rmsprop.learning_rate = 1e-4;
  const auto report = pdn::model::train(net, ds, opt);
  ASSERT_EQ(report.train_mse.size(), 4u);
  for (std::size_t e = 1; e < 4; ++e) EXPECT_LT(report.train_mse[e], report.train_mse[e - 1]);
}

TEST(Weights, RoundTripIsBitExact) {
  Network<float> net(NetworkConfig{});
  net.set_peak(4.0);
  const auto path = temp_path("roundtrip.pdnw");
  pdn::model::save_weights(net, path);
  const auto back = pdn::model::load_weights(path);
  EXPECT_EQ(back.config(), net.config());
  EXPECT_EQ(back.peak(), 4.0);
  const auto x = random_patch(64, 7);
  EXPECT_EQ(back.forward(x).vec(), net.forward(x).vec());
  EXPECT_EQ(std::filesystem::file_size(path), pdn::model::serialize_weights(net).size());
}

TEST(Weights, DamagedFilesAreRejected) {
  Network<float> net(small_config());
  net.set_peak(2.0);
  const std::string bytes = pdn::model::serialize_weights(net);
  EXPECT_THROW(pdn::model::deserialize_weights(bytes.substr(0, bytes.size() - 3)), pdn::ChecksumError);
  EXPECT_THROW(pdn::model::deserialize_weights(bytes.substr(0, 20)), pdn::ChecksumError);
  std::string flipped = bytes;
  flipped.back() ^= 0x40;
  EXPECT_THROW(pdn::model::deserialize_weights(flipped), pdn::ChecksumError);
  std::string version = bytes;
  version[4] = 9;
  EXPECT_THROW(pdn::model::deserialize_weights(version), pdn::VersionMismatch);
  std::string magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(pdn::model::deserialize_weights(magic), pdn::UnsupportedFormat);
  EXPECT_THROW(pdn::model::load_weights(temp_path("absent.pdnw")), pdn::FileNotFound);
}

TEST(Weights, LoadIntoRequiresMatchingConfig) {
  Network<float> small(small_config());
  const auto path = temp_path("small.pdnw");
  pdn::model::save_weights(small, path);
  Network<float> other(NetworkConfig{});
  EXPECT_THROW(pdn::model::load_weights_into(other, path), pdn::ConfigMismatch);
  Network<float> target(small_config());
  target.layers()[0].weight[0] = 42.0f;
  pdn::model::load_weights_into(target, path);
  EXPECT_EQ(target.layers()[0].weight, small.layers()[0].weight);
}

TEST(Denoise, Image512Takes50625Passes) {
  const Network<float> net(cheap_config());
  const Image img = pdn::scale_to_peak(pdn::testing::synthetic_scene(512, 512, 1), 4.0);
  pdn::model::DenoiseStats stats;
  const Image out = pdn::model::denoise_image(net, img, 2, 16.0, 1, &stats);
  EXPECT_EQ(stats.forward_passes, 50625u);
  EXPECT_EQ(out.width(), 512u);
  for (std::size_t s = 1, prev = 0; s <= 32; s *= 2) {
    pdn::model::DenoiseStats st;
    std::size_t calls = 0;
    const pdn::model::PatchFunction count = [&calls](std::vector<float> p) {
      ++calls;
      return p;
    };
    pdn::model::denoise_with(count, img, 64, s, 16.0, 1, &st);
    EXPECT_EQ(st.forward_passes, calls);
    if (prev) {
      const double ratio = static_cast<double>(prev) / static_cast<double>(calls);
      EXPECT_GE(ratio, 3.7);
      EXPECT_LE(ratio, 4.1);
    }
    prev = calls;
  }
}

TEST(Denoise, StrideEqualToPatchTilesOutputs) {
  Network<float> net(cheap_config());
  for (auto& l : net.layers()) {
    for (auto& b : l.bias) b = 0.3f;
  }
  const Image img = pdn::scale_to_peak(pdn::testing::synthetic_scene(512, 512, 2), 4.0);
  pdn::model::DenoiseStats stats;
  const Image out = pdn::model::denoise_image(net, img, 64, 16.0, 1, &stats);
  EXPECT_EQ(stats.forward_passes, 64u);
  for (std::size_t tr : {0u, 3u, 7u}) {
    for (std::size_t tc : {0u, 5u}) {
      std::vector<float> patch(4096);
      for (std::size_t r = 0; r < 64; ++r) {
        for (std::size_t c = 0; c < 64; ++c) patch[r * 64 + c] = static_cast<float>(img.at(tr * 64 + r, tc * 64 + c) / 4.0);
      }
      const auto y = pdn::model::forward_full(net, patch);
      for (std::size_t r = 0; r < 64; ++r) {
        for (std::size_t c = 0; c < 64; ++c) {
          const double want = std::clamp(static_cast<double>(y[r * 64 + c]) * 4.0, 0.0, 4.0);
          ASSERT_NEAR(out.at(tr * 64 + r, tc * 64 + c), want, 1e-12);
        }
      }
    }
  }
}

TEST(Denoise, IdentityPatchFunctionReturnsInput) {
  const Image img = pdn::scale_to_peak(pdn::testing::synthetic_scene(100, 90, 3), 4.0);
  const pdn::model::PatchFunction identity = [](std::vector<float> p) { return p; };
  const Image out = pdn::model::denoise_with(identity, img, 32, 5, 8.0);
  for (std::size_t i = 0; i < img.size(); ++i) ASSERT_NEAR(out.pixels()[i], img.pixels()[i], 1e-6);
}

TEST(Denoise, OutputIsClampedToPeak) {
  const Image img = pdn::scale_to_peak(pdn::testing::synthetic_scene(64, 64, 4), 2.0);
  const pdn::model::PatchFunction loud = [](std::vector<float> p) { return std::vector<float>(p.size(), 10.0f); };
  const Image high = pdn::model::denoise_with(loud, img, 64, 1, 16.0);
  for (double v : high.pixels()) EXPECT_EQ(v, 2.0);
  const pdn::model::PatchFunction negative = [](std::vector<float> p) { return std::vector<float>(p.size(), -1.0f); };
  const Image low = pdn::model::denoise_with(negative, img, 64, 1, 16.0);
  for (double v : low.pixels()) EXPECT_EQ(v, 0.0);
}

TEST(Denoise, RejectsUndersizedImages) {
  const Network<float> net(cheap_config());
  EXPECT_THROW(pdn::model::denoise_image(net, Image(63, 80, std::vector<double>(63 * 80, 1.0)), 2, 16.0),
               pdn::InvalidArgument);
}

TEST(Denoise, WarnsWhenPeakDiffersFromTraining) {
  Network<float> net(cheap_config());
  net.set_peak(4.0);
  const Image img = pdn::scale_to_peak(pdn::testing::synthetic_scene(64, 64, 5), 2.0);
  CaptureWarnings warnings;
  pdn::model::denoise_image(net, img, 64, 16.0);
  ASSERT_EQ(warnings.messages.size(), 1u);
  EXPECT_NE(warnings.messages[0].find("peak 4"), std::string::npos);
  warnings.messages.clear();
  pdn::model::denoise_image(net, pdn::scale_to_peak(img, 4.0), 64, 16.0);
  EXPECT_TRUE(warnings.messages.empty());
}

TEST(Denoise, QualityIsStableAcrossStrides) {
  // A small network trained to convergence; stride only changes how patches are stitched.
  pdn::DatasetOptions dopt;
  dopt.patch_size = 32;
  dopt.patches_per_image = 80;
  dopt.peak = 4.0;
  dopt.seed = 21;
  std::vector<pdn::SourceImage> sources;
  for (std::size_t i = 0; i < 10; ++i) sources.push_back({"t" + std::to_string(i), pdn::testing::synthetic_scene(64, 64, 300 + i)});
  const auto ds = pdn::build_dataset(sources, dopt);
  Network<float> net(small_config(32, 21));
  pdn::model::TrainOptions topt;
  topt.epochs = 20;
  topt.batch_size = 20;
  pdn::model::train(net, ds, topt);

  const Image clean = pdn::scale_to_peak(pdn::testing::synthetic_scene(96, 96, 999), 4.0);
  const Image noisy = pdn::corrupt_image(clean, pdn::NoiseSeed{5});
  double lo = 1e9;
  double hi = -1e9;
  for (std::size_t s : {1, 2, 4, 8, 16, 32}) {
    const double p = pdn::eval::psnr(clean, pdn::model::denoise_image(net, noisy, s, pdn::default_sigma(32)));
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  EXPECT_GT(lo, pdn::eval::psnr(clean, noisy) + 5.0);
  EXPECT_LT(hi - lo, 1.0);
}

}  // namespace
