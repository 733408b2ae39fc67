#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "pdn/nn/activation.hpp"
#include "pdn/nn/conv.hpp"
#include "pdn/nn/fragments.hpp"
#include "pdn/nn/gradient_check.hpp"
#include "pdn/nn/loss.hpp"
#include "pdn/nn/rmsprop.hpp"
#include "pdn/nn/tensor.hpp"
#include "pdn/selftest.hpp"

namespace {

using pdn::nn::ConvLayer;
using pdn::nn::Shape4;
using pdn::nn::Tensor4;

template <typename T>
Tensor4<T> random_tensor(Shape4 s, std::uint64_t seed) {
  pdn::CounterRng rng(seed, pdn::RngDomain::kTest, 100);
  return pdn::selftest::random_tensor<T>(s, rng);
}

// Brute-force zero-padded strided correlation, straight from the definition.
Tensor4<double> reference_conv(const Tensor4<double>& x, const ConvLayer<double>& l) {
  Tensor4<double> y(l.output_shape(x.shape()));
  const long p = static_cast<long>(l.padding());
  const long k = static_cast<long>(l.kernel);
  for (std::size_t co = 0; co < l.out_channels; ++co) {
    for (std::size_t oy = 0; oy < y.height(); ++oy) {
      for (std::size_t ox = 0; ox < y.width(); ++ox) {
        double acc = l.bias[co];
        for (std::size_t ci = 0; ci < l.in_channels; ++ci) {
          for (long ky = 0; ky < k; ++ky) {
            for (long kx = 0; kx < k; ++kx) {
              const long iy = static_cast<long>(oy * l.stride) + ky - p;
              const long ix = static_cast<long>(ox * l.stride) + kx - p;
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(x.height()) || ix >= static_cast<long>(x.width())) continue;
              acc += l.weight[((co * l.in_channels + ci) * k + ky) * k + kx] * x.at(0, ci, iy, ix);
            }
          }
        }
        y.at(0, co, oy, ox) = acc;
      }
    }
  }
  return y;
}

TEST(Conv2d, IdentityKernel) {
  auto l = ConvLayer<double>::make(1, 1, 1, 1, false);
  l.weight = {1.0};
  const auto x = random_tensor<double>({2, 1, 5, 7}, 1);
  EXPECT_EQ(pdn::nn::conv2d(x, l).vec(), x.vec());
}

TEST(Conv2d, HandComputedSums) {
  auto l = ConvLayer<double>::make(1, 1, 3, 1, false);
  std::fill(l.weight.begin(), l.weight.end(), 1.0);
  const Tensor4<double> x(Shape4{1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  const auto y = pdn::nn::conv2d(x, l);
  EXPECT_EQ(y.at(0, 0, 1, 1), 45.0);
  EXPECT_EQ(y.at(0, 0, 0, 0), 12.0);
}

TEST(Conv2d, ShapesHalveWithStrideTwo) {
  const auto l = ConvLayer<float>::make(1, 32, 5, 2, false);
  EXPECT_EQ(l.output_shape({1, 1, 64, 64}), (Shape4{1, 32, 32, 32}));
  EXPECT_EQ(l.output_shape({1, 1, 63, 9}), (Shape4{1, 32, 32, 5}));
  EXPECT_EQ(l.parameter_count(), 5u * 5u * 1u * 32u + 32u);
  EXPECT_EQ(pdn::nn::conv2d(Tensor4<float>(Shape4{1, 1, 64, 64}), l).shape(), (Shape4{1, 32, 32, 32}));
}

TEST(Conv2d, MatchesBruteForceDefinition) {
  pdn::CounterRng rng(3, pdn::RngDomain::kTest);
  for (std::size_t stride : {1, 2, 3}) {
    for (std::size_t kernel : {1, 3, 5}) {
      auto l = ConvLayer<double>::make(2, 3, kernel, stride, false);
      pdn::selftest::randomize(l, rng);
      const auto x = pdn::selftest::random_tensor<double>({1, 2, 11, 8}, rng);
      const auto got = pdn::nn::conv2d(x, l);
      const auto want = reference_conv(x, l);
      ASSERT_EQ(got.shape(), want.shape());
      for (std::size_t i = 0; i < got.size(); ++i) ASSERT_NEAR(got[i], want[i], 1e-12) << stride << " " << kernel;
    }
  }
}

TEST(Conv2d, RejectsBadLayers) {
  EXPECT_THROW(ConvLayer<float>::make(1, 1, 4, 1, false), pdn::InvalidArgument);
  EXPECT_THROW(ConvLayer<float>::make(1, 1, 3, 0, false), pdn::InvalidArgument);
  const auto l = ConvLayer<float>::make(2, 1, 3, 1, false);
  EXPECT_THROW(pdn::nn::conv2d(Tensor4<float>(Shape4{1, 3, 4, 4}), l), pdn::ShapeMismatch);
  EXPECT_THROW(pdn::nn::deconv2d(Tensor4<float>(Shape4{1, 2, 4, 4}), l), pdn::InvalidArgument);
}

TEST(Deconv2d, ShapesDoubleWithStrideTwo) {
  const auto l = ConvLayer<float>::make(16, 32, 5, 2, true);
  EXPECT_EQ(pdn::nn::deconv2d(Tensor4<float>(Shape4{1, 16, 16, 16}), l).shape(), (Shape4{1, 32, 32, 32}));
}

TEST(Deconv2d, IdentityKernel) {
  auto l = ConvLayer<double>::make(1, 1, 1, 1, true);
  l.weight = {1.0};
  const auto x = random_tensor<double>({1, 1, 6, 6}, 2);
  EXPECT_EQ(pdn::nn::deconv2d(x, l).vec(), x.vec());
}

TEST(Deconv2d, IsAdjointOfConv) {
  EXPECT_LT(pdn::selftest::adjoint_max_error(20, 7), 1e-5);
}

TEST(Deconv2d, AdjointHoldsForDefaultLayerShapes) {
  pdn::CounterRng rng(8, pdn::RngDomain::kTest);
  auto conv = ConvLayer<double>::make(32, 16, 5, 2, false);
  pdn::selftest::randomize(conv, rng);
  std::fill(conv.bias.begin(), conv.bias.end(), 0.0);
  auto deconv = ConvLayer<double>::make(16, 32, 5, 2, true);
  deconv.weight = conv.weight;
  const auto x = pdn::selftest::random_tensor<double>({1, 32, 32, 32}, rng);
  const auto y = pdn::selftest::random_tensor<double>({1, 16, 16, 16}, rng);
  const double lhs = pdn::nn::dot(pdn::nn::conv2d(x, conv), y);
  const double rhs = pdn::nn::dot(x, pdn::nn::deconv2d(y, deconv));
  EXPECT_NEAR(lhs, rhs, 1e-10 * std::fabs(lhs));
}

TEST(Relu, ForwardAndBackward) {
  const Tensor4<float> x(Shape4{1, 1, 1, 3}, {-1, 0, 2});
  EXPECT_EQ(pdn::nn::relu(x).vec(), (std::vector<float>{0, 0, 2}));
  const Tensor4<float> dy(Shape4{1, 1, 1, 3}, {5, 6, 7});
  EXPECT_EQ(pdn::nn::relu_backward(x, dy).vec(), (std::vector<float>{0, 0, 7}));
  const Tensor4<float> pos(Shape4{1, 1, 2, 2}, {0.5f, 1, 2, 3});
  EXPECT_EQ(pdn::nn::relu(pos).vec(), pos.vec());
}

TEST(Mse, ValuesAndGradient) {
  const Tensor4<double> p(Shape4{1, 1, 1, 2}, {1, 3});
  const Tensor4<double> t(Shape4{1, 1, 1, 2}, {0, 1});
  EXPECT_DOUBLE_EQ(pdn::nn::mse_loss(p, t), 2.5);
  EXPECT_EQ(pdn::nn::mse_loss(p, p), 0.0);
  EXPECT_EQ(pdn::nn::mse_backward(p, t).vec(), (std::vector<double>{1.0, 2.0}));
  EXPECT_THROW(pdn::nn::mse_loss(p, Tensor4<double>(Shape4{1, 1, 2, 1})), pdn::ShapeMismatch);
}

TEST(RmsProp, FirstStepIsScaledSign) {
  pdn::nn::RmsPropConfig cfg{.learning_rate = 0.01, .decay = 0.9, .epsilon = 0.0};
  std::vector<double> p{1.0, 1.0, 1.0};
  const std::vector<double> g{0.3, -42.0, 1e-6};
  std::vector<double> v(3, 0.0);
  pdn::nn::rmsprop_step<double>(p, g, v, cfg);
  const double step = 0.01 / std::sqrt(0.1);
  EXPECT_NEAR(step, 3.16228 * 0.01, 1e-7);
  EXPECT_NEAR(p[0], 1.0 - step, 1e-12);
  EXPECT_NEAR(p[1], 1.0 + step, 1e-12);
  EXPECT_NEAR(p[2], 1.0 - step, 1e-9);
}

TEST(RmsProp, ZeroGradientOnlyDecaysState) {
  pdn::nn::RmsPropConfig cfg;
  std::vector<float> p{1.5f, -2.0f};
  std::vector<float> v{0.4f, 0.0f};
  const std::vector<float> g{0.0f, 0.0f};
  pdn::nn::rmsprop_step<float>(p, g, v, cfg);
  EXPECT_EQ(p, (std::vector<float>{1.5f, -2.0f}));
  EXPECT_FLOAT_EQ(v[0], 0.36f);
  EXPECT_EQ(v[1], 0.0f);
}

TEST(RmsProp, RepeatedGradientTakesSmallerSteps) {
  pdn::nn::RmsPropConfig cfg;
  std::vector<double> p{0.0};
  std::vector<double> v{0.0};
  const std::vector<double> g{0.7};
  pdn::nn::rmsprop_step<double>(p, g, v, cfg);
  const double first = std::fabs(p[0]);
  pdn::nn::rmsprop_step<double>(p, g, v, cfg);
  EXPECT_LT(std::fabs(p[0]) - first, first);
  for (double s : v) EXPECT_GE(s, 0.0);
}

TEST(RmsProp, NonFiniteGradientAborts) {
  std::vector<double> p{1.0, 2.0};
  std::vector<double> v{0.0, 0.0};
  const std::vector<double> g{0.1, std::numeric_limits<double>::quiet_NaN()};
  EXPECT_THROW(pdn::nn::rmsprop_step<double>(p, g, v, {}), pdn::NumericalError);
  EXPECT_EQ(p, (std::vector<double>{1.0, 2.0}));
}

TEST(GradientCheck, SingleLayers) {
  EXPECT_LT(pdn::selftest::check_conv_layer(false, 1).max_relative_error, 1e-6);
  EXPECT_LT(pdn::selftest::check_conv_layer(true, 1).max_relative_error, 1e-6);
  EXPECT_LT(pdn::selftest::check_relu(1).max_relative_error, 1e-6);
  EXPECT_LT(pdn::selftest::check_mse(1).max_relative_error, 1e-6);
}

TEST(GradientCheck, ConvOnRandomEightByEightInput) {
  pdn::CounterRng rng(4, pdn::RngDomain::kTest);
  for (std::size_t stride : {1, 2}) {
    auto l = ConvLayer<double>::make(1, 4, 5, stride, false);
    pdn::selftest::randomize(l, rng);
    pdn::nn::ConvFragment f(l);
    const auto r = pdn::nn::gradient_check(f, pdn::selftest::random_tensor<double>({1, 1, 8, 8}, rng));
    EXPECT_TRUE(r.passed);
    EXPECT_LT(r.max_relative_error, 1e-6);
    EXPECT_EQ(r.checked, l.parameter_count() + 64);
  }
}

// Conv layer whose backward pass reports negated gradients.
class SignFlippedConv : public pdn::nn::ConvFragment {
 public:
  using ConvFragment::ConvFragment;
  Tensor4<double> backward(const Tensor4<double>& x, const Tensor4<double>& dy) {
    auto dx = ConvFragment::backward(x, dy);
    for (auto& v : dx.vec()) v = -v;
    for (auto g : gradients()) {
      for (auto& v : g) v = -v;
    }
    return dx;
  }
};

TEST(GradientCheck, DetectsSignFlippedBackward) {
  pdn::CounterRng rng(5, pdn::RngDomain::kTest);
  auto l = ConvLayer<double>::make(1, 2, 3, 1, false);
  pdn::selftest::randomize(l, rng);
  SignFlippedConv f(l);
  const auto r = pdn::nn::gradient_check(f, pdn::selftest::random_tensor<double>({1, 1, 6, 6}, rng));
  EXPECT_FALSE(r.passed);
  EXPECT_NEAR(r.max_relative_error, 2.0, 1e-6);
}

TEST(Training, SmallStepOnFixedBatchLowersLoss) {
  pdn::CounterRng rng(6, pdn::RngDomain::kTest);
  auto l = ConvLayer<float>::make(1, 1, 3, 1, false);
  pdn::selftest::randomize(l, rng);
  const auto x = pdn::selftest::random_tensor<float>({4, 1, 8, 8}, rng, 0.0, 1.0);
  const auto& target = x;
  std::vector<float> vw(l.weight.size(), 0.0f), vb(l.bias.size(), 0.0f);
  const pdn::nn::RmsPropConfig cfg{.learning_rate = 1e-4};
  double loss = pdn::nn::mse_loss(pdn::nn::conv2d(x, l), target);
  for (int step = 0; step < 5; ++step) {
    pdn::nn::LayerGrad<float> g(l);
    const auto y = pdn::nn::conv2d(x, l);
    pdn::nn::conv2d_backward(x, l, pdn::nn::mse_backward(y, target), g);
    pdn::nn::rmsprop_step<float>(l.weight, g.weight, vw, cfg);
    pdn::nn::rmsprop_step<float>(l.bias, g.bias, vb, cfg);
    const double next = pdn::nn::mse_loss(pdn::nn::conv2d(x, l), target);
    EXPECT_LT(next, loss) << step;
    loss = next;
  }
}

TEST(Tensor, FiniteChecks) {
  Tensor4<float> t(Shape4{1, 1, 2, 2});
  EXPECT_TRUE(t.all_finite());
  t[3] = std::numeric_limits<float>::infinity();
  EXPECT_FALSE(t.all_finite());
  EXPECT_THROW(pdn::nn::require_finite(t, "t"), pdn::NumericalError);
  EXPECT_THROW(Tensor4<float>(Shape4{1, 1, 2, 2}, std::vector<float>(3)), pdn::ShapeMismatch);
}

}  // namespace
