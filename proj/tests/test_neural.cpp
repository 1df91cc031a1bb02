#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ius/neural/epu.hpp"
#include "ius/neural/optimizer.hpp"
#include "test_support.hpp"

using namespace ius;
using namespace ius::neural;

namespace {

// Straight-line evaluation of the sub-network with nested loops; shares no
// code with the im2col/GEMM path.
double direct_forward(const SubNetwork<double>& net, const std::vector<double>& image, int rows,
                      int cols) {
  const auto& a = net.architecture();
  auto conv = [](const std::vector<double>& in, int cin, int h, int w,
                 const ParamTensor<double>& k, const ParamTensor<double>& b, int cout) {
    std::vector<double> out(static_cast<std::size_t>(cout) * h * w);
    for (int o = 0; o < cout; ++o)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          double s = b.data[o];
          for (int c = 0; c < cin; ++c)
            for (int ky = -1; ky <= 1; ++ky)
              for (int kx = -1; kx <= 1; ++kx) {
                const int yy = y + ky, xx = x + kx;
                if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
                s += k.data[((o * cin + c) * 3 + (ky + 1)) * 3 + (kx + 1)] * in[(c * h + yy) * w + xx];
              }
          out[(o * h + y) * w + x] = std::max(0.0, s);
        }
    return out;
  };
  auto pool = [](const std::vector<double>& in, int ch, int h, int w) {
    std::vector<double> out(static_cast<std::size_t>(ch) * (h / 2) * (w / 2));
    for (int c = 0; c < ch; ++c)
      for (int y = 0; y < h / 2; ++y)
        for (int x = 0; x < w / 2; ++x) {
          double m = -1e300;
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) m = std::max(m, in[(c * h + 2 * y + dy) * w + 2 * x + dx]);
          out[(c * (h / 2) + y) * (w / 2) + x] = m;
        }
    return out;
  };
  auto c1 = conv(image, a.in_channels, rows, cols, net.conv1_weight, net.conv1_bias, a.conv1_filters);
  auto p1 = pool(c1, a.conv1_filters, rows, cols);
  auto c2 = conv(p1, a.conv1_filters, rows / 2, cols / 2, net.conv2_weight, net.conv2_bias,
                 a.conv2_filters);
  auto p2 = pool(c2, a.conv2_filters, rows / 2, cols / 2);
  const int area = (rows / 4) * (cols / 4);
  std::vector<double> gap(a.conv2_filters, 0.0);
  for (int c = 0; c < a.conv2_filters; ++c) {
    for (int i = 0; i < area; ++i) gap[c] += p2[c * area + i];
    gap[c] /= area;
  }
  double z = net.dense2_bias.data[0];
  for (int u = 0; u < a.dense_units; ++u) {
    double h = net.dense1_bias.data[u];
    for (int c = 0; c < a.conv2_filters; ++c) h += net.dense1_weight.data[u * a.conv2_filters + c] * gap[c];
    z += net.dense2_weight.data[u] * std::max(0.0, h);
  }
  return std::tanh(z);
}

}  // namespace

TEST(SubnetForward, ZeroParametersGiveZero) {
  SubNetwork<float> net(fixtures::tiny_arch());
  std::mt19937_64 rng(1);
  const auto in = fixtures::random_input<float>(rng);
  EXPECT_EQ(net.forward(in.maps[0]), 0.0f);
}

TEST(SubnetForward, MatchesDirectEvaluation) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    auto model = fixtures::random_tiny_model<double>(rng, 0.5);
    const auto in = fixtures::random_input<double>(rng);
    const auto& net = model.subnets[0];
    std::vector<double> img(in.maps[0].data(), in.maps[0].data() + in.maps[0].size());
    const double expected = direct_forward(net, img, 8, 8);
    EXPECT_NEAR(net.forward(in.maps[0]), expected, 1e-6);
    EXPECT_EQ(net.forward(in.maps[0]), net.forward(in.maps[0]));
  }
}

TEST(SubnetForward, MatchesDirectEvaluationOnOddInput) {
  std::mt19937_64 rng(9);
  auto arch = fixtures::tiny_arch(11, 9);
  SubNetwork<double> net(arch);
  net.initialize(rng);
  std::uniform_real_distribution<double> d(0, 1);
  Matrix<double> in(1, 99);
  for (Eigen::Index k = 0; k < in.cols(); ++k) in(0, k) = d(rng);
  std::vector<double> img(in.data(), in.data() + in.size());
  EXPECT_NEAR(net.forward(in), direct_forward(net, img, 11, 9), 1e-9);
}

TEST(SubnetForward, RejectsWrongShape) {
  SubNetwork<float> net(fixtures::tiny_arch());
  Matrix<float> in = Matrix<float>::Zero(1, 63);
  try {
    net.forward(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Shape);
  }
}

TEST(EpuForward, ProbabilityFromResponses) {
  EXPECT_DOUBLE_EQ(logistic(0.0), 0.5);
  EXPECT_NEAR(logistic(4.0), 0.98201379, 1e-8);
  EXPECT_DOUBLE_EQ(logistic(1.0 - 1.0 + 1.0 - 1.0), 0.5);
}

TEST(EpuForward, ZeroModelIsHalf) {
  EpuModel<float> model(pfm::PfmConfig::Color, fixtures::tiny_arch());
  std::mt19937_64 rng(3);
  const auto pred = epu_forward(model, fixtures::random_input<float>(rng));
  EXPECT_EQ(pred.probability, 0.5);
  for (double c : pred.profile.components) EXPECT_EQ(c, 0.0);
}

TEST(EpuForward, ProbabilityIsLogisticOfBiasPlusProfile) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    auto model = fixtures::random_tiny_model<float>(rng, 1.0);
    const auto pred = epu_forward(model, fixtures::random_input<float>(rng));
    double logit = model.bias.data[0];
    for (double c : pred.profile.components) {
      EXPECT_GT(c, -1.0);
      EXPECT_LT(c, 1.0);
      logit += c;
    }
    EXPECT_NEAR(pred.probability, 1.0 / (1.0 + std::exp(-logit)), 1e-12);
    EXPECT_GT(pred.probability, 0.0);
    EXPECT_LT(pred.probability, 1.0);
  }
}

TEST(EpuForward, DependsOnResponsesOnlyThroughTheirSum) {
  // Permuting sub-networks permutes responses but leaves the probability.
  std::mt19937_64 rng(5);
  auto model = fixtures::random_tiny_model<double>(rng);
  auto in = fixtures::random_input<double>(rng);
  const auto base = epu_forward(model, in);
  auto swapped = model;
  std::swap(swapped.subnets[0], swapped.subnets[3]);
  std::swap(in.maps[0], in.maps[3]);
  const auto perm = epu_forward(swapped, in);
  EXPECT_EQ(perm.profile.components[0], base.profile.components[3]);
  EXPECT_NEAR(perm.probability, base.probability, 1e-15);
}

TEST(EpuForward, RejectsConfigMismatch) {
  EpuModel<float> model(pfm::PfmConfig::Gray, fixtures::tiny_arch());
  std::mt19937_64 rng(6);
  try {
    epu_forward(model, fixtures::random_input<float>(rng));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
  }
}

TEST(BinaryCrossEntropy, Values) {
  EXPECT_NEAR(binary_cross_entropy(1, 1.0 - 1e-7), 0.0, 1e-6);
  EXPECT_NEAR(binary_cross_entropy(1, 0.5), 0.69314718, 1e-8);
  EXPECT_NEAR(binary_cross_entropy(0, 0.5), 0.69314718, 1e-8);
  EXPECT_NEAR(binary_cross_entropy(1, 0.0), -std::log(1e-7), 1e-9);
  EXPECT_THROW(binary_cross_entropy(2, 0.5), Error);
}

TEST(Backprop, BiasGradientIsPMinusY) {
  EpuModel<double> model(pfm::PfmConfig::Color, fixtures::tiny_arch());
  std::mt19937_64 rng(7);
  const auto in = fixtures::random_input<double>(rng);
  auto grads = model.zeros_like();
  backprop(model, in, 1, grads);
  EXPECT_DOUBLE_EQ(grads.bias.data[0], -0.5);
}

TEST(Backprop, SaturatedCorrectPredictionHasVanishingGradient) {
  std::mt19937_64 rng(8);
  auto model = fixtures::random_tiny_model<double>(rng, 0.3);
  model.bias.data[0] = 40.0;
  auto grads = model.zeros_like();
  backprop(model, fixtures::random_input<double>(rng), 1, grads);
  grads.for_each_tensor([](const std::string& name, const ParamTensor<double>& t) {
    for (double g : t.data) EXPECT_LT(std::abs(g), 1e-6) << name;
  });
}

TEST(SgdMomentum, ZeroGradientZeroVelocityIsNoop) {
  std::mt19937_64 rng(10);
  auto params = fixtures::random_tiny_model<float>(rng);
  const auto before = params;
  auto grads = params.zeros_like();
  auto vel = params.zeros_like();
  sgd_momentum_update(params, grads, vel, {1e-3, 0.9});
  EXPECT_EQ(params, before);
}

TEST(SgdMomentum, PlainSgdWhenMomentumIsZero) {
  std::mt19937_64 rng(11);
  auto params = fixtures::random_tiny_model<float>(rng);
  auto grads = fixtures::random_tiny_model<float>(rng);
  auto vel = params.zeros_like();
  const auto before = params;
  sgd_momentum_update(params, grads, vel, {1e-2, 0.0});
  std::vector<float> p, p0, g;
  params.for_each_tensor([&](const std::string&, const ParamTensor<float>& t) { p.insert(p.end(), t.data.begin(), t.data.end()); });
  before.for_each_tensor([&](const std::string&, const ParamTensor<float>& t) { p0.insert(p0.end(), t.data.begin(), t.data.end()); });
  grads.for_each_tensor([&](const std::string&, const ParamTensor<float>& t) { g.insert(g.end(), t.data.begin(), t.data.end()); });
  const float lr = 1e-2f;
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(p[i], p0[i] - lr * g[i]);
}

TEST(SgdMomentum, SecondStepDisplacementWithConstantGradient) {
  EpuModel<double> params(pfm::PfmConfig::Color, fixtures::tiny_arch());
  auto grads = params.zeros_like();
  grads.bias.data[0] = 2.0;
  auto vel = params.zeros_like();
  const double lr = 1e-3;
  sgd_momentum_update(params, grads, vel, {lr, 0.9});
  const double after_one = params.bias.data[0];
  sgd_momentum_update(params, grads, vel, {lr, 0.9});
  EXPECT_NEAR(params.bias.data[0] - after_one, -1.9 * lr * 2.0, 1e-15);
}

TEST(SgdMomentum, RejectsShapeMismatch) {
  EpuModel<float> a(pfm::PfmConfig::Color, fixtures::tiny_arch());
  EpuModel<float> b(pfm::PfmConfig::Color, fixtures::tiny_arch(16, 16));
  auto arch = fixtures::tiny_arch();
  arch.dense_units = 5;
  EpuModel<float> c(pfm::PfmConfig::Color, arch);
  auto v = a.zeros_like();
  EXPECT_THROW(sgd_momentum_update(a, c, v, {}), Error);
}
