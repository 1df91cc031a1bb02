#pragma once
// Additive model over perceptual feature maps:
//
//   P(y = 1 | maps) = logistic(bias + sum_i f_i(map_i))
//
// where each f_i is a tanh-headed SubNetwork that sees only map i.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "ius/neural/subnet.hpp"
#include "ius/pfm/decompose.hpp"
#include "ius/scoring/profile.hpp"

namespace ius::neural {

inline constexpr int kNumSubnets = pfm::kNumMaps;
inline constexpr double kProbabilityEpsilon = 1e-7;

inline double logistic(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// Decomposed maps, each as a 1 x (H*W) matrix.
template <typename T>
struct EpuInput {
  pfm::PfmConfig config = pfm::PfmConfig::Color;
  int rows = 0;
  int cols = 0;
  std::array<Matrix<T>, kNumSubnets> maps;
};

template <typename T>
EpuInput<T> to_input(const pfm::PfmSet& set) {
  EpuInput<T> in;
  in.config = set.config;
  in.rows = set.rows();
  in.cols = set.cols();
  for (int i = 0; i < kNumSubnets; ++i) {
    const Plane& p = set.maps[i];
    in.maps[i].resize(1, static_cast<Eigen::Index>(p.size()));
    for (std::size_t k = 0; k < p.size(); ++k) in.maps[i](0, static_cast<Eigen::Index>(k)) = static_cast<T>(p.data[k]);
  }
  return in;
}

template <typename T>
class EpuModel {
 public:
  using Scalar = T;

  EpuModel() = default;

  // arch.in_channels is forced to 1 and the head to tanh.
  EpuModel(pfm::PfmConfig config, Architecture arch) : bias(std::vector<int>{1}), config_(config) {
    arch.in_channels = 1;
    arch.head = Head::Tanh;
    arch_ = arch;
    for (auto& s : subnets) s = SubNetwork<T>(arch_);
  }

  template <typename Rng>
  void initialize(Rng& rng) {
    for (auto& s : subnets) s.initialize(rng);
    bias.data[0] = T(0);
  }

  pfm::PfmConfig config() const noexcept { return config_; }
  const Architecture& architecture() const noexcept { return arch_; }
  int input_rows() const noexcept { return arch_.input_rows; }
  int input_cols() const noexcept { return arch_.input_cols; }

  template <typename F>
  void for_each_tensor(F&& visit) { visit_all(*this, visit); }
  template <typename F>
  void for_each_tensor(F&& visit) const { visit_all(*this, visit); }

  EpuModel zeros_like() const { return EpuModel(config_, arch_); }

  template <typename U>
  EpuModel<U> cast() const {
    EpuModel<U> out(config_, arch_);
    for (int i = 0; i < kNumSubnets; ++i) out.subnets[i] = subnets[i].template cast<U>();
    out.bias = bias.template cast<U>();
    return out;
  }

  friend bool operator==(const EpuModel&, const EpuModel&) = default;

  std::array<SubNetwork<T>, kNumSubnets> subnets;
  ParamTensor<T> bias;

 private:
  template <typename Self, typename F>
  static void visit_all(Self& self, F& visit) {
    const auto& names = pfm::map_names(self.config_);
    for (int i = 0; i < kNumSubnets; ++i) {
      self.subnets[i].for_each_tensor(
          [&](const std::string& name, auto& tensor) { visit(names[i] + "." + name, tensor); });
    }
    visit(std::string("bias"), self.bias);
  }

  pfm::PfmConfig config_ = pfm::PfmConfig::Color;
  Architecture arch_;
};

struct Prediction {
  double probability = 0.5;
  scoring::ContributionProfile profile;
};

template <typename T>
struct EpuTrace {
  std::array<SubnetTrace<T>, kNumSubnets> subnets;
  Prediction prediction;
};

namespace detail {

template <typename T>
void check_input(const EpuModel<T>& model, const EpuInput<T>& input) {
  if (input.config != model.config())
    fail(ErrorKind::Config, std::string("model expects ") + pfm::to_string(model.config()) +
                                " maps, got " + pfm::to_string(input.config));
  if (input.rows != model.input_rows() || input.cols != model.input_cols())
    fail(ErrorKind::Shape, "model expects " + std::to_string(model.input_rows()) + "x" +
                               std::to_string(model.input_cols()) + " maps, got " +
                               std::to_string(input.rows) + "x" + std::to_string(input.cols));
}

}  // namespace detail

template <typename T>
Prediction epu_forward(const EpuModel<T>& model, const EpuInput<T>& input, EpuTrace<T>& trace) {
  detail::check_input(model, input);
  Prediction pred;
  pred.profile.config = model.config();
  double logit = static_cast<double>(model.bias.data[0]);
  for (int i = 0; i < kNumSubnets; ++i) {
    const double response = static_cast<double>(model.subnets[i].forward(input.maps[i], trace.subnets[i]));
    pred.profile.components[i] = response;
  }
  for (double c : pred.profile.components) logit += c;
  pred.probability = logistic(logit);
  trace.prediction = pred;
  return pred;
}

template <typename T>
Prediction epu_forward(const EpuModel<T>& model, const EpuInput<T>& input) {
  EpuTrace<T> trace;
  return epu_forward(model, input, trace);
}

template <typename T>
Prediction epu_forward(const EpuModel<T>& model, const pfm::PfmSet& maps) {
  return epu_forward(model, to_input<T>(maps));
}

inline void check_label(int y) {
  if (y != 0 && y != 1) fail(ErrorKind::Label, "binary label must be 0 or 1, got " + std::to_string(y));
}

// -y ln p - (1 - y) ln(1 - p), with p clamped to [1e-7, 1 - 1e-7].
inline double binary_cross_entropy(int y, double p) {
  check_label(y);
  const double q = std::clamp(p, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
  return y == 1 ? -std::log(q) : -std::log(1.0 - q);
}

// Adds d(loss)/d(params) for one sample into grads; returns the loss.
template <typename T>
double backprop(const EpuModel<T>& model, const EpuInput<T>& input, int y, EpuModel<T>& grads,
                EpuTrace<T>& trace) {
  check_label(y);
  const Prediction pred = epu_forward(model, input, trace);
  const double loss = binary_cross_entropy(y, pred.probability);
  const T grad_logit = static_cast<T>(pred.probability - y);
  grads.bias.data[0] += grad_logit;
  for (int i = 0; i < kNumSubnets; ++i)
    model.subnets[i].backward(trace.subnets[i], grad_logit, grads.subnets[i]);
  return loss;
}

template <typename T>
double backprop(const EpuModel<T>& model, const EpuInput<T>& input, int y, EpuModel<T>& grads) {
  EpuTrace<T> trace;
  return backprop(model, input, y, grads, trace);
}

}  // namespace ius::neural
