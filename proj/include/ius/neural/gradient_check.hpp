#pragma once
// Central finite-difference verification of backprop().
//
// Each parameter tensor is one group. Per group we compare the analytic
// and numeric gradient vectors with
//   rel = ||g_analytic - g_numeric|| / max(||g_analytic||, ||g_numeric||)
// and treat a group whose two norms are both below 1e-8 as passing.
//
// A central difference that straddles a ReLU or max-pool switch does not
// estimate the derivative. When either probe changes the activation
// pattern, the step for that element is shrunk (down to step / 1024) until
// the pattern is stable.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ius/neural/epu.hpp"

namespace ius::neural {

inline constexpr double kGradientFloor = 1e-8;

struct GroupCheck {
  std::string name;
  double analytic_norm = 0.0;
  double numeric_norm = 0.0;
  double relative_error = 0.0;
  bool flagged = false;
};

struct GradientReport {
  std::vector<GroupCheck> groups;

  double worst_relative_error() const {
    double worst = 0.0;
    for (const auto& g : groups) worst = std::max(worst, g.relative_error);
    return worst;
  }
  bool passed() const {
    return std::none_of(groups.begin(), groups.end(), [](const GroupCheck& g) { return g.flagged; });
  }
};

template <typename T>
double sample_loss(const EpuModel<T>& model, const EpuInput<T>& input, int y) {
  return binary_cross_entropy(y, epu_forward(model, input).probability);
}

// ReLU on/off states and pooling winners of one forward pass.
template <typename T>
std::vector<int> activation_pattern(const EpuTrace<T>& trace) {
  std::vector<int> out;
  for (const auto& t : trace.subnets) {
    for (Eigen::Index i = 0; i < t.act1.size(); ++i) out.push_back(t.act1.data()[i] > T(0));
    for (Eigen::Index i = 0; i < t.act2.size(); ++i) out.push_back(t.act2.data()[i] > T(0));
    for (Eigen::Index i = 0; i < t.hidden.size(); ++i) out.push_back(t.hidden[i] > T(0));
    out.insert(out.end(), t.argmax1.begin(), t.argmax1.end());
    out.insert(out.end(), t.argmax2.begin(), t.argmax2.end());
  }
  return out;
}

namespace detail {

template <typename T>
double loss_and_pattern(const EpuModel<T>& model, const EpuInput<T>& input, int y,
                        std::vector<int>& pattern) {
  EpuTrace<T> trace;
  const double loss = binary_cross_entropy(y, epu_forward(model, input, trace).probability);
  pattern = activation_pattern(trace);
  return loss;
}

}  // namespace detail

// Compares a supplied analytic gradient against central differences.
template <typename T>
GradientReport gradient_check(const EpuModel<T>& model, const EpuInput<T>& input, int y,
                              const EpuModel<T>& analytic, double step, double tolerance) {
  GradientReport report;
  EpuModel<T> probe = model;
  std::vector<ParamTensor<T>*> probe_tensors;
  std::vector<std::string> names;
  probe.for_each_tensor([&](const std::string& name, ParamTensor<T>& t) {
    probe_tensors.push_back(&t);
    names.push_back(name);
  });
  std::vector<const ParamTensor<T>*> analytic_tensors;
  analytic.for_each_tensor(
      [&](const std::string&, const ParamTensor<T>& t) { analytic_tensors.push_back(&t); });

  std::vector<int> base_pattern, pattern_plus, pattern_minus;
  detail::loss_and_pattern(model, input, y, base_pattern);

  for (std::size_t k = 0; k < probe_tensors.size(); ++k) {
    auto& values = probe_tensors[k]->data;
    const auto& grad = analytic_tensors[k]->data;
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const T original = values[i];
      double h = step;
      double numeric = 0.0;
      for (int attempt = 0; attempt <= 10; ++attempt, h *= 0.5) {
        values[i] = static_cast<T>(static_cast<double>(original) + h);
        const double plus = detail::loss_and_pattern(probe, input, y, pattern_plus);
        values[i] = static_cast<T>(static_cast<double>(original) - h);
        const double minus = detail::loss_and_pattern(probe, input, y, pattern_minus);
        values[i] = original;
        numeric = (plus - minus) / (2.0 * h);
        if (pattern_plus == base_pattern && pattern_minus == base_pattern) break;
      }
      const double a = static_cast<double>(grad[i]);
      diff2 += (a - numeric) * (a - numeric);
      a2 += a * a;
      n2 += numeric * numeric;
    }
    GroupCheck g;
    g.name = names[k];
    g.analytic_norm = std::sqrt(a2);
    g.numeric_norm = std::sqrt(n2);
    if (g.analytic_norm < kGradientFloor && g.numeric_norm < kGradientFloor) {
      g.relative_error = 0.0;
    } else {
      g.relative_error = std::sqrt(diff2) / std::max(g.analytic_norm, g.numeric_norm);
    }
    g.flagged = !(g.relative_error <= tolerance);
    report.groups.push_back(std::move(g));
  }
  return report;
}

template <typename T>
GradientReport gradient_check(const EpuModel<T>& model, const EpuInput<T>& input, int y,
                              double step = 1e-4, double tolerance = 1e-4) {
  if (!(step > 0.0)) fail(ErrorKind::Range, "finite-difference step must be positive");
  EpuModel<T> grads = model.zeros_like();
  backprop(model, input, y, grads);
  return gradient_check(model, input, y, grads, step, tolerance);
}

}  // namespace ius::neural
