#pragma once
// Classical (heavy-ball) momentum SGD:
//   v <- momentum * v - lr * g
//   theta <- theta + v

#include <span>
#include <string>
#include <vector>

#include "ius/neural/tensor.hpp"

namespace ius::neural {

struct MomentumSettings {
  double learning_rate = 1e-3;
  double momentum = 0.9;
};

namespace detail {

template <typename Model>
std::vector<ParamTensor<typename Model::Scalar>*> tensors_of(Model& model) {
  std::vector<ParamTensor<typename Model::Scalar>*> out;
  model.for_each_tensor([&out](const std::string&, auto& t) { out.push_back(&t); });
  return out;
}

}  // namespace detail

template <typename Model>
void sgd_momentum_update(Model& params, Model& grads, Model& velocity,
                         const MomentumSettings& settings) {
  using T = typename Model::Scalar;
  const auto p = detail::tensors_of(params);
  const auto g = detail::tensors_of(grads);
  const auto v = detail::tensors_of(velocity);
  if (p.size() != g.size() || p.size() != v.size())
    fail(ErrorKind::Shape, "parameter, gradient and velocity layouts differ");
  for (std::size_t k = 0; k < p.size(); ++k)
    if (p[k]->shape != g[k]->shape || p[k]->shape != v[k]->shape)
      fail(ErrorKind::Shape, "parameter, gradient and velocity shapes differ");

  const T lr = static_cast<T>(settings.learning_rate);
  const T mu = static_cast<T>(settings.momentum);
  for (std::size_t k = 0; k < p.size(); ++k) {
    auto& theta = p[k]->data;
    auto& vel = v[k]->data;
    const auto& grad = g[k]->data;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      vel[i] = mu * vel[i] - lr * grad[i];
      theta[i] = theta[i] + vel[i];
    }
  }
}

// Multiplies every gradient entry by factor.
template <typename Model>
void scale_tensors(Model& model, typename Model::Scalar factor) {
  model.for_each_tensor([factor](const std::string&, auto& t) {
    for (auto& x : t.data) x *= factor;
  });
}

}  // namespace ius::neural
