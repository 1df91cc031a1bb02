#pragma once
// Mini-batch SGD with momentum and validation-loss early stopping.
//
// The loop is generic over a model type exposing for_each_tensor(),
// zeros_like() and a Scalar typedef; an adapter supplies per-sample
// gradient accumulation and prediction. Per-sample gradients are summed in
// batch order, so a fixed seed gives bit-identical results.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "ius/neural/classifier.hpp"
#include "ius/neural/epu.hpp"
#include "ius/neural/optimizer.hpp"

namespace ius::neural {

struct TrainConfig {
  double learning_rate = 1e-3;
  double momentum = 0.9;
  int batch_size = 64;
  int max_epochs = 50;
  int patience = 10;
  std::uint64_t rng_seed = 42;

  void validate() const {
    if (!(learning_rate > 0.0)) fail(ErrorKind::Config, "learning_rate must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) fail(ErrorKind::Config, "momentum must be in [0,1)");
    if (batch_size < 1) fail(ErrorKind::Config, "batch_size must be >= 1");
    if (max_epochs < 0) fail(ErrorKind::Config, "max_epochs must be >= 0");
    if (patience < 1) fail(ErrorKind::Config, "patience must be >= 1");
  }
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;  // index into epochs, -1 when no epoch ran

  friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

// Seeds for initialization and shuffling are derived from one seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

template <typename Model, typename Input, typename Adapter>
Evaluation evaluate(const Model& model, std::span<const Input> inputs, std::span<const int> labels,
                    const Adapter& adapter) {
  Evaluation ev;
  if (inputs.empty()) return ev;
  int correct = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const double p = adapter.probability(model, inputs[i]);
    ev.loss += binary_cross_entropy(labels[i], p);
    correct += (p >= 0.5 ? 1 : 0) == labels[i];
  }
  ev.loss /= static_cast<double>(inputs.size());
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(inputs.size());
  return ev;
}

namespace detail {

inline void check_binary_split(std::span<const int> labels, const char* what) {
  if (labels.empty()) fail(ErrorKind::EmptySet, std::string(what) + " split is empty");
  bool has0 = false, has1 = false;
  for (int y : labels) {
    check_label(y);
    has0 = has0 || y == 0;
    has1 = has1 || y == 1;
  }
  if (std::string(what) == "training" && !(has0 && has1))
    fail(ErrorKind::DegenerateData, "training split contains a single class");
}

}  // namespace detail

// Trains model in place. On return model holds the best-validation-loss
// parameters (or its initial parameters when max_epochs == 0).
template <typename Model, typename Input, typename Adapter>
TrainHistory fit(Model& model, std::span<const Input> train, std::span<const int> train_labels,
                 std::span<const Input> val, std::span<const int> val_labels,
                 const TrainConfig& config, const Adapter& adapter) {
  config.validate();
  if (train.size() != train_labels.size() || val.size() != val_labels.size())
    fail(ErrorKind::Shape, "inputs and labels differ in length");
  detail::check_binary_split(train_labels, "training");
  detail::check_binary_split(val_labels, "validation");

  TrainHistory history;
  if (config.max_epochs == 0) return history;

  using T = typename Model::Scalar;
  std::mt19937_64 shuffle_rng(derive_seed(config.rng_seed, 2));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  Model velocity = model.zeros_like();
  Model best = model;
  double best_loss = std::numeric_limits<double>::infinity();
  int since_best = 0;
  const MomentumSettings settings{config.learning_rate, config.momentum};

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    int correct = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      Model grads = model.zeros_like();
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t idx = order[k];
        double p = 0.0;
        const double loss = adapter.accumulate(model, train[idx], train_labels[idx], grads, p);
        if (!std::isfinite(loss)) fail(ErrorKind::Numeric, "non-finite training loss");
        loss_sum += loss;
        correct += (p >= 0.5 ? 1 : 0) == train_labels[idx];
      }
      scale_tensors(grads, static_cast<T>(1.0 / static_cast<double>(stop - start)));
      sgd_momentum_update(model, grads, velocity, settings);
    }

    const Evaluation ev = evaluate(model, val, val_labels, adapter);
    if (!std::isfinite(ev.loss)) fail(ErrorKind::Numeric, "non-finite validation loss");
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.train_loss = loss_sum / static_cast<double>(train.size());
    rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(train.size());
    rec.val_loss = ev.loss;
    rec.val_accuracy = ev.accuracy;
    history.epochs.push_back(rec);

    if (ev.loss < best_loss) {
      best_loss = ev.loss;
      best = model;
      history.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  model = std::move(best);
  return history;
}

// Adapter for the additive PFM model.
template <typename T>
struct EpuAdapter {
  double probability(const EpuModel<T>& model, const EpuInput<T>& input) const {
    return epu_forward(model, input).probability;
  }
  double accumulate(const EpuModel<T>& model, const EpuInput<T>& input, int y, EpuModel<T>& grads,
                    double& p) const {
    EpuTrace<T> trace;
    const double loss = backprop(model, input, y, grads, trace);
    p = trace.prediction.probability;
    return loss;
  }
};

template <typename T>
struct ClassifierAdapter {
  double probability(const ImageClassifier<T>& model, const Matrix<T>& input) const {
    return model.probability(input);
  }
  double accumulate(const ImageClassifier<T>& model, const Matrix<T>& input, int y,
                    ImageClassifier<T>& grads, double& p) const {
    return model.accumulate_gradient(input, y, grads, p);
  }
};

using EpuModelF = EpuModel<float>;

struct TrainedEpu {
  EpuModelF model;
  TrainHistory history;
};

// Fresh model with seeded initialization.
inline EpuModelF make_epu(pfm::PfmConfig config, const Architecture& arch, std::uint64_t seed) {
  EpuModelF model(config, arch);
  std::mt19937_64 rng(derive_seed(seed, 1));
  model.initialize(rng);
  return model;
}

// Joint end-to-end training of all sub-networks and the bias.
inline TrainedEpu train_epu(std::span<const EpuInput<float>> train, std::span<const int> train_labels,
                            std::span<const EpuInput<float>> val, std::span<const int> val_labels,
                            pfm::PfmConfig config, const Architecture& arch,
                            const TrainConfig& train_config) {
  TrainedEpu out{make_epu(config, arch, train_config.rng_seed), {}};
  out.history = fit(out.model, train, train_labels, val, val_labels, train_config, EpuAdapter<float>{});
  return out;
}

}  // namespace ius::neural
