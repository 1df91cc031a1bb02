#pragma once
// Downstream probe: train the whole-image classifier on a curated set and
// on a control set of equal size, then compare accuracy and AUC on a real
// test set. Each repeat uses one seed for both members of the pair.

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ius/data/manifest.hpp"
#include "ius/neural/classifier.hpp"
#include "ius/neural/train.hpp"

namespace ius::harness {

struct LabeledImage {
  std::string id;
  std::string label;
  Image image;
};

struct ProbeConfig {
  neural::TrainConfig train;
  neural::Architecture arch;  // in_channels and input size follow the images
  int repeats = 5;
  std::uint64_t seed = 42;
  double val_fraction = 0.2;  // carved from each training set for early stopping
};

struct ProbeRepeat {
  int repeat = 0;
  std::uint64_t seed = 0;
  double curated_accuracy = 0.0, curated_auc = 0.0;
  double control_accuracy = 0.0, control_auc = 0.0;
};

// Mann-Whitney estimate; ties count one half.
inline double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < scores.size(); ++i) (labels[i] ? pos : neg).push_back(scores[i]);
  if (pos.empty() || neg.empty()) fail(ErrorKind::DegenerateData, "AUC needs both classes");
  double wins = 0.0;
  for (double p : pos)
    for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

namespace detail {

struct ProbeOutcome {
  double accuracy = 0.0, auc = 0.0;
};

inline ProbeOutcome train_and_test(const std::vector<const LabeledImage*>& set, const std::vector<LabeledImage>& test,
                                   const std::vector<std::string>& classes, const ProbeConfig& cfg,
                                   std::uint64_t seed) {
  using Input = neural::Matrix<float>;
  // stratified carve for early stopping
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < set.size(); ++i) groups[set[i]->label].push_back(i);
  std::mt19937_64 rng(neural::derive_seed(seed, 7));
  std::vector<bool> is_val(set.size(), false);
  for (auto& [label, idx] : groups) {
    std::shuffle(idx.begin(), idx.end(), rng);
    auto take = static_cast<std::size_t>(std::llround(cfg.val_fraction * static_cast<double>(idx.size())));
    take = std::clamp<std::size_t>(take, idx.size() > 1 ? 1 : 0, idx.size() > 1 ? idx.size() - 1 : 0);
    for (std::size_t k = 0; k < take; ++k) is_val[idx[k]] = true;
  }
  std::vector<Input> tx, vx;
  std::vector<std::string> tl, vl;
  for (std::size_t i = 0; i < set.size(); ++i) {
    (is_val[i] ? vx : tx).push_back(neural::image_to_input<float>(set[i]->image));
    (is_val[i] ? vl : tl).push_back(set[i]->label);
  }
  const auto ty = data::binary_labels(tl, classes);
  const auto vy = data::binary_labels(vl, classes);

  neural::Architecture arch = cfg.arch;
  arch.in_channels = set.front()->image.channels();
  arch.input_rows = set.front()->image.height();
  arch.input_cols = set.front()->image.width();
  neural::ImageClassifier<float> model(arch);
  std::mt19937_64 init_rng(neural::derive_seed(seed, 1));
  model.initialize(init_rng);
  neural::TrainConfig tc = cfg.train;
  tc.rng_seed = seed;
  neural::fit(model, std::span<const Input>(tx), std::span<const int>(ty), std::span<const Input>(vx),
              std::span<const int>(vy), tc, neural::ClassifierAdapter<float>{});

  std::vector<double> scores;
  std::vector<std::string> test_labels;
  int correct = 0;
  for (const auto& t : test) {
    const double p = model.probability(neural::image_to_input<float>(t.image));
    scores.push_back(p);
    test_labels.push_back(t.label);
  }
  const auto y = data::binary_labels(test_labels, classes);
  for (std::size_t i = 0; i < y.size(); ++i) correct += (scores[i] >= 0.5 ? 1 : 0) == y[i];
  return {static_cast<double>(correct) / static_cast<double>(y.size()), roc_auc(scores, y)};
}

}  // namespace detail

inline std::vector<ProbeRepeat> downstream_probe(const std::vector<std::string>& curated_ids,
                                                 const std::vector<std::string>& control_ids,
                                                 const std::vector<LabeledImage>& pool,
                                                 const std::vector<LabeledImage>& test, const ProbeConfig& cfg) {
  if (curated_ids.size() != control_ids.size())
    fail(ErrorKind::Protocol, "curated (" + std::to_string(curated_ids.size()) + ") and control (" +
                                  std::to_string(control_ids.size()) + ") sets differ in size");
  if (cfg.repeats < 0) fail(ErrorKind::Config, "repeats must be >= 0");
  std::vector<ProbeRepeat> out;
  if (cfg.repeats == 0) return out;

  std::map<std::string, const LabeledImage*> by_id;
  for (const auto& p : pool) by_id[p.id] = &p;
  auto gather = [&](const std::vector<std::string>& ids) {
    std::vector<const LabeledImage*> set;
    std::map<std::string, int> dist;
    for (const auto& id : ids) {
      const auto it = by_id.find(id);
      if (it == by_id.end()) fail(ErrorKind::Protocol, "id '" + id + "' is not in the pool");
      set.push_back(it->second);
      ++dist[it->second->label];
    }
    return std::make_pair(set, dist);
  };
  const auto [curated, cur_dist] = gather(curated_ids);
  const auto [control, ctl_dist] = gather(control_ids);
  if (cur_dist != ctl_dist) fail(ErrorKind::Protocol, "curated and control class distributions differ");
  if (curated.empty()) fail(ErrorKind::EmptySet, "probe sets are empty");
  if (test.empty()) fail(ErrorKind::EmptySet, "probe test set is empty");

  std::vector<std::string> classes;
  for (const auto& t : test)
    if (std::find(classes.begin(), classes.end(), t.label) == classes.end()) classes.push_back(t.label);
  std::sort(classes.begin(), classes.end());

  for (int r = 0; r < cfg.repeats; ++r) {
    ProbeRepeat row;
    row.repeat = r;
    row.seed = neural::derive_seed(cfg.seed, 500 + static_cast<std::uint64_t>(r));
    const auto a = detail::train_and_test(curated, test, classes, cfg, row.seed);
    const auto b = detail::train_and_test(control, test, classes, cfg, row.seed);
    row.curated_accuracy = a.accuracy;
    row.curated_auc = a.auc;
    row.control_accuracy = b.accuracy;
    row.control_auc = b.auc;
    out.push_back(row);
  }
  return out;
}

}  // namespace ius::harness
