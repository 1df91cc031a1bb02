#pragma once
// Manifest-driven train / baseline / score steps. The CLI commands are thin
// wrappers over these, so a library caller with the same arguments gets
// byte-identical outputs.

#include <optional>
#include <string>
#include <vector>

#include "ius/data/image_io.hpp"
#include "ius/data/manifest.hpp"
#include "ius/neural/train.hpp"
#include "ius/scoring/scoring.hpp"

namespace ius::harness {

inline ColorSpace modality_of(pfm::PfmConfig config) {
  return config == pfm::PfmConfig::Color ? ColorSpace::Srgb : ColorSpace::Gray;
}

inline std::vector<Image> load_images(const data::Manifest& m, int rows, int cols, ColorSpace modality) {
  std::vector<Image> out;
  out.reserve(m.rows.size());
  for (const auto& r : m.rows) out.push_back(data::load_image(m.resolve(r), rows, cols, modality));
  return out;
}

struct TrainRequest {
  ColorSpace modality = ColorSpace::Srgb;
  int input_size = 64;
  neural::Architecture arch;  // input size and channels are overwritten
  neural::TrainConfig train;
  data::SplitSpec split;      // split.rng_seed is replaced by train.rng_seed
};

struct ManifestTraining {
  neural::EpuModelF model;
  neural::TrainHistory history;
  data::SplitManifests splits;
  std::vector<std::string> classes;  // index = binary label
};

inline ManifestTraining train_from_manifest(const data::Manifest& m, const TrainRequest& req) {
  if (!m.has_labels) fail(ErrorKind::Label, "training needs a manifest with a label column");
  if (req.input_size < 8) fail(ErrorKind::Config, "input size must be >= 8");
  data::SplitSpec spec = req.split;
  spec.rng_seed = req.train.rng_seed;
  auto splits = data::stratified_split(m, spec);
  const auto classes = m.classes();

  auto prepare = [&](const data::Manifest& part, std::vector<int>& labels) {
    std::vector<neural::EpuInput<float>> x;
    for (const auto& img : load_images(part, req.input_size, req.input_size, req.modality))
      x.push_back(neural::to_input<float>(pfm::decompose(img)));
    labels = data::binary_labels(part.labels(), classes);
    return x;
  };
  std::vector<int> ty, vy;
  const auto tx = prepare(splits.train, ty);
  const auto vx = prepare(splits.val, vy);

  neural::Architecture arch = req.arch;
  arch.input_rows = arch.input_cols = req.input_size;
  auto trained = neural::train_epu(tx, ty, vx, vy, pfm::config_for(req.modality), arch, req.train);
  return {std::move(trained.model), std::move(trained.history), std::move(splits), classes};
}

// Rows a baseline is built from: the TEST split when the manifest has a
// split column, otherwise every row.
inline data::Manifest baseline_rows(const data::Manifest& m) {
  if (!m.has_split_column()) return m;
  auto test = m.subset(data::Split::Test);
  if (test.rows.empty()) fail(ErrorKind::EmptySet, "manifest has a split column but no TEST rows");
  return test;
}

inline scoring::BaselineScope default_scope(const data::Manifest& m) {
  return m.has_labels ? scoring::BaselineScope::PerClass : scoring::BaselineScope::Global;
}

inline scoring::BaselineProfile baseline_from_manifest(const neural::EpuModelF& model, const data::Manifest& m,
                                                       std::optional<scoring::BaselineScope> scope = std::nullopt) {
  const auto rows = baseline_rows(m);
  const auto s = scope.value_or(default_scope(rows));
  if (s == scoring::BaselineScope::PerClass && !rows.has_labels)
    fail(ErrorKind::Label, "per-class baseline needs a manifest with a label column");
  const auto images = load_images(rows, model.input_rows(), model.input_cols(), modality_of(model.config()));
  const auto labels = rows.labels();
  return scoring::compute_baseline(model, images, rows.has_labels ? &labels : nullptr, s);
}

// Every manifest row is scored; ids are the manifest paths and class keys
// the labels (if any). Images load lazily inside score_set.
inline scoring::ScoreResult score_manifest(const neural::EpuModelF& model, const scoring::BaselineProfile& baseline,
                                           const data::Manifest& m, const scoring::Thresholds& thresholds = {},
                                           unsigned threads = 1) {
  thresholds.validate();
  std::vector<scoring::ScoreItem> items;
  const int rows = model.input_rows(), cols = model.input_cols();
  const ColorSpace modality = modality_of(model.config());
  for (const auto& r : m.rows) {
    std::optional<std::string> key;
    if (m.has_labels) key = r.label;
    items.push_back({r.path, key, [path = m.resolve(r), rows, cols, modality] {
                       return data::load_image(path, rows, cols, modality);
                     }});
  }
  scoring::ScoreOptions opt;
  opt.thresholds = thresholds;
  opt.threads = threads;
  return scoring::score_set(model, baseline, items, opt);
}

}  // namespace ius::harness
