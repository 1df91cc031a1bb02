#pragma once
// Model-facing scoring: profiles of images, baselines over real sets and
// batch scoring of synthetic sets.

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ius/neural/epu.hpp"
#include "ius/scoring/utility.hpp"

namespace ius::scoring {

template <typename T>
ContributionProfile profile_of(const neural::EpuModel<T>& model, const Image& image) {
  if (pfm::config_for(image.color_space()) != model.config())
    fail(ErrorKind::Config, std::string("model expects ") + pfm::to_string(model.config()) +
                                " images, got " + to_string(image.color_space()));
  return neural::epu_forward(model, pfm::decompose(image)).profile;
}

template <typename T>
BaselineProfile compute_baseline(const neural::EpuModel<T>& model, const std::vector<Image>& images,
                                 const std::vector<std::string>* labels, BaselineScope scope,
                                 const std::vector<std::string>& expected_classes = {}) {
  if (images.empty()) fail(ErrorKind::EmptySet, "baseline requires at least one image");
  std::vector<ContributionProfile> profiles;
  profiles.reserve(images.size());
  for (const auto& img : images) profiles.push_back(profile_of(model, img));
  return baseline_from_profiles(profiles, labels, scope, expected_classes);
}

struct ScoreItem {
  std::string id;
  std::optional<std::string> class_key;
  std::function<Image()> load;
};

struct ScoredImage {
  std::string id;
  std::optional<std::string> class_key;
  ContributionProfile profile;
  UtilityScore score;
};

struct ScoreFailure {
  std::size_t index = 0;
  std::string id;
  std::string message;
};

struct ScoreResult {
  std::vector<ScoredImage> scored;
  std::vector<ScoreFailure> failures;
};

struct ScoreOptions {
  Thresholds thresholds;
  unsigned threads = 1;
};

// Scores every item; failures are collected and the batch continues. Output
// preserves input order regardless of thread count.
template <typename T>
ScoreResult score_set(const neural::EpuModel<T>& model, const BaselineProfile& baseline,
                      const std::vector<ScoreItem>& items, const ScoreOptions& options = {}) {
  struct Slot {
    std::optional<ScoredImage> ok;
    std::string error;
  };
  std::vector<Slot> slots(items.size());
  auto work = [&](std::size_t i) {
    const auto& item = items[i];
    try {
      const ContributionProfile profile = profile_of(model, item.load());
      const UtilityScore s = ius_score(profile, baseline,
                                       baseline.scope == BaselineScope::PerClass ? item.class_key
                                                                                 : std::nullopt,
                                       options.thresholds);
      slots[i].ok = ScoredImage{item.id, item.class_key, profile, s};
    } catch (const std::exception& e) {
      slots[i].error = e.what();
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, items.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < items.size(); ++i) work(i);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < items.size(); i += threads) work(i);
      });
  }

  ScoreResult result;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (slots[i].ok)
      result.scored.push_back(std::move(*slots[i].ok));
    else
      result.failures.push_back({i, items[i].id, slots[i].error});
  }
  return result;
}

// Convenience: in-memory images.
inline ScoreItem make_item(std::string id, std::optional<std::string> class_key, Image image) {
  return {std::move(id), std::move(class_key), [img = std::move(image)] { return img; }};
}

}  // namespace ius::scoring
