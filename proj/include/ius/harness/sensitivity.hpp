#pragma once
// Baseline subset sensitivity, profile magnitude summaries and the joint
// threshold probability.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ius/harness/curation.hpp"
#include "ius/neural/train.hpp"

namespace ius::harness {

struct SensitivityReport {
  std::vector<double> fractions;
  std::vector<scoring::BaselineProfile> baselines;  // parallel to fractions
  struct CosineEntry {
    std::string key;
    std::size_t i = 0, j = 0;
    double cosine = 0.0;
  };
  std::vector<CosineEntry> cosines;  // all pairs i < j, per baseline key
  std::vector<double> agreement;     // VH/not-VH agreement with the full baseline
  std::size_t full_index = 0;
};

// Indices of a seeded subset: per class when labels are given, otherwise
// over the whole set. Returned in ascending order.
inline std::vector<std::size_t> subset_indices(std::size_t n, const std::vector<std::string>* labels,
                                               double fraction, std::uint64_t seed) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[labels ? (*labels)[i] : std::string()].push_back(i);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> out;
  for (auto& [key, idx] : groups) {
    const auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
    if (take == 0)
      fail(ErrorKind::Size, "fraction " + data::format_double(fraction) + " selects no samples" +
                                (labels ? " of class '" + key + "'" : std::string()));
    std::shuffle(idx.begin(), idx.end(), rng);
    out.insert(out.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline bool is_vh(double u) { return scoring::utility_level(u) == scoring::UtilityLevel::VH; }

// profiles/labels: real held-out set; pool: scored synthetic entries whose
// VH status is recomputed under every baseline.
inline SensitivityReport baseline_sensitivity(const std::vector<scoring::ContributionProfile>& profiles,
                                              const std::vector<std::string>* labels,
                                              scoring::BaselineScope scope, const ScoredPool& pool,
                                              std::vector<double> fractions = {0.25, 0.5, 0.75, 1.0},
                                              std::uint64_t seed = 42) {
  if (profiles.empty()) fail(ErrorKind::EmptySet, "sensitivity needs a non-empty real set");
  if (scope == scoring::BaselineScope::PerClass && !labels)
    fail(ErrorKind::Label, "per-class sensitivity requires labels");
  SensitivityReport rep;
  rep.fractions = fractions;
  bool has_full = false;
  for (std::size_t f = 0; f < fractions.size(); ++f) {
    if (!(fractions[f] > 0.0 && fractions[f] <= 1.0)) fail(ErrorKind::Range, "fractions must lie in (0, 1]");
    if (fractions[f] == 1.0) {
      has_full = true;
      rep.full_index = f;
    }
  }
  if (!has_full) fail(ErrorKind::Config, "fractions must include 1.0");

  const auto* stratify = scope == scoring::BaselineScope::PerClass ? labels : nullptr;
  for (std::size_t f = 0; f < fractions.size(); ++f) {
    const auto idx = subset_indices(profiles.size(), stratify, fractions[f], neural::derive_seed(seed, 300 + f));
    std::vector<scoring::ContributionProfile> ps;
    std::vector<std::string> ls;
    for (auto i : idx) {
      ps.push_back(profiles[i]);
      if (labels) ls.push_back((*labels)[i]);
    }
    rep.baselines.push_back(scoring::baseline_from_profiles(ps, labels ? &ls : nullptr, scope));
  }

  for (std::size_t i = 0; i < rep.baselines.size(); ++i)
    for (std::size_t j = i + 1; j < rep.baselines.size(); ++j)
      for (const auto& [key, v] : rep.baselines[i].profiles)
        if (rep.baselines[j].profiles.count(key))
          rep.cosines.push_back({key, i, j, scoring::cosine(v, rep.baselines[j].profiles.at(key))});

  const auto& full = rep.baselines[rep.full_index];
  auto key_of = [&](const PoolEntry& e) {
    return scope == scoring::BaselineScope::PerClass ? std::optional<std::string>(e.class_key) : std::nullopt;
  };
  for (const auto& b : rep.baselines) {
    if (pool.entries.empty()) {
      rep.agreement.push_back(1.0);
      continue;
    }
    std::size_t agree = 0;
    for (const auto& e : pool.entries) {
      const scoring::ContributionProfile p{pool.config, e.profile};
      agree += is_vh(scoring::ius_score(p, b, key_of(e)).u) == is_vh(scoring::ius_score(p, full, key_of(e)).u);
    }
    rep.agreement.push_back(static_cast<double>(agree) / static_cast<double>(pool.entries.size()));
  }
  return rep;
}

struct Summary {
  std::size_t count = 0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

// Sample quantile with linear interpolation between order statistics
// (h = (n-1) p).
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) fail(ErrorKind::EmptySet, "quantile of an empty set");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline Summary summarize(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  Summary s;
  s.count = values.size();
  s.min = values.front();
  s.max = values.back();
  s.q1 = quantile_sorted(values, 0.25);
  s.median = quantile_sorted(values, 0.5);
  s.q3 = quantile_sorted(values, 0.75);
  return s;
}

struct MagnitudeReport {
  std::map<scoring::UtilityLevel, Summary> by_level;  // norm of the profile
  std::array<std::optional<Summary>, 4> vh_components;  // |f_i| within VH
  std::vector<std::string> notes;
};

inline MagnitudeReport magnitude_stats(const ScoredPool& pool) {
  MagnitudeReport rep;
  std::map<scoring::UtilityLevel, std::vector<double>> norms;
  std::array<std::vector<double>, 4> vh;
  for (const auto& e : pool.entries) {
    norms[e.level].push_back(scoring::euclidean_norm(e.profile));
    if (e.level == scoring::UtilityLevel::VH)
      for (int i = 0; i < 4; ++i) vh[i].push_back(std::abs(e.profile[i]));
  }
  for (auto level : scoring::kAllLevels) {
    if (norms[level].empty())
      rep.notes.push_back(std::string("level ") + scoring::to_string(level) + " has no entries; omitted");
    else
      rep.by_level[level] = summarize(norms[level]);
  }
  for (int i = 0; i < 4; ++i)
    if (!vh[i].empty()) rep.vh_components[i] = summarize(vh[i]);
  return rep;
}

inline std::vector<double> default_joint_thresholds() {
  std::vector<double> t;
  for (int k = 0; k <= 10; ++k) t.push_back(k / 10.0);
  return t;
}

// Fraction of profiles whose every |component| is <= t, for each t.
inline std::vector<double> joint_threshold_probability(const std::vector<scoring::ProfileVector>& profiles,
                                                       const std::vector<double>& thresholds = default_joint_thresholds()) {
  if (profiles.empty()) fail(ErrorKind::EmptySet, "joint threshold probability of an empty set");
  std::vector<double> maxabs;
  maxabs.reserve(profiles.size());
  for (const auto& p : profiles) {
    double m = 0.0;
    for (double c : p) m = std::max(m, std::abs(c));
    maxabs.push_back(m);
  }
  std::sort(maxabs.begin(), maxabs.end());
  std::vector<double> out;
  for (double t : thresholds) {
    const auto n = std::upper_bound(maxabs.begin(), maxabs.end(), t) - maxabs.begin();
    out.push_back(static_cast<double>(n) / static_cast<double>(profiles.size()));
  }
  return out;
}

}  // namespace ius::harness
