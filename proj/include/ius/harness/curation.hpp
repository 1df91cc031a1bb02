#pragma once
// Scored pools, VH curation and the random control selection.

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ius/data/manifest.hpp"
#include "ius/data/report.hpp"
#include "ius/scoring/scoring.hpp"

namespace ius::harness {

struct PoolEntry {
  std::string id;
  std::string class_key;
  scoring::ProfileVector profile{};
  double u = 0.0;
  scoring::UtilityLevel level = scoring::UtilityLevel::VL;
};

struct ScoredPool {
  pfm::PfmConfig config = pfm::PfmConfig::Color;
  std::vector<PoolEntry> entries;

  std::map<std::string, int> class_counts() const {
    std::map<std::string, int> out;
    for (const auto& e : entries) ++out[e.class_key];
    return out;
  }

  void validate() const {
    std::set<std::string> ids;
    for (const auto& e : entries) {
      if (!ids.insert(e.id).second) fail(ErrorKind::Format, "pool id '" + e.id + "' is not unique");
      if (scoring::utility_level(e.u) != e.level)
        fail(ErrorKind::Format, "pool entry '" + e.id + "' has a level inconsistent with u");
    }
  }
};

inline ScoredPool pool_from_scores(const std::vector<scoring::ScoredImage>& scored, pfm::PfmConfig config) {
  ScoredPool pool{config, {}};
  for (const auto& s : scored)
    pool.entries.push_back({s.id, s.class_key.value_or(""), s.profile.components, s.score.u, s.score.level});
  pool.validate();
  return pool;
}

inline ScoredPool pool_from_report(const data::ScoreReport& report) {
  ScoredPool pool{report.config, {}};
  for (const auto& r : report.rows)
    pool.entries.push_back({r.id, r.class_key.value_or(""), r.components, r.u, r.level});
  if (report.standard_thresholds) pool.validate();
  return pool;
}

// "A=0.5,B=0.5" -> {A: 0.5, B: 0.5}
inline std::map<std::string, double> parse_distribution(const std::string& text) {
  std::map<std::string, double> out;
  for (const auto& item : data::split_csv_line(text)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) fail(ErrorKind::Config, "distribution entry '" + item + "' is not key=weight");
    const std::string key = item.substr(0, eq);
    double w = 0.0;
    try {
      w = data::parse_double(item.substr(eq + 1), "distribution");
    } catch (const Error&) {
      fail(ErrorKind::Config, "distribution weight for '" + key + "' is not a number");
    }
    if (!(w >= 0.0)) fail(ErrorKind::Config, "distribution weight for '" + key + "' is negative");
    if (!out.emplace(key, w).second) fail(ErrorKind::Config, "distribution repeats class '" + key + "'");
  }
  double sum = 0.0;
  for (const auto& [k, w] : out) sum += w;
  if (out.empty() || !(sum > 0.0)) fail(ErrorKind::Config, "distribution is empty");
  return out;
}

// Exact per-class counts by largest remainder (ties to the earlier key).
inline std::map<std::string, int> class_targets(int target_count, const std::map<std::string, double>& dist,
                                                const ScoredPool& pool) {
  if (target_count < 0) fail(ErrorKind::Config, "target count must be >= 0");
  const auto present = pool.class_counts();
  std::vector<double> weights;
  for (const auto& [key, w] : dist) {
    if (!present.count(key)) fail(ErrorKind::MissingClass, "distribution class '" + key + "' is not in the pool");
    weights.push_back(w);
  }
  const auto counts = data::largest_remainder(target_count, weights);
  std::map<std::string, int> out;
  std::size_t i = 0;
  for (const auto& [key, w] : dist) out[key] = counts[i++];
  return out;
}

// Only VH entries; within each class highest u first, ties by id.
inline std::vector<std::string> curate_vh(const ScoredPool& pool, int target_count,
                                          const std::map<std::string, double>& dist) {
  const auto targets = class_targets(target_count, dist, pool);
  std::map<std::string, int> shortfall;
  std::vector<std::string> out;
  for (const auto& [key, want] : targets) {
    std::vector<const PoolEntry*> vh;
    for (const auto& e : pool.entries)
      if (e.class_key == key && e.level == scoring::UtilityLevel::VH) vh.push_back(&e);
    std::sort(vh.begin(), vh.end(), [](const PoolEntry* a, const PoolEntry* b) {
      return a->u != b->u ? a->u > b->u : a->id < b->id;
    });
    if (static_cast<int>(vh.size()) < want) {
      shortfall[key] = want - static_cast<int>(vh.size());
      continue;
    }
    for (int i = 0; i < want; ++i) out.push_back(vh[i]->id);
  }
  if (!shortfall.empty()) throw DeficitError(shortfall);
  return out;
}

// Seeded uniform sampling without replacement per class, ignoring scores.
inline std::vector<std::string> random_control(const ScoredPool& pool, int target_count,
                                               const std::map<std::string, double>& dist, std::uint64_t seed) {
  const auto targets = class_targets(target_count, dist, pool);
  std::map<std::string, int> shortfall;
  std::vector<std::string> out;
  std::mt19937_64 rng(seed);
  for (const auto& [key, want] : targets) {
    std::vector<const PoolEntry*> members;
    for (const auto& e : pool.entries)
      if (e.class_key == key) members.push_back(&e);
    if (static_cast<int>(members.size()) < want) {
      shortfall[key] = want - static_cast<int>(members.size());
      continue;
    }
    // partial Fisher-Yates
    for (int i = 0; i < want; ++i) {
      std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), members.size() - 1);
      std::swap(members[i], members[pick(rng)]);
      out.push_back(members[i]->id);
    }
  }
  if (!shortfall.empty()) throw DeficitError(shortfall);
  return out;
}

inline std::string format_id_list(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) out += id + "\n";
  return out;
}

}  // namespace ius::harness
