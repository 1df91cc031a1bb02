#pragma once
// Baseline profiles, cosine utility scores and five-level bucketing.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ius/scoring/profile.hpp"

namespace ius::scoring {

inline constexpr double kNormFloor = 1e-9;
inline constexpr const char* kGlobalKey = "*";

enum class UtilityLevel { VL, L, M, H, VH };

inline constexpr std::array<UtilityLevel, 5> kAllLevels{UtilityLevel::VL, UtilityLevel::L,
                                                        UtilityLevel::M, UtilityLevel::H,
                                                        UtilityLevel::VH};

inline const char* to_string(UtilityLevel level) {
  switch (level) {
    case UtilityLevel::VL: return "VL";
    case UtilityLevel::L: return "L";
    case UtilityLevel::M: return "M";
    case UtilityLevel::H: return "H";
    case UtilityLevel::VH: return "VH";
  }
  return "?";
}

inline UtilityLevel parse_level(std::string_view text) {
  for (UtilityLevel l : kAllLevels)
    if (text == to_string(l)) return l;
  fail(ErrorKind::Format, "unknown utility level '" + std::string(text) + "'");
}

// Lower bounds of L, M, H, VH. Intervals are lower-closed, upper-open,
// except VH which is closed at 1.
struct Thresholds {
  std::array<double, 4> bounds{0.2, 0.4, 0.6, 0.8};

  bool standard() const { return bounds == Thresholds{}.bounds; }

  void validate() const {
    double prev = -1.0;
    for (double b : bounds) {
      if (!(b > prev && b <= 1.0)) fail(ErrorKind::Config, "thresholds must increase within (-1, 1]");
      prev = b;
    }
  }
};

inline UtilityLevel utility_level(double u, const Thresholds& t = {}) {
  if (!(u >= -1.0 && u <= 1.0)) fail(ErrorKind::Range, "utility score outside [-1,1]");
  if (u >= t.bounds[3]) return UtilityLevel::VH;
  if (u >= t.bounds[2]) return UtilityLevel::H;
  if (u >= t.bounds[1]) return UtilityLevel::M;
  if (u >= t.bounds[0]) return UtilityLevel::L;
  return UtilityLevel::VL;
}

struct UtilityScore {
  double u = 0.0;
  UtilityLevel level = UtilityLevel::VL;
};

enum class BaselineScope { Global, PerClass };

inline const char* to_string(BaselineScope s) {
  return s == BaselineScope::Global ? "global" : "per_class";
}

inline BaselineScope parse_scope(std::string_view text) {
  if (text == "global") return BaselineScope::Global;
  if (text == "per_class" || text == "per-class") return BaselineScope::PerClass;
  fail(ErrorKind::Config, "unknown baseline scope '" + std::string(text) + "'");
}

struct BaselineProfile {
  pfm::PfmConfig config = pfm::PfmConfig::Color;
  BaselineScope scope = BaselineScope::Global;
  std::map<std::string, ProfileVector> profiles;  // "*" for global scope
  std::map<std::string, long> counts;

  const ProfileVector& vector_for(const std::optional<std::string>& class_key) const {
    if (scope == BaselineScope::Global) return profiles.at(kGlobalKey);
    if (!class_key) fail(ErrorKind::Label, "per-class baseline requires a class key");
    const auto it = profiles.find(*class_key);
    if (it == profiles.end()) fail(ErrorKind::MissingClass, "baseline has no class '" + *class_key + "'");
    return it->second;
  }

  friend bool operator==(const BaselineProfile&, const BaselineProfile&) = default;
};

inline double dot(const ProfileVector& a, const ProfileVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double euclidean_norm(const ProfileVector& a) { return std::sqrt(dot(a, a)); }

// Cosine similarity; rejects near-zero vectors.
inline double cosine(const ProfileVector& a, const ProfileVector& b) {
  const double na = euclidean_norm(a), nb = euclidean_norm(b);
  if (na < kNormFloor || nb < kNormFloor)
    fail(ErrorKind::DegenerateProfile, "cosine of a vector with norm below 1e-9");
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

// Mean of profile vectors (not order sensitive beyond rounding).
inline ProfileVector mean_vector(const std::vector<ProfileVector>& vs) {
  if (vs.empty()) fail(ErrorKind::EmptySet, "mean of an empty set of profiles");
  ProfileVector sum{};
  for (const auto& v : vs)
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v[i];
  for (double& x : sum) x /= static_cast<double>(vs.size());
  return sum;
}

// Builds a baseline from already computed profiles. labels must be given
// (one per profile) when scope is PerClass; expected_classes, if non-empty,
// must each receive at least one member.
inline BaselineProfile baseline_from_profiles(const std::vector<ContributionProfile>& profiles,
                                              const std::vector<std::string>* labels,
                                              BaselineScope scope,
                                              const std::vector<std::string>& expected_classes = {}) {
  if (profiles.empty()) fail(ErrorKind::EmptySet, "baseline requires at least one profile");
  const pfm::PfmConfig config = profiles.front().config;
  for (const auto& p : profiles)
    if (p.config != config) fail(ErrorKind::Config, "profiles mix PFM configs");

  BaselineProfile out;
  out.config = config;
  out.scope = scope;
  std::map<std::string, std::vector<ProfileVector>> groups;
  if (scope == BaselineScope::Global) {
    for (const auto& p : profiles) groups[kGlobalKey].push_back(p.components);
  } else {
    if (!labels) fail(ErrorKind::Label, "per-class baseline requires labels");
    if (labels->size() != profiles.size()) fail(ErrorKind::Shape, "labels and profiles differ in length");
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      if ((*labels)[i].empty()) fail(ErrorKind::Label, "per-class baseline requires non-empty labels");
      groups[(*labels)[i]].push_back(profiles[i].components);
    }
    for (const auto& c : expected_classes)
      if (!groups.count(c)) fail(ErrorKind::MissingClass, "class '" + c + "' has no members");
  }
  for (const auto& [key, vs] : groups) {
    out.profiles[key] = mean_vector(vs);
    out.counts[key] = static_cast<long>(vs.size());
  }
  return out;
}

inline UtilityScore ius_score(const ContributionProfile& profile, const BaselineProfile& baseline,
                              const std::optional<std::string>& class_key = std::nullopt,
                              const Thresholds& thresholds = {}) {
  if (profile.config != baseline.config)
    fail(ErrorKind::Config, "profile and baseline PFM configs differ");
  const double u = cosine(profile.components, baseline.vector_for(class_key));
  return {u, utility_level(u, thresholds)};
}

// Utility of a whole set: the averaged profile scored against the baseline.
inline UtilityScore dataset_ius(const std::vector<ContributionProfile>& profiles,
                                const BaselineProfile& baseline,
                                const std::optional<std::string>& class_key = std::nullopt,
                                const Thresholds& thresholds = {}) {
  if (profiles.empty()) fail(ErrorKind::EmptySet, "dataset utility of an empty set");
  std::vector<ProfileVector> vs;
  for (const auto& p : profiles) {
    if (p.config != profiles.front().config) fail(ErrorKind::Config, "profiles mix PFM configs");
    vs.push_back(p.components);
  }
  return ius_score(ContributionProfile{profiles.front().config, mean_vector(vs)}, baseline,
                   class_key, thresholds);
}

}  // namespace ius::scoring
