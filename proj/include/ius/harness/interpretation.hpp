#pragma once
// Per-component comparison of an image profile with its baseline, laid
// out for bar-pair plots.

#include <optional>
#include <string>
#include <vector>

#include "ius/scoring/utility.hpp"

namespace ius::harness {

struct ComponentRecord {
  std::string name;
  double baseline = 0.0;
  double image = 0.0;
  double deviation = 0.0;  // image - baseline
  bool sign_agrees = false;
};

// Zero counts as its own sign, so it agrees only with zero.
inline int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

inline std::vector<ComponentRecord> interpretation_report(const scoring::ContributionProfile& profile,
                                                          const scoring::BaselineProfile& baseline,
                                                          const std::optional<std::string>& class_key = std::nullopt) {
  if (profile.config != baseline.config) fail(ErrorKind::Config, "profile and baseline PFM configs differ");
  const auto& b = baseline.vector_for(class_key);
  const auto& names = pfm::map_names(profile.config);
  std::vector<ComponentRecord> out;
  for (std::size_t i = 0; i < b.size(); ++i)
    out.push_back({names[i], b[i], profile.components[i], profile.components[i] - b[i],
                   sign_of(profile.components[i]) == sign_of(b[i])});
  return out;
}

}  // namespace ius::harness
