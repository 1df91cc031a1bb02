#pragma once
// Baseline profiles as indented JSON. Doubles are written with enough
// digits to read back bit-exactly.

#include <cmath>
#include <filesystem>
#include <string>

#include "json.hpp"

#include "ius/data/csv.hpp"
#include "ius/pfm/decompose.hpp"
#include "ius/scoring/utility.hpp"

namespace ius::data {

inline constexpr int kBaselineFormatVersion = 1;

inline std::string serialize_baseline(const scoring::BaselineProfile& b) {
  nlohmann::ordered_json j;
  j["format_version"] = kBaselineFormatVersion;
  j["pfm_config"] = pfm::to_string(b.config);
  j["scope"] = scoring::to_string(b.scope);
  j["pfm_names"] = pfm::map_names(b.config);
  auto profiles = nlohmann::ordered_json::object();
  for (const auto& [key, v] : b.profiles) {
    for (double x : v)
      if (!std::isfinite(x)) fail(ErrorKind::Numeric, "baseline '" + key + "' is not finite");
    profiles[key] = v;
  }
  j["profiles"] = std::move(profiles);
  auto counts = nlohmann::ordered_json::object();
  for (const auto& [key, n] : b.counts) counts[key] = n;
  j["counts"] = std::move(counts);
  return j.dump(2) + "\n";
}

inline scoring::BaselineProfile parse_baseline(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("baseline file is not valid JSON (truncated?): ") + e.what());
  }
  auto field = [](const nlohmann::json& o, const char* key) -> const nlohmann::json& {
    if (!o.is_object() || !o.contains(key)) fail(ErrorKind::Format, std::string("baseline missing field '") + key + "'");
    return o.at(key);
  };
  try {
    const auto& ver = field(j, "format_version");
    if (!ver.is_number_integer()) fail(ErrorKind::Format, "format_version must be an integer");
    if (ver.get<int>() != kBaselineFormatVersion)
      fail(ErrorKind::Version, "baseline format version " + std::to_string(ver.get<int>()) +
                                   " is not supported (expected version " +
                                   std::to_string(kBaselineFormatVersion) + ")");
    scoring::BaselineProfile b;
    b.config = pfm::parse_pfm_config(field(j, "pfm_config").get<std::string>());
    try {
      b.scope = scoring::parse_scope(field(j, "scope").get<std::string>());
    } catch (const Error& e) {
      fail(ErrorKind::Format, e.what());
    }
    const auto names = field(j, "pfm_names").get<std::vector<std::string>>();
    const auto& expected = pfm::map_names(b.config);
    if (names != std::vector<std::string>(expected.begin(), expected.end()))
      fail(ErrorKind::Config, "pfm_names do not match pfm_config " + std::string(pfm::to_string(b.config)));

    for (const auto& [key, v] : field(j, "profiles").items()) {
      if (!v.is_array() || v.size() != scoring::ProfileVector{}.size())
        fail(ErrorKind::Format, "baseline profile '" + key + "' must have 4 components");
      scoring::ProfileVector p{};
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (!v[i].is_number()) fail(ErrorKind::Format, "baseline profile '" + key + "' has a non-number");
        p[i] = v[i].get<double>();
        if (!(std::abs(p[i]) <= 1.0)) fail(ErrorKind::Range, "baseline component outside [-1, 1] in '" + key + "'");
      }
      b.profiles[key] = p;
    }
    for (const auto& [key, n] : field(j, "counts").items()) {
      if (!n.is_number_integer() || n.get<long>() < 1)
        fail(ErrorKind::Format, "baseline count for '" + key + "' must be a positive integer");
      b.counts[key] = n.get<long>();
    }
    if (b.profiles.empty()) fail(ErrorKind::EmptySet, "baseline has no profiles");
    for (const auto& [key, p] : b.profiles)
      if (!b.counts.count(key)) fail(ErrorKind::Format, "baseline has no count for '" + key + "'");
    if (b.counts.size() != b.profiles.size()) fail(ErrorKind::Format, "baseline counts and profiles disagree");
    const bool global_shape = b.profiles.size() == 1 && b.profiles.count(scoring::kGlobalKey);
    if (b.scope == scoring::BaselineScope::Global && !global_shape)
      fail(ErrorKind::Format, "global baseline must hold exactly the '*' profile");
    if (b.scope == scoring::BaselineScope::PerClass && b.profiles.count(scoring::kGlobalKey))
      fail(ErrorKind::Format, "per-class baseline may not use the '*' key");
    return b;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed baseline file: ") + e.what());
  }
}

inline void save_baseline(const scoring::BaselineProfile& b, const std::filesystem::path& path) {
  write_text_file(path.string(), serialize_baseline(b));
}

inline scoring::BaselineProfile load_baseline(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::Io, "missing baseline file " + path.string());
  try {
    return parse_baseline(read_text_file(path.string()));
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace ius::data
