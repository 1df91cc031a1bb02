#pragma once
// Score report CSV: `id,class,u,level,c_<name>...` in input order.
// A report scored under overridden thresholds starts with a
// `# non-standard thresholds: ...` line, which readers skip.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ius/data/csv.hpp"
#include "ius/pfm/decompose.hpp"
#include "ius/scoring/scoring.hpp"

namespace ius::data {

struct ReportRow {
  std::string id;
  std::optional<std::string> class_key;
  double u = 0.0;
  scoring::UtilityLevel level = scoring::UtilityLevel::VL;
  scoring::ProfileVector components{};
};

struct ScoreReport {
  pfm::PfmConfig config = pfm::PfmConfig::Color;
  bool standard_thresholds = true;
  std::vector<ReportRow> rows;
};

inline std::string report_header(pfm::PfmConfig config) {
  std::string h = "id,class,u,level";
  for (const auto& n : pfm::map_names(config)) h += ",c_" + n;
  return h;
}

inline std::string format_score_report(const std::vector<scoring::ScoredImage>& scored, pfm::PfmConfig config,
                                       const scoring::Thresholds& thresholds = {}) {
  std::string out;
  if (!thresholds.standard()) {
    out += "# non-standard thresholds:";
    for (double b : thresholds.bounds) out += " " + format_double(b);
    out += "\n";
  }
  out += report_header(config) + "\n";
  for (const auto& s : scored) {
    if (s.profile.config != config) fail(ErrorKind::Config, "scored image '" + s.id + "' has a different pfm config");
    check_csv_field(s.id, "id");
    const std::string cls = s.class_key.value_or("");
    check_csv_field(cls, "class");
    out += s.id + "," + cls + "," + format_double(s.score.u) + "," + scoring::to_string(s.score.level);
    for (double c : s.profile.components) out += "," + format_double(c);
    out += "\n";
  }
  return out;
}

inline void write_score_report(const std::vector<scoring::ScoredImage>& scored, pfm::PfmConfig config,
                               const std::filesystem::path& path, const scoring::Thresholds& thresholds = {}) {
  write_text_file(path.string(), format_score_report(scored, config, thresholds));
}

inline ScoreReport parse_score_report(const std::string& text) {
  ScoreReport report;
  auto lines = split_lines(text);
  std::size_t i = 0;
  while (i < lines.size() && !lines[i].empty() && lines[i][0] == '#') {
    if (lines[i].find("non-standard thresholds") != std::string::npos) report.standard_thresholds = false;
    ++i;
  }
  if (i >= lines.size()) fail(ErrorKind::Format, "score report has no header");
  if (lines[i] == report_header(pfm::PfmConfig::Color))
    report.config = pfm::PfmConfig::Color;
  else if (lines[i] == report_header(pfm::PfmConfig::Gray))
    report.config = pfm::PfmConfig::Gray;
  else
    fail(ErrorKind::Format, "unrecognized score report header '" + lines[i] + "'");
  for (++i; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split_csv_line(lines[i]);
    const std::string where = "score report line " + std::to_string(i + 1);
    if (f.size() != 8) fail(ErrorKind::Format, where + ": expected 8 fields");
    ReportRow row;
    row.id = f[0];
    if (!f[1].empty()) row.class_key = f[1];
    row.u = parse_double(f[2], where);
    row.level = scoring::parse_level(f[3]);
    for (int c = 0; c < 4; ++c) row.components[c] = parse_double(f[4 + c], where);
    report.rows.push_back(std::move(row));
  }
  return report;
}

inline ScoreReport read_score_report(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::Io, "missing score report " + path.string());
  return parse_score_report(read_text_file(path.string()));
}

}  // namespace ius::data
