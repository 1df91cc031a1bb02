#pragma once
// Image manifests (`path,label[,split]` CSV) and stratified splitting.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ius/data/csv.hpp"

namespace ius::data {

enum class Split { Train, Val, Test };

inline const char* to_string(Split s) {
  switch (s) {
    case Split::Train: return "TRAIN";
    case Split::Val: return "VAL";
    case Split::Test: return "TEST";
  }
  return "?";
}

inline std::optional<Split> parse_split(std::string text) {
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return std::toupper(c); });
  if (text.empty()) return std::nullopt;
  if (text == "TRAIN") return Split::Train;
  if (text == "VAL" || text == "VALIDATION") return Split::Val;
  if (text == "TEST") return Split::Test;
  fail(ErrorKind::Format, "unknown split '" + text + "'");
}

struct ManifestRow {
  std::string path;
  std::string label;  // empty when the manifest has no label column
  std::optional<Split> split;

  friend bool operator==(const ManifestRow&, const ManifestRow&) = default;
};

struct Manifest {
  std::vector<ManifestRow> rows;
  bool has_labels = true;
  std::filesystem::path base_dir;  // relative paths resolve against this

  std::filesystem::path resolve(const ManifestRow& row) const {
    const std::filesystem::path p(row.path);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    for (const auto& r : rows) out.push_back(r.label);
    return out;
  }

  // Sorted distinct labels.
  std::vector<std::string> classes() const {
    std::set<std::string> s;
    for (const auto& r : rows) s.insert(r.label);
    return {s.begin(), s.end()};
  }

  Manifest subset(Split s) const {
    Manifest out{{}, has_labels, base_dir};
    for (const auto& r : rows)
      if (r.split == s) out.rows.push_back(r);
    return out;
  }

  bool has_split_column() const {
    return std::any_of(rows.begin(), rows.end(), [](const ManifestRow& r) { return r.split.has_value(); });
  }
};

// Header `path[,label[,split]]`. Lines are numbered from 1 in errors.
inline Manifest parse_manifest(const std::string& text, std::filesystem::path base_dir = {}) {
  const auto lines = split_lines(text);
  if (lines.empty()) fail(ErrorKind::Format, "manifest is empty (header required)");
  const auto header = split_csv_line(lines[0]);
  const bool ok_header = (header.size() == 1 && header[0] == "path") ||
                         (header.size() == 2 && header[0] == "path" && header[1] == "label") ||
                         (header.size() == 3 && header[0] == "path" && header[1] == "label" &&
                          header[2] == "split");
  if (!ok_header) fail(ErrorKind::Format, "manifest header must be path[,label[,split]], got '" + lines[0] + "'");

  Manifest m;
  m.has_labels = header.size() >= 2;
  m.base_dir = std::move(base_dir);
  std::set<std::string> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_csv_line(lines[i]);
    const std::string where = "manifest line " + std::to_string(i + 1);
    if (fields.size() != header.size())
      fail(ErrorKind::Format, where + ": expected " + std::to_string(header.size()) +
                                  " fields, got " + std::to_string(fields.size()) +
                                  " (commas in paths are not supported)");
    ManifestRow row;
    row.path = fields[0];
    if (row.path.empty()) fail(ErrorKind::Format, where + ": empty path");
    if (row.path == "path") fail(ErrorKind::Format, where + ": repeated header row");
    if (m.has_labels) {
      row.label = fields[1];
      if (row.label.empty()) fail(ErrorKind::Format, where + ": empty label");
    }
    if (header.size() == 3) {
      try {
        row.split = parse_split(fields[2]);
      } catch (const Error& e) {
        fail(ErrorKind::Format, where + ": " + e.what());
      }
    }
    if (!seen.insert(row.path).second) fail(ErrorKind::Format, where + ": duplicate path " + row.path);
    m.rows.push_back(std::move(row));
  }
  return m;
}

inline Manifest read_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::Io, "missing manifest " + path.string());
  return parse_manifest(read_text_file(path.string()), path.parent_path());
}

inline std::string format_manifest(const Manifest& m) {
  const bool with_split = m.has_split_column();
  std::string out = m.has_labels ? (with_split ? "path,label,split\n" : "path,label\n") : "path\n";
  for (const auto& r : m.rows) {
    check_csv_field(r.path, "path");
    out += r.path;
    if (m.has_labels) {
      check_csv_field(r.label, "label");
      out += "," + r.label;
      if (with_split) out += std::string(",") + (r.split ? to_string(*r.split) : "");
    }
    out += "\n";
  }
  return out;
}

struct SplitSpec {
  std::array<double, 3> fractions{0.70, 0.20, 0.10};  // train, val, test
  std::uint64_t rng_seed = 42;
  bool stratified = true;

  void validate() const {
    double sum = 0.0;
    for (double f : fractions) {
      if (!(f > 0.0)) fail(ErrorKind::Config, "split fractions must be positive");
      sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) fail(ErrorKind::Config, "split fractions must sum to 1");
  }
};

// Largest-remainder apportionment of total over weights; ties go to the
// earlier weight.
inline std::vector<int> largest_remainder(int total, const std::vector<double>& weights) {
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<int> counts(weights.size());
  std::vector<std::pair<double, std::size_t>> rema;
  int assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = total * weights[i] / wsum;
    counts[i] = static_cast<int>(std::floor(exact + 1e-9));
    assigned += counts[i];
    rema.emplace_back(exact - counts[i], i);
  }
  std::stable_sort(rema.begin(), rema.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int k = 0; k < total - assigned; ++k) counts[rema[static_cast<std::size_t>(k) % rema.size()].second]++;
  return counts;
}

struct SplitManifests {
  Manifest train, val, test;
};

// Rows with an explicit split keep it; remaining rows are shuffled per
// class under the seed and apportioned by largest remainder. Each output
// keeps manifest order.
inline SplitManifests stratified_split(const Manifest& manifest, const SplitSpec& spec) {
  spec.validate();
  if (manifest.rows.empty()) fail(ErrorKind::EmptySet, "cannot split an empty manifest");

  std::vector<Split> assignment(manifest.rows.size(), Split::Train);
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
    const auto& r = manifest.rows[i];
    if (r.split)
      assignment[i] = *r.split;
    else
      groups[spec.stratified ? r.label : std::string()].push_back(i);
  }

  std::mt19937_64 rng(spec.rng_seed);
  const std::vector<double> weights(spec.fractions.begin(), spec.fractions.end());
  for (auto& [label, idx] : groups) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto counts = largest_remainder(static_cast<int>(idx.size()), weights);
    std::size_t k = 0;
    for (int s = 0; s < 3; ++s)
      for (int c = 0; c < counts[s]; ++c) assignment[idx[k++]] = static_cast<Split>(s);
  }

  SplitManifests out{{{}, manifest.has_labels, manifest.base_dir},
                     {{}, manifest.has_labels, manifest.base_dir},
                     {{}, manifest.has_labels, manifest.base_dir}};
  for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
    ManifestRow row = manifest.rows[i];
    row.split = assignment[i];
    (assignment[i] == Split::Train ? out.train : assignment[i] == Split::Val ? out.val : out.test)
        .rows.push_back(std::move(row));
  }
  return out;
}

// Maps the two sorted class names to 0/1.
inline std::vector<int> binary_labels(const std::vector<std::string>& labels,
                                      const std::vector<std::string>& classes) {
  if (classes.size() != 2)
    fail(ErrorKind::DegenerateData, "binary training needs exactly 2 classes, got " + std::to_string(classes.size()));
  std::vector<int> out;
  for (const auto& l : labels) {
    if (l == classes[0])
      out.push_back(0);
    else if (l == classes[1])
      out.push_back(1);
    else
      fail(ErrorKind::Label, "label '" + l + "' is not one of the training classes");
  }
  return out;
}

}  // namespace ius::data
