#pragma once
// Blur/noise corruption ladder and the utility degradation study.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "ius/data/png.hpp"
#include "ius/neural/train.hpp"
#include "ius/scoring/scoring.hpp"

namespace ius::harness {

struct CorruptionLevel {
  double blur_sigma = 0.0;   // Gaussian sd in pixels, 0 = no blur
  double noise_sigma = 0.0;  // additive Gaussian sd in [0,1] pixel units

  bool identity() const { return blur_sigma == 0.0 && noise_sigma == 0.0; }
};

inline std::vector<CorruptionLevel> default_ladder() {
  return {{0.0, 0.0}, {0.6, 0.02}, {1.0, 0.05}, {1.6, 0.10}, {2.4, 0.18}};
}

inline std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
  const double sum = std::accumulate(k.begin(), k.end(), 0.0);
  for (double& v : k) v /= sum;
  return k;
}

// Separable blur with replicated edges. Each output is written as the
// center value plus weighted differences, so constant regions are
// reproduced exactly.
inline Image gaussian_blur(const Image& in, double sigma) {
  if (!(sigma > 0.0)) return in;
  const auto k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  const int h = in.height(), w = in.width(), ch = in.channels();
  auto idx = [&](int y, int x, int c) { return (static_cast<std::size_t>(y) * w + x) * ch + c; };
  const auto& src = in.pixels();
  std::vector<double> tmp(src.size()), out(src.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        const double center = src[idx(y, x, c)];
        double acc = 0.0;
        for (int i = -r; i <= r; ++i) acc += k[i + r] * (src[idx(y, std::clamp(x + i, 0, w - 1), c)] - center);
        tmp[idx(y, x, c)] = center + acc;
      }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        const double center = tmp[idx(y, x, c)];
        double acc = 0.0;
        for (int i = -r; i <= r; ++i) acc += k[i + r] * (tmp[idx(std::clamp(y + i, 0, h - 1), x, c)] - center);
        out[idx(y, x, c)] = std::clamp(center + acc, 0.0, 1.0);
      }
  return Image(h, w, in.color_space(), std::move(out));
}

// Blur, then additive noise clamped to [0,1], then 8-bit quantization.
// The identity level returns the input unchanged.
inline Image corrupt(const Image& in, const CorruptionLevel& level, std::uint64_t seed) {
  if (level.identity()) return in;
  Image blurred = gaussian_blur(in, level.blur_sigma);
  std::vector<double> px = blurred.pixels();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (double& v : px) {
    if (level.noise_sigma > 0.0) v += level.noise_sigma * gauss(rng);
    v = data::quantize_8bit(v) / 255.0;
  }
  return Image(in.height(), in.width(), in.color_space(), std::move(px));
}

inline std::uint64_t corruption_seed(std::uint64_t seed, std::size_t level, std::size_t image) {
  return neural::derive_seed(seed, (static_cast<std::uint64_t>(level) << 32) | image);
}

// result[level][image]
inline std::vector<std::vector<Image>> corruption_ladder(const std::vector<Image>& images,
                                                         const std::vector<CorruptionLevel>& levels,
                                                         std::uint64_t seed) {
  std::vector<std::vector<Image>> out(levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l)
    for (std::size_t i = 0; i < images.size(); ++i) out[l].push_back(corrupt(images[i], levels[l], corruption_seed(seed, l, i)));
  return out;
}

// Average ranks, ties share the mean rank.
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = mean_rank;
    i = j + 1;
  }
  return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) fail(ErrorKind::Size, "spearman needs two equal series of length >= 2");
  return pearson(ranks(a), ranks(b));
}

struct DegradationRow {
  std::size_t level = 0;
  CorruptionLevel corruption;
  std::size_t count = 0;
  double mean_u = 0.0;
  double sd_u = 0.0;  // population sd
  std::array<int, 5> histogram{};  // VL..VH
  std::vector<double> u;  // per image, input order
};

struct DegradationReport {
  std::vector<DegradationRow> rows;
  double spearman = 0.0;  // level index vs mean u
};

// class_keys is used only for per-class baselines.
template <typename T>
DegradationReport degradation_study(const neural::EpuModel<T>& model, const scoring::BaselineProfile& baseline,
                                    const std::vector<Image>& images,
                                    const std::vector<std::optional<std::string>>& class_keys,
                                    const std::vector<CorruptionLevel>& ladder, std::uint64_t seed,
                                    const scoring::Thresholds& thresholds = {}) {
  if (images.empty()) fail(ErrorKind::EmptySet, "degradation study needs images");
  if (class_keys.size() != images.size()) fail(ErrorKind::Shape, "one class key per image required");
  if (ladder.empty()) fail(ErrorKind::Config, "empty corruption ladder");
  DegradationReport rep;
  std::vector<double> level_index, means;
  for (std::size_t l = 0; l < ladder.size(); ++l) {
    std::vector<scoring::ScoreItem> items;
    for (std::size_t i = 0; i < images.size(); ++i)
      items.push_back(scoring::make_item(std::to_string(i), class_keys[i], corrupt(images[i], ladder[l], corruption_seed(seed, l, i))));
    scoring::ScoreOptions opt;
    opt.thresholds = thresholds;
    const auto result = scoring::score_set(model, baseline, items, opt);
    if (!result.failures.empty())
      fail(ErrorKind::DegenerateProfile, "degradation level " + std::to_string(l) + ": " + result.failures.front().message);
    DegradationRow row;
    row.level = l;
    row.corruption = ladder[l];
    row.count = result.scored.size();
    for (const auto& s : result.scored) {
      row.u.push_back(s.score.u);
      row.histogram[static_cast<int>(s.score.level)]++;
    }
    row.mean_u = std::accumulate(row.u.begin(), row.u.end(), 0.0) / static_cast<double>(row.count);
    double ss = 0.0;
    for (double u : row.u) ss += (u - row.mean_u) * (u - row.mean_u);
    row.sd_u = std::sqrt(ss / static_cast<double>(row.count));
    level_index.push_back(static_cast<double>(l));
    means.push_back(row.mean_u);
    rep.rows.push_back(std::move(row));
  }
  rep.spearman = ladder.size() >= 2 ? spearman(level_index, means) : 0.0;
  return rep;
}

}  // namespace ius::harness
