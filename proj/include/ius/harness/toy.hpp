#pragma once
// Procedural two-class corpus. Images are drawn in Lab: the class signal is
// an offset of the a channel (optionally jittered per image), and each image also gets smooth light
// blobs plus per-pixel lightness noise whose amplitude does not depend on
// the class. Pixels are quantized to 8 bits so files on disk reproduce the
// in-memory corpus exactly.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ius/data/manifest.hpp"
#include "ius/data/png.hpp"
#include "ius/neural/train.hpp"
#include "ius/pfm/color.hpp"

namespace ius::harness {

struct ToyCorpusConfig {
  int image_size = 32;
  double color_offset = 24.0;      // difference of the class means of a*
  double texture_amplitude = 8.0;  // sd of per-pixel L* noise (before per-image scaling)
  double color_jitter = 8.0;       // half-width of a uniform per-image shift of the a* mean
  double chroma_noise = 4.0;       // sd of per-pixel a*/b* noise
  int train_per_class = 200;
  int val_per_class = 50;
  int test_per_class = 25;
  std::uint64_t rng_seed = 42;
  std::array<std::string, 2> class_names{"A", "B"};

  void validate() const {
    if (image_size < 8) fail(ErrorKind::Config, "toy image_size must be >= 8");
    if (train_per_class < 1 || val_per_class < 1 || test_per_class < 1)
      fail(ErrorKind::Config, "toy counts per class must be >= 1");
    if (!(color_offset >= 0.0 && color_offset <= 60.0)) fail(ErrorKind::Config, "toy color_offset must be in [0, 60]");
    if (!(texture_amplitude >= 0.0 && texture_amplitude <= 30.0))
      fail(ErrorKind::Config, "toy texture_amplitude must be in [0, 30]");
    if (!(color_jitter >= 0.0 && color_jitter <= 30.0)) fail(ErrorKind::Config, "toy color_jitter must be in [0, 30]");
    if (!(chroma_noise >= 0.0 && chroma_noise <= 30.0)) fail(ErrorKind::Config, "toy chroma_noise must be in [0, 30]");
    if (class_names[0] == class_names[1] || class_names[0].empty() || class_names[1].empty())
      fail(ErrorKind::Config, "toy class names must be distinct and non-empty");
  }
};

struct ToySample {
  std::string id;  // also the relative file name
  std::string label;
  data::Split split = data::Split::Train;
  Image image;
};

struct ToyCorpus {
  ToyCorpusConfig config;
  std::vector<ToySample> samples;

  std::vector<const ToySample*> of(data::Split s) const {
    std::vector<const ToySample*> out;
    for (const auto& x : samples)
      if (x.split == s) out.push_back(&x);
    return out;
  }
};

// One image; `stream` selects an independent generator so each image is
// reproducible on its own.
inline Image toy_image(const ToyCorpusConfig& cfg, int class_index, std::uint64_t stream) {
  std::mt19937_64 rng(neural::derive_seed(cfg.rng_seed, 1000 + stream));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = cfg.image_size;

  const double base_l = 45.0 + 15.0 * u01(rng);
  const double b_mean = -8.0 + 16.0 * u01(rng);
  const double texture = cfg.texture_amplitude * (0.5 + u01(rng));
  struct Blob {
    double y, x, sigma, amp;
  };
  std::vector<Blob> blobs(3);
  for (auto& bl : blobs)
    bl = {u01(rng) * n, u01(rng) * n, n * (0.08 + 0.17 * u01(rng)), -12.0 + 24.0 * u01(rng)};
  // drawn last so zero-jitter corpora keep their other random draws
  const double a_mean = (class_index == 0 ? -0.5 : 0.5) * cfg.color_offset + cfg.color_jitter * (2.0 * u01(rng) - 1.0);

  std::vector<double> px(static_cast<std::size_t>(n) * n * 3);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      double l = base_l;
      for (const auto& bl : blobs) {
        const double d2 = (y - bl.y) * (y - bl.y) + (x - bl.x) * (x - bl.x);
        l += bl.amp * std::exp(-d2 / (2.0 * bl.sigma * bl.sigma));
      }
      l += texture * gauss(rng);
      double a = a_mean, b = b_mean;
      if (cfg.chroma_noise > 0.0) {
        a += cfg.chroma_noise * gauss(rng);
        b += cfg.chroma_noise * gauss(rng);
      }
      const pfm::Triple rgb = pfm::lab_to_srgb({std::clamp(l, 0.0, 100.0), a, b});
      for (int c = 0; c < 3; ++c)
        px[(static_cast<std::size_t>(y) * n + x) * 3 + c] = data::quantize_8bit(rgb[c]) / 255.0;
    }
  return Image(n, n, ColorSpace::Srgb, std::move(px));
}

inline ToyCorpus toy_dataset_generate(const ToyCorpusConfig& cfg) {
  cfg.validate();
  ToyCorpus corpus{cfg, {}};
  const std::array<std::pair<data::Split, int>, 3> parts{
      {{data::Split::Train, cfg.train_per_class}, {data::Split::Val, cfg.val_per_class}, {data::Split::Test, cfg.test_per_class}}};
  std::uint64_t stream = 0;
  for (const auto& [split, count] : parts)
    for (int i = 0; i < count; ++i)
      for (int c = 0; c < 2; ++c) {
        char name[96];
        std::snprintf(name, sizeof name, "%s_%s_%04d.png", data::to_string(split), cfg.class_names[c].c_str(), i);
        corpus.samples.push_back({name, cfg.class_names[c], split, toy_image(cfg, c, stream++)});
      }
  return corpus;
}

inline data::Manifest toy_manifest(const ToyCorpus& corpus, const std::filesystem::path& base_dir = {}) {
  data::Manifest m;
  m.base_dir = base_dir;
  for (const auto& s : corpus.samples) m.rows.push_back({"images/" + s.id, s.label, s.split});
  return m;
}

// Writes images/<id> and manifest.csv under dir; returns the manifest path.
inline std::filesystem::path write_toy_corpus(const ToyCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "images");
  for (const auto& s : corpus.samples) data::write_png(dir / "images" / s.id, s.image);
  const auto path = dir / "manifest.csv";
  data::write_text_file(path.string(), data::format_manifest(toy_manifest(corpus)));
  return path;
}

}  // namespace ius::harness
