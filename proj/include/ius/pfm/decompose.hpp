#pragma once
// Perceptual feature maps (PFMs).
//
// Color images yield [GR, BY, LD, CF]; grayscale images yield
// [BAND1, BAND2, LD, CF]. Every map has the source H x W and values in
// [0,1]. Normalization uses fixed affine maps so maps are comparable
// across images:
//   GR = (a + 128) / 256, BY = (b + 128) / 256         (clamped)
//   LD = approximation-only synthesis of L, / 100        (clamped)
//   CF = 0.5 + detail-only synthesis of L / 200          (clamped)

#include <algorithm>
#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "ius/pfm/color.hpp"
#include "ius/pfm/wavelet.hpp"

namespace ius::pfm {

inline constexpr int kNumMaps = 4;
inline constexpr int kWaveletLevels = 3;

enum class PfmConfig { Color, Gray };

inline const std::array<std::string, kNumMaps>& map_names(PfmConfig config) {
  static const std::array<std::string, kNumMaps> color{"GR", "BY", "LD", "CF"};
  static const std::array<std::string, kNumMaps> gray{"BAND1", "BAND2", "LD", "CF"};
  return config == PfmConfig::Color ? color : gray;
}

inline const char* to_string(PfmConfig config) {
  return config == PfmConfig::Color ? "color" : "gray";
}

inline PfmConfig parse_pfm_config(std::string_view text) {
  if (text == "color") return PfmConfig::Color;
  if (text == "gray") return PfmConfig::Gray;
  fail(ErrorKind::Config, "unknown pfm_config '" + std::string(text) + "'");
}

inline PfmConfig config_for(ColorSpace cs) {
  return cs == ColorSpace::Srgb ? PfmConfig::Color : PfmConfig::Gray;
}

struct PfmSet {
  PfmConfig config = PfmConfig::Color;
  std::array<Plane, kNumMaps> maps;

  const std::string& name(int i) const { return map_names(config)[i]; }
  int rows() const { return maps[0].rows; }
  int cols() const { return maps[0].cols; }
  friend bool operator==(const PfmSet&, const PfmSet&) = default;
};

// Coarse (approximation-only) and fine (detail-only) reconstructions of a
// plane. Their sum equals the plane up to rounding.
struct ScaleSplit {
  Plane coarse;
  Plane fine;
};

inline ScaleSplit split_scales(const Plane& plane, int levels = kWaveletLevels) {
  const WaveletPyramid pyramid = dwt2(plane, levels);

  WaveletPyramid coarse = pyramid;
  for (auto& d : coarse.levels) {
    std::fill(d.lh.data.begin(), d.lh.data.end(), 0.0);
    std::fill(d.hl.data.begin(), d.hl.data.end(), 0.0);
    std::fill(d.hh.data.begin(), d.hh.data.end(), 0.0);
  }
  WaveletPyramid fine = pyramid;
  std::fill(fine.approximation.data.begin(), fine.approximation.data.end(), 0.0);

  return {idwt2(coarse), idwt2(fine)};
}

namespace detail {

inline Plane affine(const Plane& in, double offset, double scale) {
  Plane out(in.rows, in.cols);
  for (std::size_t i = 0; i < in.size(); ++i)
    out.data[i] = std::clamp((in.data[i] + offset) * scale, 0.0, 1.0);
  return out;
}

// LD and CF maps from a lightness plane on the [0,100] scale.
inline std::pair<Plane, Plane> luminance_maps(const Plane& lightness) {
  const ScaleSplit split = split_scales(lightness);
  Plane ld = affine(split.coarse, 0.0, 1.0 / 100.0);
  Plane cf(split.fine.rows, split.fine.cols);
  for (std::size_t i = 0; i < cf.size(); ++i)
    cf.data[i] = std::clamp(0.5 + split.fine.data[i] / 200.0, 0.0, 1.0);
  return {std::move(ld), std::move(cf)};
}

}  // namespace detail

inline PfmSet decompose_color(const Image& image) {
  if (image.color_space() != ColorSpace::Srgb)
    fail(ErrorKind::Type, "decompose_color requires an sRGB image");
  const LabPlanes lab = srgb_to_lab(image);
  auto [ld, cf] = detail::luminance_maps(lab.l);
  PfmSet out;
  out.config = PfmConfig::Color;
  out.maps = {detail::affine(lab.a, 128.0, 1.0 / 256.0), detail::affine(lab.b, 128.0, 1.0 / 256.0),
              std::move(ld), std::move(cf)};
  return out;
}

inline PfmSet decompose_gray(const Image& image) {
  if (image.color_space() != ColorSpace::Gray)
    fail(ErrorKind::Type, "decompose_gray requires a grayscale image");
  const Plane intensity = image.channel(0);
  Plane band1(intensity.rows, intensity.cols), band2(intensity.rows, intensity.cols);
  Plane lightness(intensity.rows, intensity.cols);
  for (std::size_t i = 0; i < intensity.size(); ++i) {
    const double v = intensity.data[i];
    (v < 0.5 ? band1 : band2).data[i] = v;
    lightness.data[i] = 100.0 * v;
  }
  auto [ld, cf] = detail::luminance_maps(lightness);
  PfmSet out;
  out.config = PfmConfig::Gray;
  out.maps = {std::move(band1), std::move(band2), std::move(ld), std::move(cf)};
  return out;
}

inline PfmSet decompose(const Image& image) {
  return image.color_space() == ColorSpace::Srgb ? decompose_color(image) : decompose_gray(image);
}

}  // namespace ius::pfm
