#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ius/data/png.hpp"

namespace ius::data {

// Bilinear resampling of an interleaved raster with half-pixel centers and
// edge clamping:  src = (dst + 0.5) * (in / out) - 0.5
inline std::vector<double> bilinear(std::span<const double> src, int in_rows, int in_cols,
                                    int channels, int rows, int cols) {
  std::vector<double> px(static_cast<std::size_t>(rows) * cols * channels);
  const double sy = static_cast<double>(in_rows) / rows;
  const double sx = static_cast<double>(in_cols) / cols;
  auto at = [&](int y, int x, int c) {
    return src[(static_cast<std::size_t>(y) * in_cols + x) * channels + c];
  };
  for (int y = 0; y < rows; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(in_rows - 1));
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, in_rows - 1);
    const double wy = fy - y0;
    for (int x = 0; x < cols; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(in_cols - 1));
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, in_cols - 1);
      const double wx = fx - x0;
      for (int c = 0; c < channels; ++c) {
        const double top = (1.0 - wx) * at(y0, x0, c) + wx * at(y0, x1, c);
        const double bottom = (1.0 - wx) * at(y1, x0, c) + wx * at(y1, x1, c);
        px[(static_cast<std::size_t>(y) * cols + x) * channels + c] =
            std::clamp((1.0 - wy) * top + wy * bottom, 0.0, 1.0);
      }
    }
  }
  return px;
}

inline Image resize_bilinear(const Image& in, int rows, int cols) {
  if (rows == in.height() && cols == in.width()) return in;
  return Image(rows, cols, in.color_space(),
               bilinear(in.pixels(), in.height(), in.width(), in.channels(), rows, cols));
}

// Decodes an 8-bit PNG, drops alpha, bilinear-resizes to (rows, cols) and
// scales to [0,1]. The file's color type must match the requested modality.
inline Image load_image(const std::filesystem::path& path, int rows, int cols, ColorSpace modality) {
  const PngPixels png = read_png(path);
  const ColorSpace source = png.color ? ColorSpace::Srgb : ColorSpace::Gray;
  if (source != modality)
    fail(ErrorKind::Type, "modality mismatch for " + path.string() + ": file is " + to_string(source) +
                              ", expected " + to_string(modality));
  std::vector<double> values(png.bytes.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = png.bytes[i] / 255.0;
  if (png.height == rows && png.width == cols) return Image(rows, cols, source, std::move(values));
  return Image(rows, cols, source,
               bilinear(values, png.height, png.width, channels_of(source), rows, cols));
}

}  // namespace ius::data
