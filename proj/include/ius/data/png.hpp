#pragma once
// 8-bit PNG decode/encode through libpng's simplified API.

#include <png.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ius/image.hpp"

namespace ius::data {

struct PngPixels {
  int width = 0;
  int height = 0;
  bool color = false;  // source had RGB channels (alpha is always dropped)
  std::vector<std::uint8_t> bytes;  // interleaved, 3 channels if color else 1
};

inline PngPixels read_png(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::Io, "missing file " + path.string());
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    fail(ErrorKind::Format, "unsupported or unreadable PNG " + path.string() + ": " + image.message);
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    fail(ErrorKind::Format, "unsupported PNG bit depth (16-bit) in " + path.string());
  }
  PngPixels out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = out.color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  out.bytes.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.bytes.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    fail(ErrorKind::Format, "failed to decode " + path.string() + ": " + msg);
  }
  return out;
}

inline std::uint8_t quantize_8bit(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

inline void write_png(const std::filesystem::path& path, const Image& img) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = img.color_space() == ColorSpace::Srgb ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> bytes;
  bytes.reserve(img.pixels().size());
  for (double v : img.pixels()) bytes.push_back(quantize_8bit(v));
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, bytes.data(), 0, nullptr))
    fail(ErrorKind::Io, "failed to write " + path.string() + ": " + image.message);
}

}  // namespace ius::data
