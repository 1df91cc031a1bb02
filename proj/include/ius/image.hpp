#pragma once
// Core raster types: a single-channel Plane and a multi-channel Image.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ius/error.hpp"

namespace ius {

// Dense row-major H x W array of doubles.
struct Plane {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Plane() = default;
  Plane(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {
    if (r < 0 || c < 0) fail(ErrorKind::Shape, "negative plane dimensions");
  }

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  std::size_t size() const noexcept { return data.size(); }
  bool same_shape(const Plane& other) const noexcept {
    return rows == other.rows && cols == other.cols;
  }
  friend bool operator==(const Plane&, const Plane&) = default;
};

enum class ColorSpace { Srgb, Gray };

inline const char* to_string(ColorSpace cs) { return cs == ColorSpace::Srgb ? "srgb" : "gray"; }

inline int channels_of(ColorSpace cs) { return cs == ColorSpace::Srgb ? 3 : 1; }

// Interleaved H x W x C raster with values in [0,1].
class Image {
 public:
  static constexpr int kMinSide = 8;

  Image() = default;

  Image(int height, int width, ColorSpace cs, std::vector<double> pixels)
      : height_(height), width_(width), color_space_(cs), pixels_(std::move(pixels)) {
    validate();
  }

  static Image filled(int height, int width, ColorSpace cs, double value) {
    std::vector<double> px(static_cast<std::size_t>(height) * width * channels_of(cs), value);
    return Image(height, width, cs, std::move(px));
  }

  static Image filled_rgb(int height, int width, double r, double g, double b) {
    std::vector<double> px;
    px.reserve(static_cast<std::size_t>(height) * width * 3);
    for (int i = 0; i < height * width; ++i) {
      px.push_back(r);
      px.push_back(g);
      px.push_back(b);
    }
    return Image(height, width, ColorSpace::Srgb, std::move(px));
  }

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_of(color_space_); }
  ColorSpace color_space() const noexcept { return color_space_; }
  const std::vector<double>& pixels() const noexcept { return pixels_; }

  double at(int y, int x, int c) const {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels() + c];
  }

  // Copies one channel into a plane.
  Plane channel(int c) const {
    Plane p(height_, width_);
    for (int y = 0; y < height_; ++y)
      for (int x = 0; x < width_; ++x) p(y, x) = at(y, x, c);
    return p;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  void validate() const {
    if (height_ < kMinSide || width_ < kMinSide)
      fail(ErrorKind::Size, "image must be at least 8x8, got " + std::to_string(height_) + "x" +
                                std::to_string(width_));
    const std::size_t expected = static_cast<std::size_t>(height_) * width_ * channels();
    if (pixels_.size() != expected)
      fail(ErrorKind::Shape, "pixel buffer holds " + std::to_string(pixels_.size()) +
                                 " values, expected " + std::to_string(expected));
    for (double v : pixels_)
      if (!(v >= 0.0 && v <= 1.0)) fail(ErrorKind::Range, "pixel value outside [0,1]");
  }

  int height_ = 0;
  int width_ = 0;
  ColorSpace color_space_ = ColorSpace::Srgb;
  std::vector<double> pixels_;
};

}  // namespace ius
