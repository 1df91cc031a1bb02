#pragma once
// sRGB <-> CIE L*a*b* (D65) conversion.

#include <algorithm>
#include <array>
#include <cmath>

#include "ius/image.hpp"

namespace ius::pfm {

using Triple = std::array<double, 3>;

namespace detail {

// Linear sRGB -> XYZ, D65.
inline constexpr std::array<Triple, 3> kRgbToXyz{{
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
}};

// Reference white taken as the image of linear (1,1,1) so neutral colors
// land on zero chroma exactly.
inline Triple white_point() {
  Triple w{};
  for (int r = 0; r < 3; ++r) w[r] = kRgbToXyz[r][0] + kRgbToXyz[r][1] + kRgbToXyz[r][2];
  return w;
}

inline double srgb_decode(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

inline double srgb_encode(double c) {
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

inline constexpr double kDelta = 6.0 / 29.0;

inline double lab_f(double t) {
  return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

inline double lab_f_inv(double t) {
  return t > kDelta ? t * t * t : 3.0 * kDelta * kDelta * (t - 4.0 / 29.0);
}

inline Triple solve3(const std::array<Triple, 3>& m, const Triple& v) {
  // Cramer's rule; the matrix is fixed and well conditioned.
  auto det = [](const std::array<Triple, 3>& a) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  };
  const double d = det(m);
  Triple out{};
  for (int c = 0; c < 3; ++c) {
    auto mc = m;
    for (int r = 0; r < 3; ++r) mc[r][c] = v[r];
    out[c] = det(mc) / d;
  }
  return out;
}

}  // namespace detail

// One sRGB pixel (components in [0,1]) to (L, a, b).
inline Triple srgb_to_lab(const Triple& rgb) {
  const Triple lin{detail::srgb_decode(rgb[0]), detail::srgb_decode(rgb[1]),
                   detail::srgb_decode(rgb[2])};
  const Triple white = detail::white_point();
  Triple f{};
  for (int r = 0; r < 3; ++r) {
    const auto& row = detail::kRgbToXyz[r];
    const double xyz = row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2];
    f[r] = detail::lab_f(xyz / white[r]);
  }
  const double L = 116.0 * f[1] - 16.0;
  return {std::clamp(L, 0.0, 100.0), 500.0 * (f[0] - f[1]), 200.0 * (f[1] - f[2])};
}

// Inverse of srgb_to_lab; out-of-gamut results are clamped to [0,1].
inline Triple lab_to_srgb(const Triple& lab) {
  const double fy = (lab[0] + 16.0) / 116.0;
  const double fx = fy + lab[1] / 500.0;
  const double fz = fy - lab[2] / 200.0;
  const Triple white = detail::white_point();
  const Triple xyz{white[0] * detail::lab_f_inv(fx), white[1] * detail::lab_f_inv(fy),
                   white[2] * detail::lab_f_inv(fz)};
  const Triple lin = detail::solve3(detail::kRgbToXyz, xyz);
  Triple out{};
  for (int c = 0; c < 3; ++c) out[c] = std::clamp(detail::srgb_encode(std::max(lin[c], 0.0)), 0.0, 1.0);
  return out;
}

struct LabPlanes {
  Plane l;
  Plane a;
  Plane b;
};

inline LabPlanes srgb_to_lab(const Image& image) {
  if (image.color_space() != ColorSpace::Srgb)
    fail(ErrorKind::Type, "srgb_to_lab requires an sRGB image");
  LabPlanes out{Plane(image.height(), image.width()), Plane(image.height(), image.width()),
                Plane(image.height(), image.width())};
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const Triple lab = srgb_to_lab(Triple{image.at(y, x, 0), image.at(y, x, 1), image.at(y, x, 2)});
      out.l(y, x) = lab[0];
      out.a(y, x) = lab[1];
      out.b(y, x) = lab[2];
    }
  }
  return out;
}

}  // namespace ius::pfm
