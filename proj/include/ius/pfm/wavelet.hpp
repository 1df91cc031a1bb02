#pragma once
// Multilevel orthonormal 2D Haar transform.
//
// For a 2x2 block  [a b]
//                  [c d]
// the analysis step produces
//   LL = (a + b + c + d) / 2
//   HL = (a - b + c - d) / 2   (differences across columns)
//   LH = (a + b - c - d) / 2   (differences across rows)
//   HH = (a - b - c + d) / 2
// Odd dimensions are extended by half-sample symmetric padding (the last
// row/column is repeated) and the original size is recorded so synthesis
// crops back exactly.

#include <string>
#include <vector>

#include "ius/image.hpp"

namespace ius::pfm {

struct DetailLevel {
  int rows = 0;  // size of the signal this level decomposed
  int cols = 0;
  Plane lh;
  Plane hl;
  Plane hh;
};

struct WaveletPyramid {
  std::vector<DetailLevel> levels;  // levels[0] is the finest
  Plane approximation;              // final LL
};

namespace detail {

inline int half_up(int n) { return (n + 1) / 2; }

inline double padded(const Plane& p, int r, int c) {
  return p(r < p.rows ? r : p.rows - 1, c < p.cols ? c : p.cols - 1);
}

}  // namespace detail

// Number of levels an (rows x cols) plane supports: min side >= 2^levels.
inline bool supports_levels(int rows, int cols, int levels) {
  return levels >= 1 && levels < 30 && rows >= (1 << levels) && cols >= (1 << levels);
}

inline WaveletPyramid dwt2(const Plane& plane, int levels = 3) {
  if (!supports_levels(plane.rows, plane.cols, levels))
    fail(ErrorKind::Size, "plane " + std::to_string(plane.rows) + "x" + std::to_string(plane.cols) +
                              " too small for " + std::to_string(levels) + " wavelet levels");
  WaveletPyramid out;
  Plane current = plane;
  for (int level = 0; level < levels; ++level) {
    const int hr = detail::half_up(current.rows);
    const int hc = detail::half_up(current.cols);
    DetailLevel d{current.rows, current.cols, Plane(hr, hc), Plane(hr, hc), Plane(hr, hc)};
    Plane ll(hr, hc);
    for (int i = 0; i < hr; ++i) {
      for (int j = 0; j < hc; ++j) {
        const double a = detail::padded(current, 2 * i, 2 * j);
        const double b = detail::padded(current, 2 * i, 2 * j + 1);
        const double c = detail::padded(current, 2 * i + 1, 2 * j);
        const double e = detail::padded(current, 2 * i + 1, 2 * j + 1);
        ll(i, j) = 0.5 * (a + b + c + e);
        d.hl(i, j) = 0.5 * (a - b + c - e);
        d.lh(i, j) = 0.5 * (a + b - c - e);
        d.hh(i, j) = 0.5 * (a - b - c + e);
      }
    }
    out.levels.push_back(std::move(d));
    current = std::move(ll);
  }
  out.approximation = std::move(current);
  return out;
}

inline Plane idwt2(const WaveletPyramid& pyramid) {
  if (pyramid.levels.empty()) fail(ErrorKind::Structure, "pyramid has no levels");
  for (std::size_t k = 0; k < pyramid.levels.size(); ++k) {
    const auto& d = pyramid.levels[k];
    const int hr = detail::half_up(d.rows);
    const int hc = detail::half_up(d.cols);
    if (d.rows < 1 || d.cols < 1)
      fail(ErrorKind::Structure, "level " + std::to_string(k) + " has empty extent");
    for (const Plane* band : {&d.lh, &d.hl, &d.hh})
      if (band->rows != hr || band->cols != hc)
        fail(ErrorKind::Structure, "level " + std::to_string(k) + " subband shape mismatch");
    if (k + 1 < pyramid.levels.size()) {
      const auto& next = pyramid.levels[k + 1];
      if (next.rows != hr || next.cols != hc)
        fail(ErrorKind::Structure, "level " + std::to_string(k + 1) + " extent inconsistent");
    }
  }
  const auto& coarsest = pyramid.levels.back();
  if (pyramid.approximation.rows != detail::half_up(coarsest.rows) ||
      pyramid.approximation.cols != detail::half_up(coarsest.cols))
    fail(ErrorKind::Structure, "approximation shape mismatch");

  Plane current = pyramid.approximation;
  for (auto it = pyramid.levels.rbegin(); it != pyramid.levels.rend(); ++it) {
    const auto& d = *it;
    Plane out(d.rows, d.cols);
    for (int i = 0; i < current.rows; ++i) {
      for (int j = 0; j < current.cols; ++j) {
        const double ll = current(i, j), hl = d.hl(i, j), lh = d.lh(i, j), hh = d.hh(i, j);
        const double px[2][2] = {{0.5 * (ll + hl + lh + hh), 0.5 * (ll - hl + lh - hh)},
                                 {0.5 * (ll + hl - lh - hh), 0.5 * (ll - hl - lh + hh)}};
        for (int di = 0; di < 2; ++di) {
          const int r = 2 * i + di;
          if (r >= d.rows) continue;
          for (int dj = 0; dj < 2; ++dj) {
            const int c = 2 * j + dj;
            if (c < d.cols) out(r, c) = px[di][dj];
          }
        }
      }
    }
    current = std::move(out);
  }
  return current;
}

// Sum of squares over every subband.
inline double energy(const WaveletPyramid& pyramid) {
  auto sq = [](const Plane& p) {
    double s = 0.0;
    for (double v : p.data) s += v * v;
    return s;
  };
  double total = sq(pyramid.approximation);
  for (const auto& d : pyramid.levels) total += sq(d.lh) + sq(d.hl) + sq(d.hh);
  return total;
}

}  // namespace ius::pfm
