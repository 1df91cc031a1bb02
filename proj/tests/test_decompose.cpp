#include <gtest/gtest.h>

#include <random>

#include "ius/pfm/decompose.hpp"

using namespace ius;
using namespace ius::pfm;

namespace {

Image random_rgb(int h, int w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<double> px(static_cast<std::size_t>(h) * w * 3);
  for (auto& v : px) v = dist(rng);
  return Image(h, w, ColorSpace::Srgb, std::move(px));
}

double mean(const Plane& p) {
  double s = 0.0;
  for (double v : p.data) s += v;
  return s / static_cast<double>(p.size());
}

}  // namespace

TEST(DecomposeColor, MidGray) {
  const auto set = decompose_color(Image::filled(16, 16, ColorSpace::Srgb, 0.5));
  ASSERT_EQ(set.config, PfmConfig::Color);
  for (std::size_t i = 0; i < set.maps[0].size(); ++i) {
    EXPECT_NEAR(set.maps[0].data[i], 0.5, 1e-9);
    EXPECT_NEAR(set.maps[1].data[i], 0.5, 1e-9);
    EXPECT_NEAR(set.maps[2].data[i], 0.533889647411, 1e-9);
    EXPECT_EQ(set.maps[3].data[i], 0.5);
  }
}

TEST(DecomposeColor, ConstantImagesHaveFlatTexture) {
  for (double r : {0.0, 0.3, 1.0})
    for (double g : {0.1, 0.9}) {
      const auto set = decompose_color(Image::filled_rgb(12, 20, r, g, 0.4));
      for (double v : set.maps[3].data) EXPECT_EQ(v, 0.5);
    }
}

TEST(DecomposeColor, RedAndGreenSitOnOppositeSidesOfNeutral) {
  const auto red = decompose_color(Image::filled_rgb(8, 8, 1.0, 0.0, 0.0));
  const auto green = decompose_color(Image::filled_rgb(8, 8, 0.0, 1.0, 0.0));
  EXPECT_GT(mean(red.maps[0]), 0.5);
  EXPECT_LT(mean(green.maps[0]), 0.5);
}

TEST(DecomposeColor, MapsAreBoundedOrderedAndDeterministic) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const Image img = random_rgb(24 + trial, 32, rng);
    const auto a = decompose_color(img);
    const auto b = decompose_color(img);
    EXPECT_EQ(a, b);
    for (int i = 0; i < kNumMaps; ++i) {
      EXPECT_EQ(a.name(i), map_names(PfmConfig::Color)[i]);
      EXPECT_EQ(a.maps[i].rows, img.height());
      EXPECT_EQ(a.maps[i].cols, img.width());
      for (double v : a.maps[i].data) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
    }
  }
}

TEST(SplitScales, CoarsePlusFineRecoversLightness) {
  std::mt19937_64 rng(5);
  const Image img = random_rgb(32, 32, rng);
  const Plane l = srgb_to_lab(img).l;
  const ScaleSplit s = split_scales(l);
  for (std::size_t i = 0; i < l.size(); ++i) {
    const double sum = s.coarse.data[i] + s.fine.data[i];
    EXPECT_LE(std::abs(sum - l.data[i]), 1e-4 * std::max(1.0, std::abs(l.data[i])));
  }
}

TEST(DecomposeGray, BandsSplitAtHalf) {
  const auto black = decompose_gray(Image::filled(8, 8, ColorSpace::Gray, 0.0));
  for (double v : black.maps[0].data) EXPECT_EQ(v, 0.0);
  for (double v : black.maps[1].data) EXPECT_EQ(v, 0.0);

  const auto white = decompose_gray(Image::filled(8, 8, ColorSpace::Gray, 1.0));
  for (double v : white.maps[0].data) EXPECT_EQ(v, 0.0);
  for (double v : white.maps[1].data) EXPECT_EQ(v, 1.0);

  std::vector<double> px(64);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) px[y * 8 + x] = ((x + y) % 2 == 0) ? 0.25 : 0.75;
  const auto checker = decompose_gray(Image(8, 8, ColorSpace::Gray, px));
  for (int i = 0; i < 64; ++i) {
    if (px[i] == 0.25) {
      EXPECT_EQ(checker.maps[0].data[i], 0.25);
      EXPECT_EQ(checker.maps[1].data[i], 0.0);
    } else {
      EXPECT_EQ(checker.maps[0].data[i], 0.0);
      EXPECT_EQ(checker.maps[1].data[i], 0.75);
    }
  }
  EXPECT_EQ(checker.name(0), "BAND1");
  EXPECT_EQ(checker.name(3), "CF");
}

TEST(DecomposeGray, BoundaryValueGoesToUpperBand) {
  const auto set = decompose_gray(Image::filled(8, 8, ColorSpace::Gray, 0.5));
  EXPECT_EQ(set.maps[0].data[0], 0.0);
  EXPECT_EQ(set.maps[1].data[0], 0.5);
  EXPECT_NEAR(set.maps[2].data[0], 0.5, 1e-12);
  EXPECT_EQ(set.maps[3].data[0], 0.5);
}

TEST(Decompose, RejectsWrongModality) {
  EXPECT_THROW(decompose_gray(Image::filled(8, 8, ColorSpace::Srgb, 0.5)), Error);
  EXPECT_THROW(decompose_color(Image::filled(8, 8, ColorSpace::Gray, 0.5)), Error);
}

TEST(Image, RejectsTooSmallOrOutOfRange) {
  EXPECT_THROW(Image::filled(7, 8, ColorSpace::Gray, 0.5), Error);
  EXPECT_THROW(Image::filled(8, 8, ColorSpace::Gray, 1.5), Error);
}
