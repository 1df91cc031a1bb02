#include <gtest/gtest.h>

#include "ius/scoring/scoring.hpp"
#include "test_support.hpp"

using namespace ius;
using namespace ius::scoring;

namespace {

Image random_rgb(std::mt19937_64& rng, int size = 8) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  std::vector<double> px(static_cast<std::size_t>(size) * size * 3);
  for (auto& v : px) v = d(rng);
  return Image(size, size, ColorSpace::Srgb, std::move(px));
}

}  // namespace

TEST(ProfileOf, ZeroModelGivesZeroProfile) {
  neural::EpuModel<float> m(pfm::PfmConfig::Color, fixtures::tiny_arch());
  std::mt19937_64 rng(1);
  EXPECT_EQ(profile_of(m, random_rgb(rng)).components, (ProfileVector{0, 0, 0, 0}));
}

TEST(ProfileOf, MatchesForwardPassExactly) {
  std::mt19937_64 rng(2);
  const auto m = fixtures::random_tiny_model<float>(rng);
  const auto img = random_rgb(rng);
  EXPECT_EQ(profile_of(m, img), neural::epu_forward(m, pfm::decompose(img)).profile);
}

TEST(ProfileOf, ModalityMismatchIsConfigError) {
  std::mt19937_64 rng(3);
  const auto m = fixtures::random_tiny_model<float>(rng);
  try {
    profile_of(m, Image::filled(8, 8, ColorSpace::Gray, 0.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
  }
}

TEST(ComputeBaseline, SingleImageIsItsProfile) {
  std::mt19937_64 rng(4);
  const auto m = fixtures::random_tiny_model<float>(rng);
  const auto img = random_rgb(rng);
  const auto b = compute_baseline(m, {img}, nullptr, BaselineScope::Global);
  EXPECT_EQ(b.profiles.at("*"), profile_of(m, img).components);
  EXPECT_EQ(b.counts.at("*"), 1);
  EXPECT_THROW(compute_baseline(m, {}, nullptr, BaselineScope::Global), Error);
}

TEST(ScoreSet, EmptySingleAndFailures) {
  std::mt19937_64 rng(5);
  const auto m = fixtures::random_tiny_model<float>(rng);
  std::vector<Image> real;
  for (int i = 0; i < 5; ++i) real.push_back(random_rgb(rng));
  const auto base = compute_baseline(m, real, nullptr, BaselineScope::Global);

  EXPECT_TRUE(score_set(m, base, {}).scored.empty());

  const auto img = random_rgb(rng);
  const auto one = score_set(m, base, {make_item("a", std::nullopt, img)});
  ASSERT_EQ(one.scored.size(), 1u);
  EXPECT_EQ(one.scored[0].score.u, ius_score(profile_of(m, img), base).u);

  std::vector<ScoreItem> items{make_item("ok1", std::nullopt, random_rgb(rng)),
                               {"broken", std::nullopt, []() -> Image { fail(ErrorKind::Io, "missing file x.png"); }},
                               make_item("gray", std::nullopt, Image::filled(8, 8, ColorSpace::Gray, 0.2)),
                               make_item("ok2", std::nullopt, random_rgb(rng))};
  const auto r = score_set(m, base, items);
  ASSERT_EQ(r.scored.size(), 2u);
  EXPECT_EQ(r.scored[0].id, "ok1");
  EXPECT_EQ(r.scored[1].id, "ok2");
  ASSERT_EQ(r.failures.size(), 2u);
  EXPECT_EQ(r.failures[0].index, 1u);
  EXPECT_NE(r.failures[0].message.find("x.png"), std::string::npos);
  EXPECT_EQ(r.failures[1].id, "gray");
}

TEST(ScoreSet, ParallelMatchesSerial) {
  std::mt19937_64 rng(6);
  const auto m = fixtures::random_tiny_model<float>(rng);
  std::vector<Image> real;
  std::vector<std::string> labels;
  for (int i = 0; i < 6; ++i) {
    real.push_back(random_rgb(rng));
    labels.push_back(i % 2 ? "p" : "q");
  }
  const auto base = compute_baseline(m, real, &labels, BaselineScope::PerClass);
  std::vector<ScoreItem> items;
  for (int i = 0; i < 23; ++i)
    items.push_back(make_item("s" + std::to_string(i), std::string(i % 2 ? "p" : "q"), random_rgb(rng)));
  const auto serial = score_set(m, base, items);
  ScoreOptions opt;
  opt.threads = 4;
  const auto parallel = score_set(m, base, items, opt);
  ASSERT_EQ(serial.scored.size(), parallel.scored.size());
  for (std::size_t i = 0; i < serial.scored.size(); ++i) {
    EXPECT_EQ(serial.scored[i].id, parallel.scored[i].id);
    EXPECT_EQ(serial.scored[i].score.u, parallel.scored[i].score.u);
    EXPECT_EQ(serial.scored[i].profile, parallel.scored[i].profile);
  }
}
