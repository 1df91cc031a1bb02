#include <gtest/gtest.h>

#include <numeric>

#include "ius/data/image_io.hpp"
#include "ius/harness/toy.hpp"
#include "ius/neural/train.hpp"
#include "test_support.hpp"

using namespace ius;
using namespace ius::harness;

namespace {

double mean_a(const Image& img) {
  const auto lab = pfm::srgb_to_lab(img);
  return std::accumulate(lab.a.data.begin(), lab.a.data.end(), 0.0) / static_cast<double>(lab.a.size());
}

// mean over a split of the per-class a* means, B minus A
double class_a_gap(const ToyCorpus& c, data::Split split) {
  double sum[2] = {0, 0};
  int n[2] = {0, 0};
  for (const auto* s : c.of(split)) {
    const int k = s->label == c.config.class_names[1];
    sum[k] += mean_a(s->image);
    ++n[k];
  }
  return sum[1] / n[1] - sum[0] / n[0];
}

ToyCorpusConfig small(double offset) {
  ToyCorpusConfig cfg;
  cfg.image_size = 16;
  cfg.color_offset = offset;
  cfg.train_per_class = 40;
  cfg.val_per_class = 10;
  cfg.test_per_class = 10;
  return cfg;
}

}  // namespace

TEST(Toy, SameSeedSameCorpus) {
  const auto a = toy_dataset_generate(small(24)), b = toy_dataset_generate(small(24));
  ASSERT_EQ(a.samples.size(), 120u);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].id, b.samples[i].id);
    EXPECT_EQ(a.samples[i].image.pixels(), b.samples[i].image.pixels());
  }
  auto cfg = small(24);
  cfg.rng_seed = 43;
  EXPECT_NE(toy_dataset_generate(cfg).samples[0].image.pixels(), a.samples[0].image.pixels());
}

TEST(Toy, LayoutAndCounts) {
  const auto c = toy_dataset_generate(small(24));
  EXPECT_EQ(c.of(data::Split::Train).size(), 80u);
  EXPECT_EQ(c.of(data::Split::Val).size(), 20u);
  EXPECT_EQ(c.of(data::Split::Test).size(), 20u);
  EXPECT_EQ(c.samples[0].id, "TRAIN_A_0000.png");
  EXPECT_EQ(c.samples[1].id, "TRAIN_B_0000.png");
  for (const auto& s : c.samples) {
    EXPECT_EQ(s.image.height(), 16);
    EXPECT_EQ(s.image.color_space(), ColorSpace::Srgb);
    for (double v : s.image.pixels()) EXPECT_EQ(v * 255.0, std::round(v * 255.0));
  }
}

TEST(Toy, ClassMeansOfAChannelDifferByOffset) {
  // without jitter or chroma noise only 8-bit quantization moves a*
  auto cfg = small(20);
  cfg.color_jitter = 0.0;
  cfg.chroma_noise = 0.0;
  const auto c = toy_dataset_generate(cfg);
  EXPECT_NEAR(class_a_gap(c, data::Split::Train), 20.0, 0.3);
  for (const auto& s : c.samples) EXPECT_NEAR(mean_a(s.image), s.label == "A" ? -10.0 : 10.0, 0.5);

  // defaults: the jitter averages out over the 400 training images
  ToyCorpusConfig def;
  def.image_size = 16;
  EXPECT_NEAR(class_a_gap(toy_dataset_generate(def), data::Split::Train), def.color_offset, 1.5);
}

TEST(Toy, ZeroOffsetMeansNoClassDifference) {
  auto cfg = small(0);
  cfg.color_jitter = 0.0;
  EXPECT_NEAR(class_a_gap(toy_dataset_generate(cfg), data::Split::Train), 0.0, 0.3);
}

TEST(Toy, InvalidConfig) {
  auto bad = small(24);
  bad.image_size = 4;
  EXPECT_THROW(toy_dataset_generate(bad), Error);
  bad = small(-1);
  EXPECT_THROW(toy_dataset_generate(bad), Error);
  bad = small(24);
  bad.val_per_class = 0;
  EXPECT_THROW(toy_dataset_generate(bad), Error);
  bad = small(24);
  bad.class_names = {"A", "A"};
  EXPECT_THROW(toy_dataset_generate(bad), Error);
}

TEST(Toy, WritesPngsAndManifest) {
  auto cfg = small(24);
  cfg.train_per_class = cfg.val_per_class = cfg.test_per_class = 2;
  const auto c = toy_dataset_generate(cfg);
  const auto dir = fixtures::scratch_dir("toy_write");
  const auto mpath = write_toy_corpus(c, dir);
  const auto m = data::read_manifest(mpath);
  ASSERT_EQ(m.rows.size(), 12u);
  EXPECT_EQ(m.subset(data::Split::Test).rows.size(), 4u);
  for (std::size_t i = 0; i < m.rows.size(); ++i)
    EXPECT_EQ(data::load_image(m.resolve(m.rows[i]), 16, 16, ColorSpace::Srgb).pixels(), c.samples[i].image.pixels());
}

// Null-signal control: with no class signal and no noise a trained model
// cannot beat chance on held-out images.
TEST(Toy, NullSignalStaysAtChance) {
  ToyCorpusConfig cfg;
  cfg.image_size = 16;
  cfg.color_offset = 0.0;
  cfg.color_jitter = 0.0;
  cfg.chroma_noise = 0.0;
  cfg.texture_amplitude = 0.0;
  cfg.train_per_class = 60;
  cfg.val_per_class = 20;
  cfg.test_per_class = 100;
  const auto c = toy_dataset_generate(cfg);
  auto inputs = [&](data::Split s, std::vector<int>& y) {
    std::vector<neural::EpuInput<float>> x;
    for (const auto* p : c.of(s)) {
      x.push_back(neural::to_input<float>(pfm::decompose(p->image)));
      y.push_back(p->label == "B");
    }
    return x;
  };
  std::vector<int> ty, vy, sy;
  const auto tx = inputs(data::Split::Train, ty), vx = inputs(data::Split::Val, vy), sx = inputs(data::Split::Test, sy);
  neural::Architecture arch;
  arch.input_rows = arch.input_cols = 16;
  arch.conv1_filters = arch.conv2_filters = arch.dense_units = 8;
  neural::TrainConfig tc;
  tc.learning_rate = 1e-2;
  tc.batch_size = 16;
  tc.max_epochs = 8;
  const auto trained = neural::train_epu(tx, ty, vx, vy, pfm::PfmConfig::Color, arch, tc);
  const auto ev = neural::evaluate(trained.model, std::span<const neural::EpuInput<float>>(sx), std::span<const int>(sy),
                                   neural::EpuAdapter<float>{});
  EXPECT_NEAR(ev.accuracy, 0.5, 0.1);
}
