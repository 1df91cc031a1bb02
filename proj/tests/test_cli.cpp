#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>

#include "ius/data/baseline_io.hpp"
#include "ius/data/model_io.hpp"
#include "ius/data/report.hpp"
#include "ius/harness/curation.hpp"
#include "ius/harness/pipeline.hpp"
#include "ius/harness/toy.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace ius;

namespace {

struct Run {
  int code = -1;
  std::string output;  // stdout and stderr
};

Run ius_cli(const std::string& args) {
  Run r;
  FILE* p = popen((std::string(IUS_CLI_PATH) + " " + args + " 2>&1").c_str(), "r");
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) { return data::read_text_file(p.string()); }

const char* kTrainFlags = "--input-size 16 --epochs 2 --lr 1e-2 --batch 16 --conv1 4 --conv2 4 --dense 4";

// Small corpus plus one trained model shared by the tests below.
class CliFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fixtures::scratch_dir("cli");
    harness::ToyCorpusConfig cfg;
    cfg.image_size = 16;
    cfg.train_per_class = 20;
    cfg.val_per_class = 6;
    cfg.test_per_class = 5;
    manifest_ = harness::write_toy_corpus(harness::toy_dataset_generate(cfg), dir_ / "corpus");
    const auto r = ius_cli("train --manifest " + manifest_.string() + " --out " + (dir_ / "m").string() + " " + kTrainFlags);
    ASSERT_EQ(r.code, 0) << r.output;
  }

  static fs::path dir_, manifest_;
  fs::path model() const { return dir_ / "m" / "model.json"; }
};

fs::path CliFixture::dir_, CliFixture::manifest_;

}  // namespace

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(ius_cli("").code, 1);
  EXPECT_EQ(ius_cli("train --out x").code, 1);
  EXPECT_EQ(ius_cli("frobnicate").code, 1);
  EXPECT_EQ(ius_cli("curate --scores a --count 1 --mode best --out b").code, 1);
  EXPECT_EQ(ius_cli("--help").code, 0);
}

TEST(Cli, MissingManifestExitsTwoWithPath) {
  const auto r = ius_cli("train --manifest /nonexistent/m.csv --out /tmp/ius_test_never");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("/nonexistent/m.csv"), std::string::npos) << r.output;
}

TEST_F(CliFixture, TrainWritesLoadableModelHistoryAndManifest) {
  const auto m = data::load_model(model());
  EXPECT_EQ(m.input_rows(), 16);
  const auto history = slurp(dir_ / "m" / "history.csv");
  EXPECT_EQ(data::split_lines(history).size(), 3u);  // header + 2 epochs
  const auto rm = nlohmann::json::parse(slurp(dir_ / "m" / "run_manifest.json"));
  EXPECT_EQ(rm["seed"], 42);
  EXPECT_TRUE(rm["input_hashes"].contains(manifest_.string()));
  const auto splits = data::read_manifest(dir_ / "m" / "splits.csv");
  EXPECT_EQ(splits.subset(data::Split::Test).rows.size(), 10u);
}

TEST_F(CliFixture, RepeatedTrainIsBitIdentical) {
  const auto again = dir_ / "again";
  ASSERT_EQ(ius_cli("train --manifest " + manifest_.string() + " --out " + again.string() + " " + kTrainFlags).code, 0);
  EXPECT_EQ(slurp(again / "model.json"), slurp(model()));
  ASSERT_EQ(ius_cli("train --manifest " + manifest_.string() + " --out " + (dir_ / "seed7").string() + " --seed 7 " +
                    kTrainFlags)
                .code,
            0);
  EXPECT_NE(slurp(dir_ / "seed7" / "model.json"), slurp(model()));
}

TEST_F(CliFixture, BaselineAndScoreMatchLibrary) {
  const auto b = dir_ / "b.json", s = dir_ / "s.csv";
  ASSERT_EQ(ius_cli("baseline --model " + model().string() + " --manifest " + manifest_.string() + " --out " + b.string()).code, 0);
  ASSERT_EQ(ius_cli("score --model " + model().string() + " --baseline " + b.string() + " --manifest " + manifest_.string() +
                    " --out " + s.string())
                .code,
            0);
  const auto m = data::load_model(model());
  const auto manifest = data::read_manifest(manifest_);
  const auto lib_b = harness::baseline_from_manifest(m, manifest);
  EXPECT_EQ(lib_b.scope, scoring::BaselineScope::PerClass);
  EXPECT_EQ(lib_b.counts.at("A"), 5);  // TEST rows only
  EXPECT_EQ(slurp(b), data::serialize_baseline(lib_b));
  const auto lib_s = harness::score_manifest(m, lib_b, manifest);
  EXPECT_EQ(slurp(s), data::format_score_report(lib_s.scored, m.config()));

  const auto report = data::read_score_report(s);
  ASSERT_EQ(report.rows.size(), manifest.rows.size());
  for (const auto& row : report.rows) EXPECT_EQ(row.level, scoring::utility_level(row.u));
  EXPECT_TRUE(fs::exists(dir_ / "s.csv.run_manifest.json"));
}

TEST_F(CliFixture, SingleImageBaselineIsThatProfile) {
  const auto one = dir_ / "one.csv";
  const auto full = data::read_manifest(manifest_);
  data::write_text_file(one.string(), "path\n" + full.resolve(full.rows[0]).string() + "\n");
  const auto b = dir_ / "one.json";
  ASSERT_EQ(ius_cli("baseline --model " + model().string() + " --manifest " + one.string() + " --out " + b.string()).code, 0);
  const auto base = data::load_baseline(b);
  EXPECT_EQ(base.scope, scoring::BaselineScope::Global);
  const auto m = data::load_model(model());
  const auto p = scoring::profile_of(m, data::load_image(full.resolve(full.rows[0]), 16, 16, ColorSpace::Srgb));
  for (int i = 0; i < 4; ++i) EXPECT_EQ(base.profiles.at("*")[i], p.components[i]);

  // per-class without labels is a data error
  EXPECT_EQ(ius_cli("baseline --model " + model().string() + " --manifest " + one.string() + " --scope per-class --out " +
                    (dir_ / "x.json").string())
                .code,
            2);
}

TEST_F(CliFixture, EmptyManifestGivesHeaderOnlyReport) {
  const auto b = dir_ / "b2.json", empty = dir_ / "empty.csv", s = dir_ / "empty_scores.csv";
  ASSERT_EQ(ius_cli("baseline --model " + model().string() + " --manifest " + manifest_.string() + " --scope global --out " +
                    b.string())
                .code,
            0);
  data::write_text_file(empty.string(), "path\n");
  ASSERT_EQ(ius_cli("score --model " + model().string() + " --baseline " + b.string() + " --manifest " + empty.string() +
                    " --out " + s.string())
                .code,
            0);
  EXPECT_EQ(slurp(s), data::report_header(pfm::PfmConfig::Color) + "\n");
}

TEST_F(CliFixture, ThresholdOverrideMarksReport) {
  const auto b = dir_ / "b3.json", s = dir_ / "t.csv";
  ASSERT_EQ(ius_cli("baseline --model " + model().string() + " --manifest " + manifest_.string() + " --out " + b.string()).code, 0);
  const auto r = ius_cli("score --model " + model().string() + " --baseline " + b.string() + " --manifest " + manifest_.string() +
                         " --out " + s.string() + " --thresholds 0.1,0.3,0.5,0.7");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(slurp(s).rfind("# non-standard thresholds:", 0), 0u);
  EXPECT_NE(slurp(dir_ / "t.csv.run_manifest.json").find("non-standard"), std::string::npos);
  EXPECT_EQ(ius_cli("score --model " + model().string() + " --baseline " + b.string() + " --manifest " + manifest_.string() +
                    " --out " + s.string() + " --thresholds 0.5,0.4,0.6,0.8")
                .code,
            2);
}

TEST_F(CliFixture, CurateWrapsLibrary) {
  // hand-made report so the VH count is known
  const auto s = dir_ / "pool.csv";
  std::string csv = data::report_header(pfm::PfmConfig::Color) + "\n";
  for (int i = 0; i < 10; ++i)
    for (const char* c : {"A", "B"}) {
      const double u = i < 4 ? 0.9 + 0.01 * i : 0.1;
      csv += std::string("p") + c + std::to_string(i) + "," + c + "," + data::format_double(u) + "," +
             scoring::to_string(scoring::utility_level(u)) + ",0.5,0.5,0.5,0.5\n";
    }
  data::write_text_file(s.string(), csv);
  const auto out = dir_ / "vh.txt";
  ASSERT_EQ(ius_cli("curate --scores " + s.string() + " --count 6 --dist A=0.5,B=0.5 --out " + out.string()).code, 0);
  const auto pool = harness::pool_from_report(data::read_score_report(s));
  EXPECT_EQ(slurp(out), harness::format_id_list(harness::curate_vh(pool, 6, {{"A", 0.5}, {"B", 0.5}})));

  const auto rnd = dir_ / "rnd.txt";
  ASSERT_EQ(ius_cli("curate --scores " + s.string() + " --count 6 --mode random --seed 5 --out " + rnd.string()).code, 0);
  EXPECT_EQ(slurp(rnd), harness::format_id_list(harness::random_control(pool, 6, {{"A", 10}, {"B", 10}}, 5)));

  const auto r = ius_cli("curate --scores " + s.string() + " --count 10 --dist A=0.5,B=0.5 --out " + out.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("A: 1"), std::string::npos) << r.output;
}

TEST_F(CliFixture, CorruptModelIsRejected) {
  auto text = slurp(model());
  text[text.find("\"checksum\"") + 12] ^= 1;
  const auto bad = dir_ / "bad_model.json";
  data::write_text_file(bad.string(), text);
  const auto r = ius_cli("baseline --model " + bad.string() + " --manifest " + manifest_.string() + " --out " +
                         (dir_ / "never.json").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(fs::exists(dir_ / "never.json"));
}

TEST_F(CliFixture, SensitivityAndReportWriteTables) {
  const auto b = dir_ / "b4.json", s = dir_ / "s4.csv";
  ASSERT_EQ(ius_cli("baseline --model " + model().string() + " --manifest " + manifest_.string() + " --out " + b.string()).code, 0);
  ASSERT_EQ(ius_cli("score --model " + model().string() + " --baseline " + b.string() + " --manifest " + manifest_.string() +
                    " --out " + s.string())
                .code,
            0);
  const auto out = dir_ / "sens";
  const auto r = ius_cli("sensitivity --model " + model().string() + " --manifest " + manifest_.string() + " --pool " +
                         s.string() + " --out " + out.string() + " --fractions 0.5,1");
  ASSERT_EQ(r.code, 0) << r.output;
  for (const char* f : {"sensitivity_baselines.csv", "sensitivity_cosines.csv", "sensitivity_agreement.csv", "magnitude.csv",
                        "joint_threshold.csv", "run_manifest.json"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  const auto agreement = slurp(out / "sensitivity_agreement.csv");
  EXPECT_NE(agreement.find("\n1,1\n"), std::string::npos) << agreement;

  const auto interp = dir_ / "interp.csv";
  ASSERT_EQ(ius_cli("report --scores " + s.string() + " --baseline " + b.string() + " --out " + interp.string()).code, 0);
  EXPECT_EQ(data::split_lines(slurp(interp)).size(), 1 + 4 * data::read_manifest(manifest_).rows.size());
}
