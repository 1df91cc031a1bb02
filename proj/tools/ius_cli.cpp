// Command-line front end. Every command is a thin wrapper over library
// calls and always leaves a run manifest next to its output.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "ius/data/baseline_io.hpp"
#include "ius/data/model_io.hpp"
#include "ius/data/report.hpp"
#include "ius/harness/interpretation.hpp"
#include "ius/harness/pipeline.hpp"
#include "ius/harness/studies.hpp"
#include "ius/runtime.hpp"

namespace fs = std::filesystem;
using namespace ius;
using nlohmann::ordered_json;

namespace {

fs::path sidecar(const fs::path& out) { return fs::path(out.string() + ".run_manifest.json"); }

void hash_manifest_inputs(harness::RunManifest& rm, const fs::path& manifest_path, const data::Manifest& m) {
  rm.add_input(manifest_path);
  for (const auto& r : m.rows) {
    const auto p = m.resolve(r);
    if (fs::exists(p)) rm.add_input(p);
  }
}

std::vector<double> parse_number_list(const std::string& text, const char* what) {
  std::vector<double> out;
  for (const auto& f : data::split_csv_line(text)) out.push_back(data::parse_double(f, what));
  return out;
}

scoring::Thresholds parse_thresholds(const std::string& text) {
  const auto v = parse_number_list(text, "thresholds");
  if (v.size() != 4) fail(ErrorKind::Config, "--thresholds needs 4 comma-separated values");
  scoring::Thresholds t;
  std::copy(v.begin(), v.end(), t.bounds.begin());
  t.validate();
  return t;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

// ---- train -----------------------------------------------------------

struct TrainArgs {
  std::string manifest, out, modality = "color";
  int input_size = 64, batch = 64, patience = 10, epochs = 50;
  int conv1 = 32, conv2 = 64, dense = 32;
  double lr = 1e-3, momentum = 0.9;
  std::uint64_t seed = 42;
};

int cmd_train(const TrainArgs& a) {
  const auto m = data::read_manifest(a.manifest);
  harness::TrainRequest req;
  req.modality = a.modality == "gray" ? ColorSpace::Gray : ColorSpace::Srgb;
  req.input_size = a.input_size;
  req.arch.conv1_filters = a.conv1;
  req.arch.conv2_filters = a.conv2;
  req.arch.dense_units = a.dense;
  req.train.learning_rate = a.lr;
  req.train.momentum = a.momentum;
  req.train.batch_size = a.batch;
  req.train.patience = a.patience;
  req.train.max_epochs = a.epochs;
  req.train.rng_seed = a.seed;
  req.train.validate();
  const auto t = harness::train_from_manifest(m, req);

  const fs::path dir(a.out);
  fs::create_directories(dir);
  data::save_model(t.model, dir / "model.json");
  data::write_text_file((dir / "history.csv").string(), harness::history_csv(t.history));
  // split assignment with resolved paths, usable as a manifest from anywhere
  data::Manifest splits{{}, true, {}};
  for (const auto* part : {&t.splits.train, &t.splits.val, &t.splits.test})
    for (auto r : part->rows) {
      r.path = fs::absolute(part->resolve(r)).lexically_normal().string();
      splits.rows.push_back(r);
    }
  data::write_text_file((dir / "splits.csv").string(), data::format_manifest(splits));

  harness::RunManifest rm;
  rm.seed = a.seed;
  rm.config = {{"command", "train"},
               {"modality", a.modality},
               {"input_size", a.input_size},
               {"learning_rate", a.lr},
               {"momentum", a.momentum},
               {"batch_size", a.batch},
               {"patience", a.patience},
               {"max_epochs", a.epochs},
               {"architecture", {{"conv1_filters", a.conv1}, {"conv2_filters", a.conv2}, {"dense_units", a.dense}}},
               {"split_fractions", req.split.fractions}};
  hash_manifest_inputs(rm, a.manifest, m);
  rm.write(dir / "run_manifest.json");

  const auto& best = t.history.best_epoch >= 0 ? t.history.epochs[t.history.best_epoch] : neural::EpochRecord{};
  std::printf("trained %zu epochs; best epoch %d val_accuracy %.4f; model %s\n", t.history.epochs.size(),
              t.history.best_epoch + 1, best.val_accuracy, (dir / "model.json").string().c_str());
  return 0;
}

// ---- baseline / score ------------------------------------------------

int cmd_baseline(const std::string& model_path, const std::string& manifest_path, const std::string& scope,
                 const std::string& out) {
  const auto model = data::load_model(model_path);
  const auto m = data::read_manifest(manifest_path);
  std::optional<scoring::BaselineScope> s;
  if (!scope.empty()) s = scoring::parse_scope(scope);
  const auto b = harness::baseline_from_manifest(model, m, s);
  ensure_parent(out);
  data::save_baseline(b, out);

  harness::RunManifest rm;
  rm.config = {{"command", "baseline"}, {"scope", scoring::to_string(b.scope)}};
  rm.add_input(model_path);
  hash_manifest_inputs(rm, manifest_path, m);
  rm.write(sidecar(out));
  std::printf("baseline (%s) over %zu group(s) -> %s\n", scoring::to_string(b.scope), b.profiles.size(), out.c_str());
  return 0;
}

int cmd_score(const std::string& model_path, const std::string& baseline_path, const std::string& manifest_path,
              const std::string& out, const std::string& thresholds_text, unsigned threads) {
  const auto model = data::load_model(model_path);
  const auto baseline = data::load_baseline(baseline_path);
  const auto m = data::read_manifest(manifest_path);
  const scoring::Thresholds thresholds = thresholds_text.empty() ? scoring::Thresholds{} : parse_thresholds(thresholds_text);
  const auto result = harness::score_manifest(model, baseline, m, thresholds, threads);
  ensure_parent(out);
  data::write_score_report(result.scored, model.config(), out, thresholds);

  harness::RunManifest rm;
  rm.config = {{"command", "score"},
               {"thresholds", thresholds.standard() ? "standard" : "non-standard"},
               {"threshold_bounds", thresholds.bounds}};
  rm.add_input(model_path);
  rm.add_input(baseline_path);
  hash_manifest_inputs(rm, manifest_path, m);
  rm.write(sidecar(out));

  for (const auto& f : result.failures)
    std::fprintf(stderr, "ius: manifest row %zu (%s): %s\n", f.index + 2, f.id.c_str(), f.message.c_str());
  std::printf("scored %zu of %zu images -> %s\n", result.scored.size(), m.rows.size(), out.c_str());
  return result.failures.empty() ? 0 : 2;
}

// ---- curate ----------------------------------------------------------

int cmd_curate(const std::string& scores, int count, const std::string& dist_text, const std::string& mode,
               std::uint64_t seed, const std::string& out) {
  const auto report = data::read_score_report(scores);
  const auto pool = harness::pool_from_report(report);
  std::map<std::string, double> dist;
  if (dist_text.empty()) {
    // keep the pool's own class proportions
    for (const auto& [k, n] : pool.class_counts()) dist[k] = n;
  } else {
    dist = harness::parse_distribution(dist_text);
  }
  const auto ids = mode == "vh" ? harness::curate_vh(pool, count, dist) : harness::random_control(pool, count, dist, seed);
  ensure_parent(out);
  data::write_text_file(out, harness::format_id_list(ids));

  harness::RunManifest rm;
  rm.seed = seed;
  rm.config = {{"command", "curate"}, {"mode", mode}, {"count", count}, {"distribution", dist}};
  rm.add_input(scores);
  rm.write(sidecar(out));
  std::printf("selected %zu ids (%s) -> %s\n", ids.size(), mode.c_str(), out.c_str());
  return 0;
}

// ---- sensitivity -----------------------------------------------------

int cmd_sensitivity(const std::string& model_path, const std::string& manifest_path, const std::string& pool_path,
                    const std::string& out, const std::string& scope_text, const std::string& fractions_text,
                    std::uint64_t seed) {
  const auto model = data::load_model(model_path);
  const auto m = data::read_manifest(manifest_path);
  const auto rows = harness::baseline_rows(m);
  const auto scope = scope_text.empty() ? harness::default_scope(rows) : scoring::parse_scope(scope_text);
  const auto fractions = parse_number_list(fractions_text, "fractions");
  const auto pool = harness::pool_from_report(data::read_score_report(pool_path));
  if (pool.config != model.config()) fail(ErrorKind::Config, "pool report and model use different PFM configs");

  std::vector<scoring::ContributionProfile> profiles;
  for (const auto& img : harness::load_images(rows, model.input_rows(), model.input_cols(), harness::modality_of(model.config())))
    profiles.push_back(scoring::profile_of(model, img));
  const auto labels = rows.labels();
  const auto rep = harness::baseline_sensitivity(profiles, rows.has_labels ? &labels : nullptr, scope, pool, fractions, seed);

  const fs::path dir(out);
  fs::create_directories(dir);
  auto put = [&](const char* name, const std::string& text) { data::write_text_file((dir / name).string(), text); };
  put("sensitivity_baselines.csv", harness::sensitivity_baselines_csv(rep, model.config()));
  put("sensitivity_cosines.csv", harness::sensitivity_cosines_csv(rep));
  put("sensitivity_agreement.csv", harness::sensitivity_agreement_csv(rep));
  if (!pool.entries.empty()) {
    put("magnitude.csv", harness::magnitude_csv(harness::magnitude_stats(pool), model.config()));
    std::vector<scoring::ProfileVector> ps;
    for (const auto& e : pool.entries) ps.push_back(e.profile);
    put("joint_threshold.csv", harness::joint_threshold_csv(harness::joint_threshold_probability(ps)));
  }

  harness::RunManifest rm;
  rm.seed = seed;
  rm.config = {{"command", "sensitivity"}, {"scope", scoring::to_string(scope)}, {"fractions", fractions}};
  rm.add_input(model_path);
  rm.add_input(pool_path);
  hash_manifest_inputs(rm, manifest_path, rows);
  rm.write(dir / "run_manifest.json");
  for (std::size_t f = 0; f < rep.fractions.size(); ++f)
    std::printf("fraction %g: VH agreement %.4f\n", rep.fractions[f], rep.agreement[f]);
  return 0;
}

// ---- study / toy corpus / report --------------------------------------

int cmd_study(const std::string& kind, const std::string& out, std::uint64_t seed, int epochs) {
  harness::ToyStudyConfig cfg;
  cfg.seed = seed;
  if (epochs >= 0) cfg.train.max_epochs = epochs;
  cfg.run_degradation = kind != "probe";
  cfg.run_probe = kind != "degradation";
  cfg.run_sensitivity = kind == "toy";
  const auto r = harness::run_toy_study(cfg, [](const std::string& msg) { std::fprintf(stderr, "%s\n", msg.c_str()); });
  harness::write_toy_study(r, cfg, out);
  // record which variant ran
  auto rm_text = data::read_text_file((fs::path(out) / "run_manifest.json").string());
  auto j = ordered_json::parse(rm_text);
  j["config"]["study"] = kind;
  data::write_text_file((fs::path(out) / "run_manifest.json").string(), j.dump(2) + "\n");

  std::printf("best val accuracy %.4f after %zu epochs\n", r.best_val_accuracy, r.history.epochs.size());
  if (r.degradation) std::printf("degradation spearman %.4f\n", r.degradation->spearman);
  if (!r.probe.empty()) {
    int wins = 0;
    for (const auto& p : r.probe) wins += p.curated_accuracy >= p.control_accuracy;
    std::printf("probe: curated >= control in %d of %zu repeats\n", wins, r.probe.size());
  }
  std::printf("outputs in %s (%.1f s)\n", out.c_str(), r.total_seconds);
  return 0;
}

int cmd_toy_corpus(const std::string& out, std::uint64_t seed, int image_size) {
  harness::ToyCorpusConfig cfg;
  cfg.rng_seed = seed;
  cfg.image_size = image_size;
  const auto corpus = harness::toy_dataset_generate(cfg);
  const auto manifest = harness::write_toy_corpus(corpus, out);
  harness::RunManifest rm;
  rm.seed = seed;
  rm.config = {{"command", "toy-corpus"},
               {"image_size", image_size},
               {"color_offset", cfg.color_offset},
               {"color_jitter", cfg.color_jitter},
               {"chroma_noise", cfg.chroma_noise},
               {"texture_amplitude", cfg.texture_amplitude}};
  rm.write(fs::path(out) / "run_manifest.json");
  std::printf("%zu images -> %s\n", corpus.samples.size(), manifest.string().c_str());
  return 0;
}

int cmd_report(const std::string& scores, const std::string& baseline_path, const std::string& out) {
  const auto report = data::read_score_report(scores);
  const auto baseline = data::load_baseline(baseline_path);
  std::string csv = "id,class,component,baseline,image,deviation,sign_agrees\n";
  for (const auto& row : report.rows) {
    const auto key = baseline.scope == scoring::BaselineScope::PerClass ? row.class_key : std::nullopt;
    for (const auto& c : harness::interpretation_report({report.config, row.components}, baseline, key))
      csv += row.id + "," + row.class_key.value_or("") + "," + c.name + "," + data::format_double(c.baseline) + "," +
             data::format_double(c.image) + "," + data::format_double(c.deviation) + "," + (c.sign_agrees ? "1" : "0") + "\n";
  }
  ensure_parent(out);
  data::write_text_file(out, csv);
  harness::RunManifest rm;
  rm.config = {{"command", "report"}};
  rm.add_input(scores);
  rm.add_input(baseline_path);
  rm.write(sidecar(out));
  std::printf("%zu images -> %s\n", report.rows.size(), out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  ius::tune_allocator();
  CLI::App app{"Image utility scoring with an interpretable additive CNN"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "train a model on a labelled manifest");
  train->add_option("--manifest", ta.manifest, "CSV manifest path[,label[,split]]")->required();
  train->add_option("--out", ta.out, "output directory")->required();
  train->add_option("--modality", ta.modality)->check(CLI::IsMember({"color", "gray"}));
  train->add_option("--input-size", ta.input_size, "square input size in pixels");
  train->add_option("--lr", ta.lr);
  train->add_option("--momentum", ta.momentum);
  train->add_option("--batch", ta.batch);
  train->add_option("--patience", ta.patience);
  train->add_option("--epochs", ta.epochs, "maximum epochs");
  train->add_option("--conv1", ta.conv1, "filters in the first conv layer");
  train->add_option("--conv2", ta.conv2, "filters in the second conv layer");
  train->add_option("--dense", ta.dense, "hidden dense units");
  train->add_option("--seed", ta.seed);

  std::string model, manifest, out, scope, baseline_path, thresholds, scores, dist, mode = "vh", pool;
  std::string fractions = "0.25,0.5,0.75,1", kind;
  std::uint64_t seed = 42;
  unsigned threads = 1;
  int count = 0, epochs = -1, image_size = 32;

  auto* baseline = app.add_subcommand("baseline", "average contribution profiles of the TEST rows");
  baseline->add_option("--model", model)->required();
  baseline->add_option("--manifest", manifest)->required();
  baseline->add_option("--scope", scope, "global|per-class (default: per-class when labelled)");
  baseline->add_option("--out", out)->required();

  auto* score = app.add_subcommand("score", "score every manifest row against a baseline");
  score->add_option("--model", model)->required();
  score->add_option("--baseline", baseline_path)->required();
  score->add_option("--manifest", manifest)->required();
  score->add_option("--out", out)->required();
  score->add_option("--thresholds", thresholds, "advanced: four level bounds, marks the report non-standard");
  score->add_option("--threads", threads);

  auto* curate = app.add_subcommand("curate", "select VH entries or a random control from a score report");
  curate->add_option("--scores", scores)->required();
  curate->add_option("--count", count)->required();
  curate->add_option("--dist", dist, "class weights, e.g. A=0.5,B=0.5 (default: pool proportions)");
  curate->add_option("--mode", mode)->check(CLI::IsMember({"vh", "random"}));
  curate->add_option("--seed", seed);
  curate->add_option("--out", out)->required();

  auto* sens = app.add_subcommand("sensitivity", "baseline subset sensitivity and magnitude tables");
  sens->add_option("--model", model)->required();
  sens->add_option("--manifest", manifest)->required();
  sens->add_option("--pool", pool, "score report of the synthetic pool")->required();
  sens->add_option("--out", out)->required();
  sens->add_option("--scope", scope);
  sens->add_option("--fractions", fractions);
  sens->add_option("--seed", seed);

  auto* study = app.add_subcommand("study", "run a scripted toy study");
  study->add_option("kind", kind)->required()->check(CLI::IsMember({"toy", "degradation", "probe"}));
  study->add_option("--out", out)->required();
  study->add_option("--seed", seed);
  study->add_option("--epochs", epochs, "override the EPU epoch budget");

  auto* toy = app.add_subcommand("toy-corpus", "write the procedural toy corpus as PNGs plus manifest");
  toy->add_option("--out", out)->required();
  toy->add_option("--seed", seed);
  toy->add_option("--image-size", image_size);

  auto* report = app.add_subcommand("report", "per-component comparison of scored images with the baseline");
  report->add_option("--scores", scores)->required();
  report->add_option("--baseline", baseline_path)->required();
  report->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (train->parsed()) return cmd_train(ta);
    if (baseline->parsed()) return cmd_baseline(model, manifest, scope, out);
    if (score->parsed()) return cmd_score(model, baseline_path, manifest, out, thresholds, threads);
    if (curate->parsed()) return cmd_curate(scores, count, dist, mode, seed, out);
    if (sens->parsed()) return cmd_sensitivity(model, manifest, pool, out, scope, fractions, seed);
    if (study->parsed()) return cmd_study(kind, out, seed, epochs);
    if (toy->parsed()) return cmd_toy_corpus(out, seed, image_size);
    if (report->parsed()) return cmd_report(scores, baseline_path, out);
  } catch (const ius::Error& e) {
    std::fprintf(stderr, "ius: %s\n", e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ius: %s\n", e.what());
    return 2;
  }
  return 1;
}
