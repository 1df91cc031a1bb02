#pragma once
// End-to-end toy study: corpus -> EPU training -> per-class baseline on the
// real test split -> degradation ladder on the validation split -> scored
// mixed clean/corrupted synthetic pool -> VH curation vs random control
// through the downstream probe -> baseline subset sensitivity.

#include <chrono>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ius/data/baseline_io.hpp"
#include "ius/data/model_io.hpp"
#include "ius/data/report.hpp"
#include "ius/harness/curation.hpp"
#include "ius/harness/degradation.hpp"
#include "ius/harness/probe.hpp"
#include "ius/harness/run_manifest.hpp"
#include "ius/harness/sensitivity.hpp"
#include "ius/harness/toy.hpp"

namespace ius::harness {

struct ToyStudyConfig {
  ToyCorpusConfig corpus;
  neural::TrainConfig train = [] {
    neural::TrainConfig t;
    t.learning_rate = 1e-2;
    t.batch_size = 16;
    return t;
  }();
  neural::Architecture arch;  // input size follows corpus.image_size
  std::vector<CorruptionLevel> ladder = default_ladder();

  int pool_per_class = 120;
  double pool_corrupt_fraction = 0.5;  // corrupted with a ladder level >= 2
  int curate_count = 60;               // total, split evenly over the two classes
  ProbeConfig probe = [] {
    ProbeConfig p;
    p.train.learning_rate = 1e-2;
    p.train.batch_size = 8;
    p.train.max_epochs = 30;
    p.train.patience = 8;
    return p;
  }();
  std::vector<double> sensitivity_fractions{0.25, 0.5, 0.75, 1.0};
  std::uint64_t seed = 42;

  bool run_degradation = true;
  bool run_probe = true;
  bool run_sensitivity = true;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["corpus"] = {{"image_size", corpus.image_size},
                   {"color_offset", corpus.color_offset},
                   {"texture_amplitude", corpus.texture_amplitude},
                   {"color_jitter", corpus.color_jitter},
                   {"chroma_noise", corpus.chroma_noise},
                   {"train_per_class", corpus.train_per_class},
                   {"val_per_class", corpus.val_per_class},
                   {"test_per_class", corpus.test_per_class}};
    j["train"] = {{"lr", train.learning_rate},        {"momentum", train.momentum},
                  {"batch", train.batch_size},        {"max_epochs", train.max_epochs},
                  {"patience", train.patience}};
    j["architecture"] = {{"conv1_filters", arch.conv1_filters},
                         {"conv2_filters", arch.conv2_filters},
                         {"dense_units", arch.dense_units}};
    auto ladder_j = nlohmann::ordered_json::array();
    for (const auto& l : ladder) ladder_j.push_back({{"blur_sigma", l.blur_sigma}, {"noise_sigma", l.noise_sigma}});
    j["ladder"] = ladder_j;
    j["pool_per_class"] = pool_per_class;
    j["pool_corrupt_fraction"] = pool_corrupt_fraction;
    j["curate_count"] = curate_count;
    j["probe"] = {{"repeats", probe.repeats},
                  {"lr", probe.train.learning_rate},
                  {"batch", probe.train.batch_size},
                  {"max_epochs", probe.train.max_epochs},
                  {"patience", probe.train.patience}};
    j["sensitivity_fractions"] = sensitivity_fractions;
    j["parts"] = {{"degradation", run_degradation}, {"probe", run_probe}, {"sensitivity", run_sensitivity}};
    return j;
  }
};

struct ToyStudyResult {
  neural::EpuModelF model;
  neural::TrainHistory history;
  double best_val_accuracy = 0.0;
  double train_seconds = 0.0;
  scoring::BaselineProfile baseline;
  std::optional<DegradationReport> degradation;
  ScoredPool pool;
  std::vector<std::string> pool_corrupted;  // ids of corrupted pool members
  std::vector<std::string> curated, control;
  std::vector<ProbeRepeat> probe;
  std::optional<SensitivityReport> sensitivity;
  std::optional<MagnitudeReport> magnitude;
  std::vector<double> joint_probability;
  double total_seconds = 0.0;
};

namespace detail {

inline std::vector<neural::EpuInput<float>> epu_inputs(const std::vector<const ToySample*>& samples) {
  std::vector<neural::EpuInput<float>> out;
  for (const auto* s : samples) out.push_back(neural::to_input<float>(pfm::decompose(s->image)));
  return out;
}

inline std::vector<int> binary_of(const std::vector<const ToySample*>& samples, const ToyCorpusConfig& c) {
  std::vector<int> out;
  for (const auto* s : samples) out.push_back(s->label == c.class_names[1]);
  return out;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

// Synthetic pool: fresh toy images, a seeded fraction corrupted at one of
// the heavier ladder levels.
inline std::vector<LabeledImage> make_pool(const ToyStudyConfig& cfg, std::vector<std::string>& corrupted) {
  std::vector<LabeledImage> pool;
  std::mt19937_64 rng(neural::derive_seed(cfg.seed, 700));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const std::size_t heavy_from = std::min<std::size_t>(2, cfg.ladder.size() - 1);
  std::uniform_int_distribution<std::size_t> pick(heavy_from, cfg.ladder.size() - 1);
  const std::uint64_t base_stream = 1u << 20;
  for (int i = 0; i < cfg.pool_per_class; ++i)
    for (int c = 0; c < 2; ++c) {
      char name[96];
      std::snprintf(name, sizeof name, "POOL_%s_%04d.png", cfg.corpus.class_names[c].c_str(), i);
      Image img = toy_image(cfg.corpus, c, base_stream + 2 * static_cast<std::uint64_t>(i) + c);
      const bool corrupt_it = u01(rng) < cfg.pool_corrupt_fraction;
      const std::size_t level = pick(rng);
      if (corrupt_it) {
        img = corrupt(img, cfg.ladder[level], neural::derive_seed(cfg.seed, 800 + pool.size()));
        corrupted.push_back(name);
      }
      pool.push_back({name, cfg.corpus.class_names[c], std::move(img)});
    }
  return pool;
}

inline ToyStudyResult run_toy_study(ToyStudyConfig cfg, const std::function<void(const std::string&)>& log = {}) {
  const auto t_start = std::chrono::steady_clock::now();
  auto say = [&](const std::string& m) {
    if (log) log(m);
  };
  cfg.corpus.rng_seed = cfg.seed;
  cfg.train.rng_seed = cfg.seed;
  cfg.probe.seed = cfg.seed;
  cfg.arch.input_rows = cfg.arch.input_cols = cfg.corpus.image_size;
  if (cfg.ladder.empty()) fail(ErrorKind::Config, "empty corruption ladder");

  ToyStudyResult res;
  const ToyCorpus corpus = toy_dataset_generate(cfg.corpus);
  const auto train = corpus.of(data::Split::Train), val = corpus.of(data::Split::Val), test = corpus.of(data::Split::Test);
  say("corpus: " + std::to_string(corpus.samples.size()) + " images");

  const auto t_train = std::chrono::steady_clock::now();
  auto trained = neural::train_epu(detail::epu_inputs(train), detail::binary_of(train, cfg.corpus), detail::epu_inputs(val),
                                   detail::binary_of(val, cfg.corpus), pfm::PfmConfig::Color, cfg.arch, cfg.train);
  res.train_seconds = detail::seconds_since(t_train);
  res.model = std::move(trained.model);
  res.history = std::move(trained.history);
  for (const auto& e : res.history.epochs) res.best_val_accuracy = std::max(res.best_val_accuracy, e.val_accuracy);
  say("trained " + std::to_string(res.history.epochs.size()) + " epochs in " + data::format_double(res.train_seconds) + " s");

  std::vector<Image> test_images;
  std::vector<std::string> test_labels;
  std::vector<scoring::ContributionProfile> test_profiles;
  for (const auto* s : test) {
    test_images.push_back(s->image);
    test_labels.push_back(s->label);
    test_profiles.push_back(scoring::profile_of(res.model, s->image));
  }
  res.baseline = scoring::baseline_from_profiles(test_profiles, &test_labels, scoring::BaselineScope::PerClass,
                                                 {cfg.corpus.class_names[0], cfg.corpus.class_names[1]});

  if (cfg.run_degradation) {
    std::vector<Image> held;
    std::vector<std::optional<std::string>> keys;
    for (const auto* s : val) {
      held.push_back(s->image);
      keys.push_back(s->label);
    }
    res.degradation = degradation_study(res.model, res.baseline, held, keys, cfg.ladder, neural::derive_seed(cfg.seed, 600));
    say("degradation spearman " + data::format_double(res.degradation->spearman));
  }

  if (cfg.run_probe || cfg.run_sensitivity) {
    const auto pool_images = make_pool(cfg, res.pool_corrupted);
    std::vector<scoring::ScoreItem> items;
    for (const auto& p : pool_images) items.push_back(scoring::make_item(p.id, p.label, p.image));
    const auto scored = scoring::score_set(res.model, res.baseline, items);
    if (!scored.failures.empty()) fail(ErrorKind::DegenerateProfile, "pool scoring failed: " + scored.failures.front().message);
    res.pool = pool_from_scores(scored.scored, pfm::PfmConfig::Color);

    if (cfg.run_probe) {
      const std::map<std::string, double> dist{{cfg.corpus.class_names[0], 0.5}, {cfg.corpus.class_names[1], 0.5}};
      res.curated = curate_vh(res.pool, cfg.curate_count, dist);
      res.control = random_control(res.pool, cfg.curate_count, dist, neural::derive_seed(cfg.seed, 900));
      std::vector<LabeledImage> real_test;
      for (const auto* s : test) real_test.push_back({s->id, s->label, s->image});
      res.probe = downstream_probe(res.curated, res.control, pool_images, real_test, cfg.probe);
      say("probe done");
    }
    if (cfg.run_sensitivity) {
      res.sensitivity = baseline_sensitivity(test_profiles, &test_labels, scoring::BaselineScope::PerClass, res.pool,
                                             cfg.sensitivity_fractions, cfg.seed);
      res.magnitude = magnitude_stats(res.pool);
      std::vector<scoring::ProfileVector> ps;
      for (const auto& e : res.pool.entries) ps.push_back(e.profile);
      res.joint_probability = joint_threshold_probability(ps);
    }
  }
  res.total_seconds = detail::seconds_since(t_start);
  return res;
}

// ---- CSV tables -------------------------------------------------------

inline std::string history_csv(const neural::TrainHistory& h) {
  std::string out = "epoch,train_loss,train_accuracy,val_loss,val_accuracy,best\n";
  for (std::size_t i = 0; i < h.epochs.size(); ++i) {
    const auto& e = h.epochs[i];
    out += std::to_string(e.epoch) + "," + data::format_double(e.train_loss) + "," + data::format_double(e.train_accuracy) +
           "," + data::format_double(e.val_loss) + "," + data::format_double(e.val_accuracy) + "," +
           (static_cast<int>(i) == h.best_epoch ? "1" : "0") + "\n";
  }
  return out;
}

inline std::string degradation_csv(const DegradationReport& r) {
  std::string out = "level,blur_sigma,noise_sigma,count,mean_u,sd_u,n_VL,n_L,n_M,n_H,n_VH\n";
  for (const auto& row : r.rows) {
    out += std::to_string(row.level) + "," + data::format_double(row.corruption.blur_sigma) + "," +
           data::format_double(row.corruption.noise_sigma) + "," + std::to_string(row.count) + "," +
           data::format_double(row.mean_u) + "," + data::format_double(row.sd_u);
    for (int n : row.histogram) out += "," + std::to_string(n);
    out += "\n";
  }
  out += "# spearman(level, mean_u) = " + data::format_double(r.spearman) + "\n";
  return out;
}

inline std::string probe_csv(const std::vector<ProbeRepeat>& rows) {
  std::string out = "repeat,seed,curated_accuracy,curated_auc,control_accuracy,control_auc\n";
  for (const auto& r : rows)
    out += std::to_string(r.repeat) + "," + std::to_string(r.seed) + "," + data::format_double(r.curated_accuracy) + "," +
           data::format_double(r.curated_auc) + "," + data::format_double(r.control_accuracy) + "," +
           data::format_double(r.control_auc) + "\n";
  return out;
}

inline std::string sensitivity_baselines_csv(const SensitivityReport& r, pfm::PfmConfig config) {
  std::string out = "fraction,key,count";
  for (const auto& n : pfm::map_names(config)) out += ",c_" + n;
  out += "\n";
  for (std::size_t f = 0; f < r.fractions.size(); ++f)
    for (const auto& [key, v] : r.baselines[f].profiles) {
      out += data::format_double(r.fractions[f]) + "," + key + "," + std::to_string(r.baselines[f].counts.at(key));
      for (double c : v) out += "," + data::format_double(c);
      out += "\n";
    }
  return out;
}

inline std::string sensitivity_cosines_csv(const SensitivityReport& r) {
  std::string out = "key,fraction_i,fraction_j,cosine\n";
  for (const auto& c : r.cosines)
    out += c.key + "," + data::format_double(r.fractions[c.i]) + "," + data::format_double(r.fractions[c.j]) + "," +
           data::format_double(c.cosine) + "\n";
  return out;
}

inline std::string sensitivity_agreement_csv(const SensitivityReport& r) {
  std::string out = "fraction,vh_agreement\n";
  for (std::size_t f = 0; f < r.fractions.size(); ++f)
    out += data::format_double(r.fractions[f]) + "," + data::format_double(r.agreement[f]) + "\n";
  return out;
}

inline std::string magnitude_csv(const MagnitudeReport& m, pfm::PfmConfig config) {
  std::string out = "group,count,min,q1,median,q3,max\n";
  auto row = [&](const std::string& g, const Summary& s) {
    out += g + "," + std::to_string(s.count) + "," + data::format_double(s.min) + "," + data::format_double(s.q1) + "," +
           data::format_double(s.median) + "," + data::format_double(s.q3) + "," + data::format_double(s.max) + "\n";
  };
  for (const auto& [level, s] : m.by_level) row(std::string("norm_") + scoring::to_string(level), s);
  for (int i = 0; i < 4; ++i)
    if (m.vh_components[i]) row("VH_abs_" + pfm::map_names(config)[i], *m.vh_components[i]);
  for (const auto& note : m.notes) out += "# " + note + "\n";
  return out;
}

inline std::string joint_threshold_csv(const std::vector<double>& probs,
                                       const std::vector<double>& thresholds = default_joint_thresholds()) {
  std::string out = "threshold,probability\n";
  for (std::size_t i = 0; i < probs.size(); ++i)
    out += data::format_double(thresholds[i]) + "," + data::format_double(probs[i]) + "\n";
  return out;
}

inline std::string id_set_csv(const std::vector<std::string>& curated, const std::vector<std::string>& control,
                              const std::vector<std::string>& corrupted) {
  std::set<std::string> bad(corrupted.begin(), corrupted.end());
  std::string out = "set,id,corrupted\n";
  for (const auto& id : curated) out += "curated," + id + "," + (bad.count(id) ? "1" : "0") + "\n";
  for (const auto& id : control) out += "control," + id + "," + (bad.count(id) ? "1" : "0") + "\n";
  return out;
}

// Writes every table of the study plus model, baseline and run manifest.
inline void write_toy_study(const ToyStudyResult& r, const ToyStudyConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const char* name, const std::string& text) { data::write_text_file((dir / name).string(), text); };
  data::save_model(r.model, dir / "model.json");
  data::save_baseline(r.baseline, dir / "baseline.json");
  put("history.csv", history_csv(r.history));
  if (r.degradation) put("degradation.csv", degradation_csv(*r.degradation));
  if (!r.pool.entries.empty()) {
    std::vector<scoring::ScoredImage> rows;
    for (const auto& e : r.pool.entries)
      rows.push_back({e.id, e.class_key, {r.pool.config, e.profile}, {e.u, e.level}});
    put("pool_scores.csv", data::format_score_report(rows, r.pool.config));
  }
  if (!r.probe.empty()) {
    put("probe.csv", probe_csv(r.probe));
    put("probe_sets.csv", id_set_csv(r.curated, r.control, r.pool_corrupted));
  }
  if (r.sensitivity) {
    put("sensitivity_baselines.csv", sensitivity_baselines_csv(*r.sensitivity, pfm::PfmConfig::Color));
    put("sensitivity_cosines.csv", sensitivity_cosines_csv(*r.sensitivity));
    put("sensitivity_agreement.csv", sensitivity_agreement_csv(*r.sensitivity));
  }
  if (r.magnitude) put("magnitude.csv", magnitude_csv(*r.magnitude, pfm::PfmConfig::Color));
  if (!r.joint_probability.empty()) put("joint_threshold.csv", joint_threshold_csv(r.joint_probability));

  RunManifest rm;
  rm.seed = cfg.seed;
  rm.config = cfg.to_json();
  rm.config["study"] = "toy";
  rm.write(dir / "run_manifest.json");
}

}  // namespace ius::harness
