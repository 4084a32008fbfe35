#pragma once

// End-to-end data preparation shared by the CLI and the acceptance suite:
// read both AME editions, filter, split, derive the extrapolation set, and
// describe the run in a manifest.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ame.hpp"
#include "augmentation.hpp"
#include "config.hpp"
#include "experiment.hpp"

namespace nucaug {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

struct EditionData {
  std::filesystem::path path;
  std::uint64_t checksum = 0;  // FNV-1a of the raw file bytes
  std::vector<NuclideRecord> parsed;
  std::vector<NuclideRecord> filtered;
};

inline EditionData load_edition(const std::filesystem::path& path, AmeEdition edition, int z_min, int n_min) {
  EditionData d;
  d.path = path;
  const auto content = read_file(path);
  d.checksum = fnv1a(content);
  d.parsed = parse_mass_table(content, edition);
  d.filtered = filter_experimental(d.parsed, z_min, n_min);
  return d;
}

struct PreparedData {
  EditionData ame2016;
  std::optional<EditionData> ame2020;
  ExperimentData experiment;
};

inline PreparedData prepare_data(const RunConfig& cfg) {
  PreparedData p;
  p.ame2016 = load_edition(cfg.ame2016, AmeEdition::ame2016, cfg.z_min, cfg.n_min);
  p.experiment.split = split_dataset(p.ame2016.filtered, cfg.split_ratio, cfg.split_seed);
  p.experiment.noise_seed = cfg.noise_seed;
  if (!cfg.ame2020.empty()) {
    p.ame2020 = load_edition(cfg.ame2020, AmeEdition::ame2020, cfg.z_min, cfg.n_min);
    p.experiment.extrapolation = diff_new_nuclei(p.ame2016.filtered, p.ame2020->filtered);
  }
  return p;
}

inline Manifest build_manifest(const RunConfig& cfg, const PreparedData& data, const ResultTable* table = nullptr) {
  Manifest m;
  m.set("software", "name", "nucaug");
  m.set("software", "version", std::string(kVersion));
  m.set("software", "model_format", kModelFormatVersion);
  m.set("software", "rng", "splitmix64 counter streams; box-muller normals");

  m.set("data", "ame2016", cfg.ame2016.string());
  m.set("data", "ame2016_fnv1a", hex64(data.ame2016.checksum));
  m.set("data", "ame2016_records", data.ame2016.parsed.size());
  m.set("data", "ame2016_filtered", data.ame2016.filtered.size());
  if (data.ame2020) {
    m.set("data", "ame2020", cfg.ame2020.string());
    m.set("data", "ame2020_fnv1a", hex64(data.ame2020->checksum));
    m.set("data", "ame2020_records", data.ame2020->parsed.size());
    m.set("data", "ame2020_filtered", data.ame2020->filtered.size());
    m.set("data", "extrapolation_nuclei", data.experiment.extrapolation.size());
  }
  m.set("data", "z_min", cfg.z_min);
  m.set("data", "n_min", cfg.n_min);

  const auto& split = data.experiment.split;
  m.set("split", "ratio", cfg.split_ratio);
  m.set("split", "seed", cfg.split_seed);
  m.set("split", "train", split.train.size());
  m.set("split", "test", split.test.size());
  m.set("split", "train_fnv1a", hex64(checksum_records(split.train)));
  m.set("split", "test_fnv1a", hex64(checksum_records(split.test)));
  m.set("split", "train_zero_uncertainty", count_zero_uncertainty(split.train));

  m.set("augmentation", "noise_seed", cfg.noise_seed);
  std::string levels;
  for (const auto& level : cfg.axes.levels) {
    if (!levels.empty()) levels += ", ";
    levels += to_string(level);
    const auto rows = level.technique == Technique::error
                          ? error_resample(split.train).rows.size()
                          : split.train.size() * static_cast<std::size_t>(1 + level.resamples());
    m.set("augmentation", "rows_" + to_string(level), rows);
  }
  m.set("augmentation", "levels", levels);

  std::string archs;
  for (const auto& a : cfg.axes.architectures) {
    if (!archs.empty()) archs += ", ";
    NetworkSpec spec;
    spec.hidden_widths = a.hidden_widths;
    archs += spec.arch_string() + ":" + std::to_string(a.epochs) + ":" + std::to_string(a.batch_size);
  }
  m.set("training", "architectures", archs);
  std::string seeds;
  for (auto s : cfg.axes.seeds) seeds += (seeds.empty() ? "" : ", ") + std::to_string(s);
  m.set("training", "seeds", seeds);
  m.set("training", "seed_use", "init_seed = shuffle_seed = trial seed");
  std::string opts;
  for (const auto& o : cfg.axes.optimizers) opts += (opts.empty() ? "" : ", ") + to_string(o.algorithm);
  m.set("training", "optimizers", opts);
  const auto& o = cfg.axes.optimizers.front();
  m.set("training", "learning_rate", o.learning_rate);
  m.set("training", "beta1", o.beta1);
  m.set("training", "beta2", o.beta2);
  m.set("training", "epsilon", o.epsilon);
  m.set("training", "rmsprop_decay", o.rmsprop_decay);
  std::string acts;
  for (auto a : cfg.axes.activations) acts += (acts.empty() ? "" : ", ") + to_string(a);
  m.set("training", "activations", acts);
  m.set("training", "input_standardize", cfg.axes.input_standardize ? "true" : "false");
  m.set("training", "target_standardize", cfg.axes.target_standardize ? "true" : "false");
  m.set("training", "loss", "mse, batch mean");
  m.set("training", "init", "glorot normal, zero bias");

  m.set("trials", "data_fingerprint", hex64(data.experiment.fingerprint()));
  if (table) {
    m.set("trials", "count", table->trials.size());
    m.set("trials", "failed", table->failed_count());
  }
  return m;
}

}  // namespace nucaug
