#pragma once

// Sweep configuration file: INI-style sections of `key = value` lines.
//
//   [data]          ame2016, ame2020, z_min, n_min
//   [split]         ratio, seed
//   [augmentation]  levels, noise_seed
//   [training]      architectures, seeds, optimizers, activations,
//                   learning_rate, beta1, beta2, epsilon, rmsprop_decay,
//                   input_standardize, target_standardize
//   [output]        dir, jobs
//
// Lists are comma separated. `architectures = paper` selects the ten preset
// architectures; otherwise each entry is `widths:epochs:batch`, e.g.
// `32-16-8:3500:64`. Seeds accept ranges such as `1..10`. Every randomness
// source is an explicit key; split.seed and augmentation.noise_seed are
// required.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "errors.hpp"
#include "experiment.hpp"

namespace nucaug {

struct RunConfig {
  std::filesystem::path ame2016;
  std::filesystem::path ame2020;
  int z_min = 8;
  int n_min = 8;
  double split_ratio = 0.7;
  std::uint64_t split_seed = 0;
  std::uint64_t noise_seed = 0;
  SweepAxes axes;
  std::filesystem::path output_dir = "out";
  unsigned jobs = 1;
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  for (auto part : split_commas(text)) {
    const auto t = trim(part);
    if (!t.empty()) items.emplace_back(t);
  }
  return items;
}

inline std::uint64_t parse_u64(std::string_view text, const std::string& key) {
  const auto t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
    throw ConfigError(key + ": expected a non-negative integer, got '" + std::string(text) + "'");
  return v;
}

inline int parse_int(std::string_view text, const std::string& key) {
  const auto t = trim(text);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
    throw ConfigError(key + ": expected an integer, got '" + std::string(text) + "'");
  return v;
}

inline double parse_double(std::string_view text, const std::string& key) {
  const auto t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
    throw ConfigError(key + ": expected a number, got '" + std::string(text) + "'");
  return v;
}

inline bool parse_bool(std::string_view text, const std::string& key) {
  const auto t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + std::string(text) + "'");
}

inline std::vector<std::uint64_t> parse_seed_list(const std::string& text, const std::string& key) {
  std::vector<std::uint64_t> seeds;
  for (const auto& item : split_list(text)) {
    if (const auto dots = item.find(".."); dots != std::string::npos) {
      const auto lo = parse_u64(std::string_view(item).substr(0, dots), key);
      const auto hi = parse_u64(std::string_view(item).substr(dots + 2), key);
      if (hi < lo) throw ConfigError(key + ": empty range '" + item + "'");
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      seeds.push_back(parse_u64(item, key));
    }
  }
  return seeds;
}

inline std::vector<ArchitectureSchedule> parse_architectures(const std::string& text, const std::string& key) {
  if (trim(text) == "paper") return paper_architectures();
  std::vector<ArchitectureSchedule> out;
  for (const auto& item : split_list(text)) {
    const auto c1 = item.find(':');
    const auto c2 = c1 == std::string::npos ? std::string::npos : item.find(':', c1 + 1);
    if (c2 == std::string::npos) throw ConfigError(key + ": expected widths:epochs:batch, got '" + item + "'");
    ArchitectureSchedule a;
    a.hidden_widths = parse_arch(item.substr(0, c1));
    a.epochs = parse_int(std::string_view(item).substr(c1 + 1, c2 - c1 - 1), key);
    a.batch_size = parse_int(std::string_view(item).substr(c2 + 1), key);
    if (a.epochs < 1 || a.batch_size < 1) throw ConfigError(key + ": epochs and batch must be >= 1 in '" + item + "'");
    out.push_back(a);
  }
  return out;
}

}  // namespace detail

// Parses and validates a configuration. Relative paths are resolved against
// `base_dir`. Unknown sections or keys are errors naming the key.
inline RunConfig parse_run_config(std::istream& is, const std::filesystem::path& base_dir = {}) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }

  static const std::map<std::string, std::set<std::string>> allowed = {
      {"data", {"ame2016", "ame2020", "z_min", "n_min"}},
      {"split", {"ratio", "seed"}},
      {"augmentation", {"levels", "noise_seed"}},
      {"training",
       {"architectures", "seeds", "optimizers", "activations", "learning_rate", "beta1", "beta2", "epsilon",
        "rmsprop_decay", "input_standardize", "target_standardize"}},
      {"output", {"dir", "jobs"}},
  };
  for (const auto& [section, body] : tree) {
    const auto it = allowed.find(section);
    if (it == allowed.end()) {
      if (body.empty()) throw ConfigError("unknown key '" + section + "' outside any section");
      throw ConfigError("unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body)
      if (!it->second.contains(key)) throw ConfigError("unknown key '" + section + "." + key + "'");
  }

  auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) return *v;
    return std::nullopt;
  };
  auto require = [&](const std::string& path) {
    auto v = get(path);
    if (!v || detail::trim(*v).empty()) throw ConfigError("missing required key '" + path + "'");
    return *v;
  };
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };

  RunConfig cfg;
  cfg.ame2016 = resolve(require("data.ame2016"));
  if (auto v = get("data.ame2020")) cfg.ame2020 = resolve(*v);
  if (auto v = get("data.z_min")) cfg.z_min = detail::parse_int(*v, "data.z_min");
  if (auto v = get("data.n_min")) cfg.n_min = detail::parse_int(*v, "data.n_min");

  if (auto v = get("split.ratio")) cfg.split_ratio = detail::parse_double(*v, "split.ratio");
  if (!(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0)) throw ConfigError("split.ratio must lie in (0, 1)");
  cfg.split_seed = detail::parse_u64(require("split.seed"), "split.seed");

  cfg.noise_seed = detail::parse_u64(require("augmentation.noise_seed"), "augmentation.noise_seed");
  for (const auto& item : detail::split_list(require("augmentation.levels"))) {
    try {
      cfg.axes.levels.push_back(level_from_string(item));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("augmentation.levels: ") + e.what());
    }
  }

  cfg.axes.architectures = detail::parse_architectures(require("training.architectures"), "training.architectures");
  cfg.axes.seeds = detail::parse_seed_list(require("training.seeds"), "training.seeds");
  if (cfg.axes.seeds.empty()) throw ConfigError("training.seeds must not be empty");

  OptimizerConfig base;
  if (auto v = get("training.learning_rate")) base.learning_rate = detail::parse_double(*v, "training.learning_rate");
  if (auto v = get("training.beta1")) base.beta1 = detail::parse_double(*v, "training.beta1");
  if (auto v = get("training.beta2")) base.beta2 = detail::parse_double(*v, "training.beta2");
  if (auto v = get("training.epsilon")) base.epsilon = detail::parse_double(*v, "training.epsilon");
  if (auto v = get("training.rmsprop_decay")) base.rmsprop_decay = detail::parse_double(*v, "training.rmsprop_decay");
  try {
    base.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("training: ") + e.what());
  }
  cfg.axes.optimizers.clear();
  for (const auto& name : detail::split_list(get("training.optimizers").value_or("adam"))) {
    auto opt = base;
    try {
      opt.algorithm = algorithm_from_string(name);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("training.optimizers: ") + e.what());
    }
    cfg.axes.optimizers.push_back(opt);
  }
  cfg.axes.activations.clear();
  for (const auto& name : detail::split_list(get("training.activations").value_or("relu"))) {
    try {
      cfg.axes.activations.push_back(activation_from_string(name));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("training.activations: ") + e.what());
    }
  }
  if (auto v = get("training.input_standardize"))
    cfg.axes.input_standardize = detail::parse_bool(*v, "training.input_standardize");
  if (auto v = get("training.target_standardize"))
    cfg.axes.target_standardize = detail::parse_bool(*v, "training.target_standardize");

  if (auto v = get("output.dir")) cfg.output_dir = resolve(*v);
  if (auto v = get("output.jobs")) {
    const int jobs = detail::parse_int(*v, "output.jobs");
    if (jobs < 1) throw ConfigError("output.jobs must be >= 1");
    cfg.jobs = static_cast<unsigned>(jobs);
  }
  cfg.axes.validate();
  return cfg;
}

}  // namespace nucaug
