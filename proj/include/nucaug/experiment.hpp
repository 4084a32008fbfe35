#pragma once

// Experiment sweeps: trials over (architecture x augmentation level x seed x
// optimizer x activation), rms evaluation on the fixed test and
// extrapolation sets, aggregation and result persistence.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "ame.hpp"
#include "augmentation.hpp"
#include "errors.hpp"
#include "network.hpp"
#include "optimizer.hpp"
#include "training.hpp"

namespace nucaug {

inline constexpr std::string_view kVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Metrics

inline double rms_error(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size()) throw ContractViolation("rms_error: length mismatch");
  if (predictions.empty()) throw ContractViolation("rms_error: empty input");
  return std::sqrt(loss_mse(predictions, targets));
}

// Percent improvement of `augmented` over `baseline`; negative when worse.
inline double pct_change(double baseline, double augmented) {
  if (!(baseline > 0.0)) throw DomainError("pct_change: baseline must be > 0");
  return 100.0 * (baseline - augmented) / baseline;
}

// ---------------------------------------------------------------------------
// Hashing (FNV-1a 64) for dataset checksums and trial keys.

inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::uint64_t checksum_records(const std::vector<NuclideRecord>& records) {
  std::ostringstream os;
  write_nuclide_csv(os, records);
  return fnv1a(os.str());
}

// ---------------------------------------------------------------------------
// Trial description

struct AugmentationLevel {
  Technique technique = Technique::none;
  int k = 0;

  static AugmentationLevel none() { return {Technique::none, 0}; }
  static AugmentationLevel error() { return {Technique::error, 0}; }
  static AugmentationLevel gaussian(int k) { return {Technique::gaussian, k}; }

  // Resample count used as the x axis of the figures: none = 0.
  int resamples() const { return technique == Technique::gaussian ? k : 0; }

  auto rank() const { return std::make_tuple(static_cast<int>(technique), k); }
  friend bool operator==(const AugmentationLevel&, const AugmentationLevel&) = default;
  friend bool operator<(const AugmentationLevel& a, const AugmentationLevel& b) { return a.rank() < b.rank(); }
};

inline std::string to_string(const AugmentationLevel& level) {
  return level.technique == Technique::gaussian ? "gaussian" + std::to_string(level.k) : to_string(level.technique);
}

// Accepts "none", "error", "gaussian<k>", "gaussian:<k>" and "gauss<k>".
inline AugmentationLevel level_from_string(std::string_view s) {
  if (s == "none") return AugmentationLevel::none();
  if (s == "error") return AugmentationLevel::error();
  for (std::string_view prefix : {"gaussian:", "gaussian", "gauss"}) {
    if (!s.starts_with(prefix)) continue;
    const auto tail = s.substr(prefix.size());
    int k = 0;
    const auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), k);
    if (!tail.empty() && ec == std::errc{} && ptr == tail.data() + tail.size() && k >= 1)
      return AugmentationLevel::gaussian(k);
    break;
  }
  throw ConfigError("unknown augmentation level '" + std::string(s) + "'");
}

struct TrialSpec {
  NetworkSpec architecture;
  AugmentationLevel augmentation;
  std::uint64_t seed = 0;  // drives both weight init and epoch shuffling
  OptimizerConfig optimizer;
  TrainConfig train_config;  // init/shuffle seeds are overwritten from `seed`

  TrainConfig effective_train_config() const {
    auto cfg = train_config;
    cfg.init_seed = seed;
    cfg.shuffle_seed = seed;
    return cfg;
  }

  void validate() const {
    architecture.validate();
    optimizer.validate();
    train_config.validate();
    if (augmentation.technique == Technique::gaussian && augmentation.k < 1)
      throw ConfigError("gaussian augmentation needs k >= 1");
  }

  // Every field that can change the trial outcome, in a fixed order.
  std::string canonical() const {
    std::ostringstream os;
    os << "arch=" << architecture.arch_string() << ";in=" << architecture.input_dim
       << ";out=" << architecture.output_dim << ";act=" << to_string(architecture.activation)
       << ";aug=" << to_string(augmentation) << ";seed=" << seed << ";opt=" << to_string(optimizer.algorithm)
       << ";lr=" << hex_real(optimizer.learning_rate) << ";b1=" << hex_real(optimizer.beta1)
       << ";b2=" << hex_real(optimizer.beta2) << ";eps=" << hex_real(optimizer.epsilon)
       << ";rho=" << hex_real(optimizer.rmsprop_decay) << ";epochs=" << train_config.epochs
       << ";batch=" << train_config.batch_size << ";stdin=" << train_config.input_standardize
       << ";stdout=" << train_config.target_standardize;
    return os.str();
  }
};

// Fixed data shared by every trial of a sweep.
struct ExperimentData {
  DatasetSplit split;
  std::vector<NuclideRecord> extrapolation;
  std::uint64_t noise_seed = 0;

  std::uint64_t fingerprint() const {
    std::ostringstream os;
    os << "split_seed=" << split.split_seed << ";ratio=" << hex_real(split.ratio) << ";noise_seed=" << noise_seed
       << ";train=" << hex64(checksum_records(split.train)) << ";test=" << hex64(checksum_records(split.test))
       << ";extrap=" << hex64(checksum_records(extrapolation));
    return fnv1a(os.str());
  }
};

inline std::string trial_key(const TrialSpec& spec, std::uint64_t data_fingerprint) {
  return hex64(fnv1a(spec.canonical(), data_fingerprint));
}

struct TrialResult {
  TrialSpec spec;
  double rms_test = std::numeric_limits<double>::quiet_NaN();                 // MeV
  std::optional<double> rms_extrapolation;                                     // MeV
  double final_train_loss = std::numeric_limits<double>::quiet_NaN();         // MeV^2
  double wall_time = 0.0;                                                      // s, not persisted
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

// Throws DataIntegrityError if any evaluation nucleus appears in the
// training rows.
inline void check_no_leak(const AugmentedTrainingSet& set, const std::vector<NuclideRecord>& test,
                          const std::vector<NuclideRecord>& extrapolation) {
  std::set<std::pair<int, int>> train_keys;
  for (const auto& r : set.rows) train_keys.emplace(r.z, r.a);
  for (const auto* eval : {&test, &extrapolation})
    for (const auto& r : *eval)
      if (train_keys.contains(r.key()))
        throw DataIntegrityError("evaluation nucleus Z=" + std::to_string(r.z) + " A=" + std::to_string(r.a) +
                                 " is present in the training rows");
}

inline std::vector<double> energies(const std::vector<NuclideRecord>& records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.be_total);
  return out;
}

// Trains on an already augmented set and evaluates against the original
// experimental energies. Divergence marks the trial failed.
inline TrialResult run_trial(const TrialSpec& spec, const AugmentedTrainingSet& train_set,
                             const std::vector<NuclideRecord>& test,
                             const std::vector<NuclideRecord>& extrapolation, Model* model_out = nullptr) {
  spec.validate();
  check_no_leak(train_set, test, extrapolation);
  TrialResult result;
  result.spec = spec;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    auto trained = train(spec.architecture, train_set, spec.effective_train_config(), spec.optimizer);
    result.final_train_loss = trained.loss_history.back();
    if (!test.empty()) result.rms_test = rms_error(trained.model.predict(test), energies(test));
    if (!extrapolation.empty())
      result.rms_extrapolation = rms_error(trained.model.predict(extrapolation), energies(extrapolation));
    const bool finite = std::isfinite(result.final_train_loss) && (test.empty() || std::isfinite(result.rms_test)) &&
                        (!result.rms_extrapolation || std::isfinite(*result.rms_extrapolation));
    if (!finite) result.status = "failed: non-finite prediction";
    if (model_out) *model_out = std::move(trained.model);
  } catch (const TrainingDiverged& e) {
    result.status = std::string("failed: diverged at ") + e.what();
  }
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

// Applies the trial's augmentation to the training split only.
inline TrialResult run_trial(const TrialSpec& spec, const ExperimentData& data) {
  const auto set = augment(data.split.train, spec.augmentation.technique, spec.augmentation.k, data.noise_seed);
  return run_trial(spec, set, data.split.test, data.extrapolation);
}

// ---------------------------------------------------------------------------
// Result table

struct GroupKey {
  std::string arch;
  AugmentationLevel level;
  Algorithm optimizer = Algorithm::adam;
  Activation activation = Activation::relu;

  auto tie() const { return std::make_tuple(arch, level.rank(), static_cast<int>(optimizer), static_cast<int>(activation)); }
  friend bool operator<(const GroupKey& a, const GroupKey& b) { return a.tie() < b.tie(); }
  friend bool operator==(const GroupKey& a, const GroupKey& b) { return a.tie() == b.tie(); }
};

inline GroupKey group_of(const TrialSpec& s) {
  return {s.architecture.arch_string(), s.augmentation, s.optimizer.algorithm, s.architecture.activation};
}

// Population statistics over the successful trials of one group.
struct GroupStats {
  std::size_t trials = 0;
  std::size_t failed = 0;
  double mean_test = std::numeric_limits<double>::quiet_NaN();
  double std_test = std::numeric_limits<double>::quiet_NaN();
  double mean_extrap = std::numeric_limits<double>::quiet_NaN();
  double std_extrap = std::numeric_limits<double>::quiet_NaN();
};

inline std::pair<double, double> mean_and_stddev(const std::vector<double>& xs) {
  if (xs.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

inline bool canonical_less(const TrialResult& a, const TrialResult& b) {
  const auto ka = group_of(a.spec), kb = group_of(b.spec);
  return std::make_tuple(ka.arch, ka.level.rank(), to_string(ka.optimizer), to_string(ka.activation), a.spec.seed) <
         std::make_tuple(kb.arch, kb.level.rank(), to_string(kb.optimizer), to_string(kb.activation), b.spec.seed);
}

struct ResultTable {
  std::vector<TrialResult> trials;

  void sort_canonical() { std::stable_sort(trials.begin(), trials.end(), canonical_less); }

  std::map<GroupKey, GroupStats> aggregate() const {
    std::map<GroupKey, std::pair<std::vector<double>, std::vector<double>>> values;
    std::map<GroupKey, GroupStats> stats;
    for (const auto& t : trials) {
      const auto key = group_of(t.spec);
      auto& st = stats[key];
      ++st.trials;
      auto& [test, extrap] = values[key];
      if (!t.ok()) {
        ++st.failed;
        continue;
      }
      test.push_back(t.rms_test);
      if (t.rms_extrapolation) extrap.push_back(*t.rms_extrapolation);
    }
    for (auto& [key, st] : stats) {
      const auto& [test, extrap] = values[key];
      std::tie(st.mean_test, st.std_test) = mean_and_stddev(test);
      std::tie(st.mean_extrap, st.std_extrap) = mean_and_stddev(extrap);
    }
    return stats;
  }

  std::size_t failed_count() const {
    return static_cast<std::size_t>(std::count_if(trials.begin(), trials.end(), [](const TrialResult& t) { return !t.ok(); }));
  }
};

// ---------------------------------------------------------------------------
// Sweep

struct ArchitectureSchedule {
  std::vector<int> hidden_widths;
  int epochs = 1;
  int batch_size = 32;
};

// The ten architectures with their epoch and batch settings.
inline std::vector<ArchitectureSchedule> paper_architectures() {
  return {
      {{128}, 4500, 32},           {{32, 32}, 6000, 64},        {{64, 16}, 4500, 32},
      {{32, 32, 8}, 5500, 32},     {{32, 16, 8}, 3500, 64},     {{64, 16, 8}, 4500, 32},
      {{32, 16, 8, 4}, 7000, 32},  {{32, 16, 16, 8}, 3500, 64}, {{32, 32, 8, 8}, 3500, 32},
      {{64, 16, 8, 4}, 5000, 64},
  };
}

struct SweepAxes {
  std::vector<ArchitectureSchedule> architectures;
  std::vector<AugmentationLevel> levels;
  std::vector<std::uint64_t> seeds;
  std::vector<OptimizerConfig> optimizers{OptimizerConfig{}};
  std::vector<Activation> activations{Activation::relu};
  bool input_standardize = true;
  bool target_standardize = true;

  void validate() const {
    if (architectures.empty() || levels.empty() || seeds.empty() || optimizers.empty() || activations.empty())
      throw ConfigError("sweep axes must be nonempty");
  }

  std::vector<TrialSpec> trials() const {
    validate();
    std::vector<TrialSpec> out;
    for (const auto& arch : architectures)
      for (const auto& level : levels)
        for (const auto& opt : optimizers)
          for (auto act : activations)
            for (auto seed : seeds) {
              TrialSpec t;
              t.architecture.hidden_widths = arch.hidden_widths;
              t.architecture.activation = act;
              t.augmentation = level;
              t.seed = seed;
              t.optimizer = opt;
              t.train_config.epochs = arch.epochs;
              t.train_config.batch_size = arch.batch_size;
              t.train_config.input_standardize = input_standardize;
              t.train_config.target_standardize = target_standardize;
              out.push_back(t);
            }
    return out;
  }
};

struct SweepOptions {
  unsigned jobs = 1;
  // Completed trials are cached here as one CSV row per trial key, so an
  // interrupted sweep resumes where it stopped. Empty disables caching.
  std::filesystem::path cache_dir;
  std::function<void(const TrialResult&, bool cached, std::size_t done, std::size_t total)> on_trial;
};

inline void write_result_row(std::ostream& os, const TrialResult& t);
inline std::vector<TrialResult> read_results_csv(std::istream& is);
inline constexpr std::string_view kResultsCsvHeader =
    "arch,augmentation,k,optimizer,activation,seed,rms_test_mev,rms_extrap_mev,final_train_loss,epochs,batch,status";

namespace detail {

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << content;
    if (!os.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// A cached row only carries what the CSV stores; the optimizer
// hyperparameters and standardization flags come from the spec that
// produced the key.
inline std::optional<TrialResult> load_cached(const std::filesystem::path& file, const TrialSpec& spec) {
  std::ifstream is(file);
  if (!is) return std::nullopt;
  try {
    auto rows = read_results_csv(is);
    if (rows.size() != 1) return std::nullopt;
    auto r = rows.front();
    r.spec = spec;
    return r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace detail

// Runs every trial (independently, possibly in parallel) and returns the
// canonically sorted table. Augmented sets are built once per level and
// shared read-only between workers.
inline ResultTable sweep(const std::vector<TrialSpec>& specs, const ExperimentData& data,
                         const SweepOptions& options = {}) {
  if (specs.empty()) throw ConfigError("sweep needs at least one trial");
  for (const auto& s : specs) s.validate();

  std::map<std::tuple<int, int>, AugmentedTrainingSet> sets;
  for (const auto& s : specs) {
    const auto key = s.augmentation.rank();
    if (!sets.contains(key))
      sets.emplace(key, augment(data.split.train, s.augmentation.technique, s.augmentation.k, data.noise_seed));
  }

  const auto fingerprint = data.fingerprint();
  if (!options.cache_dir.empty()) std::filesystem::create_directories(options.cache_dir);

  std::vector<TrialResult> results(specs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex report_mutex;
  std::exception_ptr first_error;

  auto worker = [&] {
    while (true) {
      const auto i = next.fetch_add(1);
      if (i >= specs.size()) return;
      try {
        const auto& spec = specs[i];
        std::filesystem::path cache_file;
        std::optional<TrialResult> cached;
        if (!options.cache_dir.empty()) {
          cache_file = options.cache_dir / (trial_key(spec, fingerprint) + ".csv");
          cached = detail::load_cached(cache_file, spec);
        }
        if (cached) {
          results[i] = *cached;
        } else {
          results[i] = run_trial(spec, sets.at(spec.augmentation.rank()), data.split.test, data.extrapolation);
          if (!cache_file.empty()) {
            std::ostringstream os;
            os << kResultsCsvHeader << '\n';
            write_result_row(os, results[i]);
            os << '\n';
            detail::write_file_atomic(cache_file, os.str());
          }
        }
        const auto count = ++done;
        if (options.on_trial) {
          std::lock_guard lock(report_mutex);
          options.on_trial(results[i], cached.has_value(), count, specs.size());
        }
      } catch (...) {
        std::lock_guard lock(report_mutex);
        if (!first_error) first_error = std::current_exception();
        next = specs.size();
        return;
      }
    }
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(specs.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  ResultTable table{std::move(results)};
  table.sort_canonical();
  return table;
}

inline ResultTable sweep(const SweepAxes& axes, const ExperimentData& data, const SweepOptions& options = {}) {
  return sweep(axes.trials(), data, options);
}

// ---------------------------------------------------------------------------
// Seed stability

struct SeedTrace {
  AugmentationLevel level;
  std::vector<std::uint64_t> seeds;
  std::vector<double> rms;  // per seed, same order as `seeds`
  double stddev = 0.0;      // population standard deviation over seeds
};

enum class Metric { test, extrapolation };

// Per-seed rms traces of one architecture (and optimizer/activation) for the
// requested levels. Every (level, seed) cell present for any level must be
// present for all; missing cells are reported together.
inline std::vector<SeedTrace> seed_stability(const ResultTable& table, const std::string& arch,
                                             const std::vector<AugmentationLevel>& levels,
                                             Metric metric = Metric::test, Algorithm optimizer = Algorithm::adam,
                                             Activation activation = Activation::relu) {
  std::set<std::uint64_t> all_seeds;
  std::map<std::pair<std::tuple<int, int>, std::uint64_t>, const TrialResult*> cells;
  for (const auto& t : table.trials) {
    const auto g = group_of(t.spec);
    if (g.arch != arch || g.optimizer != optimizer || g.activation != activation) continue;
    all_seeds.insert(t.spec.seed);
    cells[{g.level.rank(), t.spec.seed}] = &t;
  }
  std::vector<std::string> missing;
  if (all_seeds.empty()) missing.push_back(arch + " (no trials)");
  std::vector<SeedTrace> traces;
  for (const auto& level : levels) {
    SeedTrace trace;
    trace.level = level;
    for (auto seed : all_seeds) {
      const auto it = cells.find({level.rank(), seed});
      if (it == cells.end()) {
        missing.push_back(arch + "/" + to_string(level) + "/seed " + std::to_string(seed));
        continue;
      }
      const auto& t = *it->second;
      const double v = metric == Metric::test ? t.rms_test
                                              : t.rms_extrapolation.value_or(std::numeric_limits<double>::quiet_NaN());
      trace.seeds.push_back(seed);
      trace.rms.push_back(v);
    }
    trace.stddev = mean_and_stddev(trace.rms).second;
    traces.push_back(std::move(trace));
  }
  if (!missing.empty()) {
    std::string msg = "missing result cells:";
    for (const auto& m : missing) msg += " " + m;
    throw IncompleteDataError(msg);
  }
  return traces;
}

// ---------------------------------------------------------------------------
// Results CSV

inline std::string format_optional_real(std::optional<double> v) {
  return v ? format_real(*v) : std::string();
}

inline void write_result_row(std::ostream& os, const TrialResult& t) {
  const auto& s = t.spec;
  std::string status = t.status;
  std::replace(status.begin(), status.end(), ',', ';');
  std::replace(status.begin(), status.end(), '\n', ' ');
  os << s.architecture.arch_string() << ',' << to_string(s.augmentation.technique) << ',' << s.augmentation.k << ','
     << to_string(s.optimizer.algorithm) << ',' << to_string(s.architecture.activation) << ',' << s.seed << ','
     << format_real(t.rms_test) << ',' << format_optional_real(t.rms_extrapolation) << ','
     << format_real(t.final_train_loss) << ',' << s.train_config.epochs << ',' << s.train_config.batch_size << ','
     << status;
}

inline void write_results_csv(std::ostream& os, const ResultTable& table) {
  os << kResultsCsvHeader << '\n';
  for (const auto& t : table.trials) {
    write_result_row(os, t);
    os << '\n';
  }
}

inline std::vector<TrialResult> read_results_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError(1, "empty results CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultsCsvHeader) throw ParseError(1, "unexpected results header '" + line + "'");
  std::vector<TrialResult> rows;
  std::size_t line_no = 1;
  auto real_or_nan = [&](std::string_view cell, const char* name) {
    const auto t = detail::trim(cell);
    if (t == "nan" || t == "-nan") return std::numeric_limits<double>::quiet_NaN();
    return detail::parse_real_cell(cell, line_no, name);
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_commas(line);
    if (cells.size() != 12) throw ParseError(line_no, "expected 12 columns, found " + std::to_string(cells.size()));
    TrialResult t;
    try {
      t.spec.architecture.hidden_widths = parse_arch(cells[0]);
      t.spec.augmentation.technique = technique_from_string(cells[1]);
      t.spec.augmentation.k = detail::parse_int_field(cells[2], line_no, "k");
      t.spec.optimizer.algorithm = algorithm_from_string(cells[3]);
      t.spec.architecture.activation = activation_from_string(cells[4]);
    } catch (const ConfigError& e) {
      throw ParseError(line_no, e.what());
    }
    const auto seed_text = detail::trim(cells[5]);
    std::uint64_t seed = 0;
    const auto [ptr, ec] = std::from_chars(seed_text.data(), seed_text.data() + seed_text.size(), seed);
    if (seed_text.empty() || ec != std::errc{} || ptr != seed_text.data() + seed_text.size())
      throw ParseError(line_no, "bad seed");
    t.spec.seed = seed;
    t.rms_test = real_or_nan(cells[6], "rms_test_mev");
    if (!detail::trim(cells[7]).empty()) t.rms_extrapolation = real_or_nan(cells[7], "rms_extrap_mev");
    t.final_train_loss = real_or_nan(cells[8], "final_train_loss");
    t.spec.train_config.epochs = detail::parse_int_field(cells[9], line_no, "epochs");
    t.spec.train_config.batch_size = detail::parse_int_field(cells[10], line_no, "batch");
    t.status = std::string(cells[11]);
    rows.push_back(std::move(t));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Plot data: one row per (arch, optimizer, activation, resample count) with
// the mean, spread and every per-seed value.

inline void write_curve_csv(std::ostream& os, const ResultTable& table, Metric metric,
                            const std::function<bool(const TrialResult&)>& filter) {
  std::set<std::uint64_t> seeds;
  std::map<std::tuple<std::string, std::string, std::string, int>, std::map<std::uint64_t, double>> cells;
  for (const auto& t : table.trials) {
    if (t.spec.augmentation.technique == Technique::error) continue;
    if (filter && !filter(t)) continue;
    const double v = !t.ok() ? std::numeric_limits<double>::quiet_NaN()
                     : metric == Metric::test
                         ? t.rms_test
                         : t.rms_extrapolation.value_or(std::numeric_limits<double>::quiet_NaN());
    seeds.insert(t.spec.seed);
    cells[{t.spec.architecture.arch_string(), to_string(t.spec.optimizer.algorithm),
           to_string(t.spec.architecture.activation), t.spec.augmentation.resamples()}][t.spec.seed] = v;
  }
  os << "arch,optimizer,activation,k,n_seeds,mean_rms_mev,std_rms_mev";
  for (auto s : seeds) os << ",seed_" << s;
  os << '\n';
  for (const auto& [key, by_seed] : cells) {
    std::vector<double> ok;
    for (const auto& [seed, v] : by_seed)
      if (std::isfinite(v)) ok.push_back(v);
    const auto [mean, sd] = mean_and_stddev(ok);
    os << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ',' << std::get<3>(key) << ','
       << ok.size() << ',' << format_real(mean) << ',' << format_real(sd);
    for (auto s : seeds) {
      os << ',';
      if (const auto it = by_seed.find(s); it != by_seed.end()) os << format_real(it->second);
    }
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// Manifest: ordered [section] / key = value text.

class Manifest {
 public:
  void set(const std::string& section, const std::string& key, const std::string& value) {
    auto it = std::find_if(sections_.begin(), sections_.end(), [&](const auto& s) { return s.first == section; });
    if (it == sections_.end()) {
      sections_.push_back({section, {}});
      it = std::prev(sections_.end());
    }
    for (auto& kv : it->second)
      if (kv.first == key) {
        kv.second = value;
        return;
      }
    it->second.emplace_back(key, value);
  }

  template <typename T>
    requires std::is_arithmetic_v<T>
  void set(const std::string& section, const std::string& key, T value) {
    if constexpr (std::is_floating_point_v<T>)
      set(section, key, format_real(value));
    else
      set(section, key, std::to_string(value));
  }

  std::string str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < sections_.size(); ++i) {
      if (i) os << '\n';
      os << '[' << sections_[i].first << "]\n";
      for (const auto& [k, v] : sections_[i].second) os << k << " = " << v << '\n';
    }
    return os.str();
  }

 private:
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> sections_;
};

}  // namespace nucaug
