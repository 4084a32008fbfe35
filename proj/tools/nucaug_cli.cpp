// nucaug command-line driver.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error,
// 3 sweep finished but some trials failed.

#include <CLI11.hpp>

#include <nucaug/nucaug.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace nucaug;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kTrialFailures = 3 };

struct GlobalOptions {
  std::string out_dir;
  unsigned jobs = 1;
  bool jobs_set = false;
};

void write_text_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  detail::write_file_atomic(path, text);
}

std::vector<NuclideRecord> read_nuclides(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open '" + path.string() + "'");
  return read_nuclide_csv(is);
}

// Accepts either a nuclide CSV or an augmented CSV.
AugmentedTrainingSet read_training_set(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open '" + path.string() + "'");
  std::string header;
  std::getline(is, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  is.clear();
  is.seekg(0);
  if (header.ends_with(",origin")) return training_set_from_rows(read_augmented_csv(is));
  return no_augmentation(read_nuclide_csv(is));
}

std::string nuclides_csv(const std::vector<NuclideRecord>& records) {
  std::ostringstream os;
  write_nuclide_csv(os, records);
  return os.str();
}

fs::path with_suffix(const fs::path& base, const std::string& suffix) {
  auto p = base;
  const auto ext = p.extension().string();
  return p.replace_filename(p.stem().string() + suffix + ext);
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string ame_path;
  std::string edition = "AME2016";
  std::string out_csv;
  int z_min = 8;
  int n_min = 8;
  bool all = false;
  std::string diff_csv;
  std::string diff_out;
  double split_ratio = 0.0;
  std::uint64_t split_seed = 0;
  bool split_seed_set = false;
};

int cmd_ingest(const IngestArgs& args, const GlobalOptions& global) {
  const auto edition = edition_from_string(args.edition);
  const auto content = read_file(args.ame_path);
  const auto records = parse_mass_table(content, edition);
  const auto filtered = filter_experimental(records, args.z_min, args.n_min);
  std::cout << "edition: " << to_string(edition) << '\n';
  std::cout << "records: " << records.size() << '\n';
  std::cout << "filtered: " << filtered.size() << '\n';
  std::cout << "zero_uncertainty: " << count_zero_uncertainty(filtered) << '\n';

  fs::path out = args.out_csv;
  if (out.empty() && !global.out_dir.empty())
    out = fs::path(global.out_dir) / (args.edition + (args.all ? "_all.csv" : "_filtered.csv"));
  if (!out.empty()) {
    write_text_atomic(out, nuclides_csv(args.all ? records : filtered));
    std::cout << "wrote: " << out.string() << '\n';
  }

  if (!args.diff_csv.empty()) {
    const auto old_records = filter_experimental(read_nuclides(args.diff_csv), args.z_min, args.n_min);
    const auto fresh = diff_new_nuclei(old_records, filtered);
    std::cout << "new: " << fresh.size() << '\n';
    fs::path diff_out = args.diff_out;
    if (diff_out.empty() && !out.empty()) diff_out = with_suffix(out, "_new");
    if (!diff_out.empty()) {
      write_text_atomic(diff_out, nuclides_csv(fresh));
      std::cout << "wrote: " << diff_out.string() << '\n';
    }
  }

  if (args.split_ratio != 0.0) {
    if (!args.split_seed_set) throw ConfigError("--split requires --split-seed");
    if (out.empty()) throw ConfigError("--split requires an output path (--out-csv or --out)");
    const auto split = split_dataset(filtered, args.split_ratio, args.split_seed);
    write_text_atomic(with_suffix(out, "_train"), nuclides_csv(split.train));
    write_text_atomic(with_suffix(out, "_test"), nuclides_csv(split.test));
    std::cout << "train: " << split.train.size() << '\n' << "test: " << split.test.size() << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct AugmentArgs {
  std::string in_csv;
  std::string out_csv;
  std::string technique = "gaussian";
  int k = 1;
  std::uint64_t noise_seed = 0;
  bool noise_seed_set = false;
};

int cmd_augment(const AugmentArgs& args, const GlobalOptions& global) {
  const auto technique = technique_from_string(args.technique);
  if (technique == Technique::gaussian && !args.noise_seed_set)
    throw ConfigError("gaussian augmentation requires --noise-seed (or --seed)");
  const auto train = read_nuclides(args.in_csv);
  const auto set = augment(train, technique, args.k, args.noise_seed);
  fs::path out = args.out_csv;
  if (out.empty()) out = fs::path(global.out_dir.empty() ? "." : global.out_dir) / "augmented.csv";
  std::ostringstream os;
  write_augmented_csv(os, set);
  write_text_atomic(out, os.str());
  auto manifest = out;
  manifest += ".manifest";
  write_text_atomic(manifest, augmentation_manifest_line(set) + "\n");
  std::cout << augmentation_manifest_line(set) << '\n' << "wrote: " << out.string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string data_csv;
  std::string model_path;
  std::string arch = "32-32";
  std::string activation = "relu";
  std::string optimizer = "adam";
  int epochs = 6000;
  int batch = 64;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double epsilon = 1e-8;
  double rmsprop_decay = 0.9;
  bool raw_inputs = false;
  bool raw_targets = false;
  std::string loss_csv;
};

int cmd_train(const TrainArgs& args, const GlobalOptions& global) {
  if (!args.seed_set) throw ConfigError("train requires --seed");
  NetworkSpec spec;
  spec.hidden_widths = parse_arch(args.arch);
  spec.activation = activation_from_string(args.activation);
  TrainConfig tc;
  tc.epochs = args.epochs;
  tc.batch_size = args.batch;
  tc.init_seed = args.seed;
  tc.shuffle_seed = args.seed;
  tc.input_standardize = !args.raw_inputs;
  tc.target_standardize = !args.raw_targets;
  OptimizerConfig opt;
  opt.algorithm = algorithm_from_string(args.optimizer);
  opt.learning_rate = args.learning_rate;
  opt.beta1 = args.beta1;
  opt.beta2 = args.beta2;
  opt.epsilon = args.epsilon;
  opt.rmsprop_decay = args.rmsprop_decay;

  const auto set = read_training_set(args.data_csv);
  const auto result = train(spec, set, tc, opt);

  fs::path model_path = args.model_path;
  if (model_path.empty()) model_path = fs::path(global.out_dir.empty() ? "." : global.out_dir) / "model.txt";
  std::ostringstream os;
  save_model(os, result.model);
  write_text_atomic(model_path, os.str());
  if (!args.loss_csv.empty()) {
    std::ostringstream ls;
    ls << "epoch,train_loss_mev2\n";
    for (std::size_t e = 0; e < result.loss_history.size(); ++e)
      ls << e + 1 << ',' << format_real(result.loss_history[e]) << '\n';
    write_text_atomic(args.loss_csv, ls.str());
  }
  std::cout << "rows: " << set.rows.size() << '\n'
            << "steps: " << result.steps << '\n'
            << "final_train_loss: " << format_real(result.loss_history.back()) << '\n'
            << "wrote: " << model_path.string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string model_path;
  std::string data_csv;
  std::string predictions_csv;
};

int cmd_evaluate(const EvaluateArgs& args, const GlobalOptions&) {
  std::ifstream is(args.model_path);
  if (!is) throw ConfigError("cannot open '" + args.model_path + "'");
  const auto model = load_model(is);
  const auto records = read_nuclides(args.data_csv);
  if (records.empty()) throw DataIntegrityError("evaluation set is empty");
  const auto predictions = model.predict(records);
  std::cout << "nuclei: " << records.size() << '\n'
            << "rms_mev: " << format_real(rms_error(predictions, energies(records))) << '\n';
  if (!args.predictions_csv.empty()) {
    std::ostringstream os;
    os << "z,n,a,be_total_mev,predicted_mev,residual_mev\n";
    for (std::size_t i = 0; i < records.size(); ++i)
      os << records[i].z << ',' << records[i].n << ',' << records[i].a << ',' << format_real(records[i].be_total)
         << ',' << format_real(predictions[i]) << ',' << format_real(records[i].be_total - predictions[i]) << '\n';
    write_text_atomic(args.predictions_csv, os.str());
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string config_path;
  bool quiet = false;
};

void write_plot_files(const fs::path& dir, const ResultTable& table) {
  auto write = [&](const std::string& name, Metric metric, const std::function<bool(const TrialResult&)>& f) {
    std::ostringstream os;
    write_curve_csv(os, table, metric, f);
    write_text_atomic(dir / name, os.str());
  };
  auto adam_relu = [](const TrialResult& t) {
    return t.spec.optimizer.algorithm == Algorithm::adam && t.spec.architecture.activation == Activation::relu;
  };
  auto relu = [](const TrialResult& t) { return t.spec.architecture.activation == Activation::relu; };
  auto adam = [](const TrialResult& t) { return t.spec.optimizer.algorithm == Algorithm::adam; };
  write("curves_test.csv", Metric::test, adam_relu);
  write("curves_extrapolation.csv", Metric::extrapolation, adam_relu);
  write("optimizers_test.csv", Metric::test, relu);
  write("optimizers_extrapolation.csv", Metric::extrapolation, relu);
  write("activations_test.csv", Metric::test, adam);
  write("activations_extrapolation.csv", Metric::extrapolation, adam);
}

int cmd_sweep(const SweepArgs& args, const GlobalOptions& global) {
  std::ifstream is(args.config_path);
  if (!is) throw ConfigError("cannot open config '" + args.config_path + "'");
  auto cfg = parse_run_config(is, fs::path(args.config_path).parent_path());
  if (!global.out_dir.empty()) cfg.output_dir = global.out_dir;
  if (global.jobs_set) cfg.jobs = global.jobs;

  const auto data = prepare_data(cfg);
  fs::create_directories(cfg.output_dir);
  const auto specs = cfg.axes.trials();
  std::cerr << "trials: " << specs.size() << " (train " << data.experiment.split.train.size() << ", test "
            << data.experiment.split.test.size() << ", extrapolation " << data.experiment.extrapolation.size()
            << ")\n";

  SweepOptions options;
  options.jobs = cfg.jobs;
  options.cache_dir = cfg.output_dir / "trials";
  if (!args.quiet) {
    options.on_trial = [](const TrialResult& t, bool cached, std::size_t done, std::size_t total) {
      std::cerr << "[" << done << "/" << total << "] " << t.spec.architecture.arch_string() << ' '
                << to_string(t.spec.augmentation) << ' ' << to_string(t.spec.optimizer.algorithm) << ' '
                << to_string(t.spec.architecture.activation) << " seed " << t.spec.seed << ": ";
      if (t.ok())
        std::cerr << "rms_test " << std::fixed << std::setprecision(3) << t.rms_test << std::defaultfloat;
      else
        std::cerr << t.status;
      std::cerr << (cached ? " (cached)" : "") << '\n';
    };
  }
  const auto table = sweep(specs, data.experiment, options);

  std::ostringstream results;
  write_results_csv(results, table);
  write_text_atomic(cfg.output_dir / "results.csv", results.str());
  write_text_atomic(cfg.output_dir / "manifest.ini", build_manifest(cfg, data, &table).str());
  write_plot_files(cfg.output_dir / "plots", table);
  std::cout << "trials: " << table.trials.size() << '\n'
            << "failed: " << table.failed_count() << '\n'
            << "wrote: " << (cfg.output_dir / "results.csv").string() << '\n';
  return table.failed_count() > 0 ? kTrialFailures : kOk;
}

// ---------------------------------------------------------------------------

struct ReportArgs {
  std::string results_csv;
  std::string figure;
  std::string nuclides_csv;
  std::string nuclide = "82,208";
  int k = 5;
  std::uint64_t noise_seed = 0;
  bool noise_seed_set = false;
  std::string arch = "32-16-8";
};

const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids = {"table1", "table2", "table3", "fig2", "fig3",
                                               "fig4",   "fig5",   "fig6",   "fig7", "fig8"};
  return ids;
}

std::string fixed3(double v) {
  if (!std::isfinite(v)) return "nan";
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << v;
  return os.str();
}

// Mean-rms table, one row per architecture, one column per level.
std::string level_table(const ResultTable& table, Metric metric, const std::vector<AugmentationLevel>& levels,
                        bool with_pct) {
  const auto stats = table.aggregate();
  std::vector<std::string> archs;
  std::map<std::string, std::pair<int, int>> schedule;
  for (const auto& t : table.trials) {
    const auto arch = t.spec.architecture.arch_string();
    if (std::find(archs.begin(), archs.end(), arch) == archs.end()) archs.push_back(arch);
    schedule[arch] = {t.spec.train_config.epochs, t.spec.train_config.batch_size};
  }
  std::ostringstream os;
  os << std::left << std::setw(14) << "MLP" << std::right << std::setw(8) << "params" << std::setw(7) << "epoch"
     << std::setw(7) << "batch";
  for (const auto& l : levels) os << std::setw(12) << to_string(l);
  if (with_pct) os << std::setw(10) << "%";
  os << '\n';
  for (const auto& arch : archs) {
    NetworkSpec spec;
    spec.hidden_widths = parse_arch(arch);
    os << std::left << std::setw(14) << ("(" + arch + ")") << std::right << std::setw(8) << param_count(spec)
       << std::setw(7) << schedule[arch].first << std::setw(7) << schedule[arch].second;
    std::vector<double> means;
    for (const auto& l : levels) {
      double mean = std::numeric_limits<double>::quiet_NaN();
      for (const auto& [key, st] : stats)
        if (key.arch == arch && key.level == l && key.optimizer == Algorithm::adam && key.activation == Activation::relu)
          mean = metric == Metric::test ? st.mean_test : st.mean_extrap;
      means.push_back(mean);
      os << std::setw(12) << fixed3(mean);
    }
    if (with_pct && means.size() >= 2) {
      const double pct = (std::isfinite(means[0]) && means[0] > 0.0 && std::isfinite(means[1]))
                             ? pct_change(means[0], means[1])
                             : std::numeric_limits<double>::quiet_NaN();
      os << std::setw(10) << fixed3(pct);
    }
    os << '\n';
  }
  return os.str();
}

std::string seed_trace_csv(const ResultTable& table, const std::string& arch, Metric metric) {
  std::set<AugmentationLevel> levels;
  for (const auto& t : table.trials)
    if (t.spec.architecture.arch_string() == arch && t.spec.augmentation.technique != Technique::error &&
        t.spec.optimizer.algorithm == Algorithm::adam && t.spec.architecture.activation == Activation::relu)
      levels.insert(t.spec.augmentation);
  const auto traces = seed_stability(table, arch, {levels.begin(), levels.end()}, metric);
  std::ostringstream os;
  os << "arch,k,seed,rms_mev\n";
  for (const auto& tr : traces)
    for (std::size_t i = 0; i < tr.seeds.size(); ++i)
      os << arch << ',' << tr.level.resamples() << ',' << tr.seeds[i] << ',' << format_real(tr.rms[i]) << '\n';
  os << "# stddev across seeds:";
  for (const auto& tr : traces) os << " k=" << tr.level.resamples() << ':' << format_real(tr.stddev);
  os << '\n';
  return os.str();
}

std::string fig2_csv(const ReportArgs& args) {
  if (args.nuclides_csv.empty()) throw ConfigError("fig2 requires --nuclides <csv>");
  if (!args.noise_seed_set) throw ConfigError("fig2 requires --noise-seed (or --seed)");
  const auto comma = args.nuclide.find(',');
  if (comma == std::string::npos) throw ConfigError("--nuclide expects Z,A");
  const int z = detail::parse_int(std::string_view(args.nuclide).substr(0, comma), "--nuclide");
  const int a = detail::parse_int(std::string_view(args.nuclide).substr(comma + 1), "--nuclide");
  const auto records = read_nuclides(args.nuclides_csv);
  const auto it = std::find_if(records.begin(), records.end(), [&](const auto& r) { return r.z == z && r.a == a; });
  if (it == records.end()) throw DataIntegrityError("nuclide Z=" + std::to_string(z) + " A=" + std::to_string(a) + " not found");
  const auto set = gaussian_resample(records, args.k, args.noise_seed);
  const auto index = static_cast<std::size_t>(it - records.begin());
  std::ostringstream os;
  os << "resample,energy_mev,experimental_mev,uncertainty_mev\n";
  for (const auto& row : set.rows)
    if (row.source == index)
      os << row.origin.resample_index << ',' << format_real(row.energy) << ',' << format_real(it->be_total) << ','
         << format_real(it->be_err) << '\n';
  return os.str();
}

int cmd_report(const ReportArgs& args, const GlobalOptions& global) {
  const auto& ids = figure_ids();
  if (std::find(ids.begin(), ids.end(), args.figure) == ids.end()) {
    std::string msg = "unknown figure '" + args.figure + "'; valid ids:";
    for (const auto& id : ids) msg += " " + id;
    throw CLI::ValidationError(msg);
  }

  std::string text;
  std::string ext = ".csv";
  if (args.figure == "fig2") {
    text = fig2_csv(args);
  } else {
    if (args.results_csv.empty()) throw ConfigError("--results is required for " + args.figure);
    std::ifstream is(args.results_csv);
    if (!is) throw ConfigError("cannot open '" + args.results_csv + "'");
    ResultTable table{read_results_csv(is)};
    table.sort_canonical();
    auto adam_relu = [](const TrialResult& t) {
      return t.spec.optimizer.algorithm == Algorithm::adam && t.spec.architecture.activation == Activation::relu;
    };
    auto gaussian_levels = [&] {
      std::set<AugmentationLevel> s;
      for (const auto& t : table.trials)
        if (t.spec.augmentation.technique != Technique::error) s.insert(t.spec.augmentation);
      return std::vector<AugmentationLevel>(s.begin(), s.end());
    };
    std::ostringstream os;
    if (args.figure == "table1") {
      ext = ".txt";
      text = level_table(table, Metric::test, {AugmentationLevel::none(), AugmentationLevel::error()}, true);
    } else if (args.figure == "table2") {
      ext = ".txt";
      text = level_table(table, Metric::test, gaussian_levels(), false);
    } else if (args.figure == "table3") {
      ext = ".txt";
      text = level_table(table, Metric::extrapolation, gaussian_levels(), false);
    } else if (args.figure == "fig3" || args.figure == "fig5") {
      write_curve_csv(os, table, args.figure == "fig3" ? Metric::test : Metric::extrapolation, adam_relu);
      text = os.str();
    } else if (args.figure == "fig4" || args.figure == "fig7") {
      text = seed_trace_csv(table, args.arch, args.figure == "fig4" ? Metric::test : Metric::extrapolation);
    } else if (args.figure == "fig6" || args.figure == "fig8") {
      const bool by_optimizer = args.figure == "fig6";
      auto filter = [&](const TrialResult& t) {
        return t.spec.architecture.arch_string() == args.arch &&
               (by_optimizer ? t.spec.architecture.activation == Activation::relu
                             : t.spec.optimizer.algorithm == Algorithm::adam);
      };
      os << "# test\n";
      write_curve_csv(os, table, Metric::test, filter);
      os << "# extrapolation\n";
      write_curve_csv(os, table, Metric::extrapolation, filter);
      text = os.str();
    }
  }

  std::cout << text;
  const fs::path dir = global.out_dir.empty() ? fs::path("report") : fs::path(global.out_dir);
  write_text_atomic(dir / (args.figure + ext), text);
  std::cerr << "wrote: " << (dir / (args.figure + ext)).string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nucaug: binding-energy MLPs with training-set augmentation"};
  app.require_subcommand(1);
  GlobalOptions global;
  std::uint64_t seed = 0;

  auto add_out = [&](CLI::App* cmd) { cmd->add_option("--out", global.out_dir, "Output directory"); };

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Parse an AME mass file into the canonical nuclide CSV");
  c_ingest->add_option("ame_path", ingest.ame_path, "AME mass file")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--edition", ingest.edition, "AME2016 or AME2020")->capture_default_str();
  c_ingest->add_option("--out-csv,-o", ingest.out_csv, "Output CSV path");
  c_ingest->add_option("--z-min", ingest.z_min, "Minimum proton number")->capture_default_str();
  c_ingest->add_option("--n-min", ingest.n_min, "Minimum neutron number")->capture_default_str();
  c_ingest->add_flag("--all", ingest.all, "Write every parsed record instead of the filtered set");
  c_ingest->add_option("--diff", ingest.diff_csv, "Older-edition CSV; report nuclei new in this file")
      ->check(CLI::ExistingFile);
  c_ingest->add_option("--diff-out", ingest.diff_out, "Output CSV for the new nuclei");
  c_ingest->add_option("--split", ingest.split_ratio, "Also write <out>_train/_test CSVs with this ratio");
  auto* split_seed_opt = c_ingest->add_option("--split-seed", ingest.split_seed, "Seed of the train/test split");
  add_out(c_ingest);

  AugmentArgs augment_args;
  auto* c_augment = app.add_subcommand("augment", "Augment a training CSV");
  c_augment->add_option("--in", augment_args.in_csv, "Training nuclide CSV")->required()->check(CLI::ExistingFile);
  c_augment->add_option("--out-csv,-o", augment_args.out_csv, "Output augmented CSV");
  c_augment->add_option("--technique", augment_args.technique, "none, error or gaussian")->capture_default_str();
  c_augment->add_option("--k", augment_args.k, "Gaussian resample count")->capture_default_str();
  auto* noise_opt = c_augment->add_option("--noise-seed", augment_args.noise_seed, "Noise seed");
  auto* augment_seed_opt = c_augment->add_option("--seed", seed, "Alias for --noise-seed");
  add_out(c_augment);

  TrainArgs train_args;
  auto* c_train = app.add_subcommand("train", "Train one network");
  c_train->add_option("--data", train_args.data_csv, "Nuclide or augmented CSV")->required()->check(CLI::ExistingFile);
  c_train->add_option("--model", train_args.model_path, "Output model file");
  c_train->add_option("--arch", train_args.arch, "Hidden widths, e.g. 32-16-8")->capture_default_str();
  c_train->add_option("--activation", train_args.activation, "relu, tanh or sigmoid")->capture_default_str();
  c_train->add_option("--optimizer", train_args.optimizer, "adam, nadam, adamax or rmsprop")->capture_default_str();
  c_train->add_option("--epochs", train_args.epochs)->capture_default_str();
  c_train->add_option("--batch", train_args.batch)->capture_default_str();
  auto* train_seed_opt = c_train->add_option("--seed", train_args.seed, "Init and shuffle seed");
  c_train->add_option("--lr", train_args.learning_rate)->capture_default_str();
  c_train->add_option("--beta1", train_args.beta1)->capture_default_str();
  c_train->add_option("--beta2", train_args.beta2)->capture_default_str();
  c_train->add_option("--epsilon", train_args.epsilon)->capture_default_str();
  c_train->add_option("--rmsprop-decay", train_args.rmsprop_decay)->capture_default_str();
  c_train->add_flag("--raw-inputs", train_args.raw_inputs, "Feed raw Z, A instead of z-scores");
  c_train->add_flag("--raw-targets", train_args.raw_targets, "Fit raw MeV targets instead of z-scores");
  c_train->add_option("--loss-csv", train_args.loss_csv, "Write per-epoch training loss");
  add_out(c_train);

  EvaluateArgs eval_args;
  auto* c_eval = app.add_subcommand("evaluate", "Evaluate a trained model on a nuclide CSV");
  c_eval->add_option("--model", eval_args.model_path)->required()->check(CLI::ExistingFile);
  c_eval->add_option("--data", eval_args.data_csv)->required()->check(CLI::ExistingFile);
  c_eval->add_option("--predictions", eval_args.predictions_csv, "Write per-nucleus predictions");
  add_out(c_eval);

  SweepArgs sweep_args;
  auto* c_sweep = app.add_subcommand("sweep", "Run a configured sweep (resumable)");
  c_sweep->add_option("--config", sweep_args.config_path, "Sweep configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  c_sweep->add_option("--jobs", global.jobs, "Parallel trials")->check(CLI::PositiveNumber);
  c_sweep->add_flag("--quiet", sweep_args.quiet, "No per-trial progress");
  add_out(c_sweep);

  ReportArgs report_args;
  auto* c_report = app.add_subcommand("report", "Emit table or figure data from a results CSV");
  c_report->add_option("--results", report_args.results_csv, "results.csv from a sweep");
  c_report->add_option("--figure", report_args.figure, "table1-3, fig2-fig8")->required();
  c_report->add_option("--arch", report_args.arch, "Architecture for fig4, fig6, fig7, fig8")->capture_default_str();
  c_report->add_option("--nuclides", report_args.nuclides_csv, "Nuclide CSV for fig2");
  c_report->add_option("--nuclide", report_args.nuclide, "Z,A for fig2")->capture_default_str();
  c_report->add_option("--k", report_args.k, "Resample count for fig2")->capture_default_str();
  auto* report_noise_opt = c_report->add_option("--noise-seed", report_args.noise_seed, "Noise seed for fig2");
  auto* report_seed_opt = c_report->add_option("--seed", seed, "Alias for --noise-seed");
  add_out(c_report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (c_ingest->parsed()) {
      ingest.split_seed_set = split_seed_opt->count() > 0;
      return cmd_ingest(ingest, global);
    }
    if (c_augment->parsed()) {
      augment_args.noise_seed_set = noise_opt->count() > 0 || augment_seed_opt->count() > 0;
      if (augment_seed_opt->count() > 0 && noise_opt->count() == 0) augment_args.noise_seed = seed;
      return cmd_augment(augment_args, global);
    }
    if (c_train->parsed()) {
      train_args.seed_set = train_seed_opt->count() > 0;
      return cmd_train(train_args, global);
    }
    if (c_eval->parsed()) return cmd_evaluate(eval_args, global);
    if (c_sweep->parsed()) {
      global.jobs_set = c_sweep->get_option("--jobs")->count() > 0;
      return cmd_sweep(sweep_args, global);
    }
    if (c_report->parsed()) {
      report_args.noise_seed_set = report_noise_opt->count() > 0 || report_seed_opt->count() > 0;
      if (report_seed_opt->count() > 0 && report_noise_opt->count() == 0) report_args.noise_seed = seed;
      return cmd_report(report_args, global);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kData;
  } catch (const DataIntegrityError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const IncompleteDataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
