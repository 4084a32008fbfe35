#include <gtest/gtest.h>

#include <nucaug/experiment.hpp>

#include <filesystem>
#include <sstream>

using namespace nucaug;
namespace fs = std::filesystem;

namespace {

std::vector<NuclideRecord> smooth_energies(std::size_t n, int z_offset = 0) {
  std::vector<NuclideRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int z = 8 + z_offset + static_cast<int>(i % 20);
    const int nn = z + static_cast<int>(i / 20);
    const double a = z + nn;
    out.push_back({z, nn, z + nn, 15.5 * a - 17.2 * std::cbrt(a * a), 0.002 * static_cast<double>(i % 4), false});
  }
  return out;
}

ExperimentData small_data() {
  ExperimentData d;
  d.split = split_dataset(smooth_energies(120), 0.7, 3);
  d.extrapolation = smooth_energies(10, 40);
  d.noise_seed = 5;
  return d;
}

SweepAxes small_axes() {
  SweepAxes axes;
  axes.architectures = {{{4}, 5, 16}, {{3, 2}, 4, 32}};
  axes.levels = {AugmentationLevel::none(), AugmentationLevel::error(), AugmentationLevel::gaussian(2)};
  axes.seeds = {1, 2, 3};
  return axes;
}

std::string csv_of(const ResultTable& t) {
  std::ostringstream os;
  write_results_csv(os, t);
  return os.str();
}

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("nucaug_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

}  // namespace

// ---------------------------------------------------------------------------
// Metrics

TEST(Metrics, RmsErrorExamples) {
  EXPECT_EQ(rms_error(std::vector<double>{1, 2}, std::vector<double>{1, 2}), 0.0);
  EXPECT_DOUBLE_EQ(rms_error(std::vector<double>{0, 0}, std::vector<double>{3, 4}), std::sqrt(12.5));
  const std::vector<double> a{1.5, -2.0, 7.25}, b{0.5, 1.0, 7.0};
  EXPECT_EQ(rms_error(a, b), rms_error(b, a));
  EXPECT_THROW(rms_error(std::vector<double>{1}, std::vector<double>{1, 2}), ContractViolation);
}

TEST(Metrics, PercentChangeExamples) {
  // Table 1 rows: (32-32) and (32-16-16-8), values as printed.
  EXPECT_NEAR(pct_change(1.903, 1.591), 16.395, 1e-3);
  EXPECT_NEAR(pct_change(1.882, 2.022), -7.438, 1e-3);
  EXPECT_THROW(pct_change(0.0, 1.0), DomainError);
  EXPECT_THROW(pct_change(-1.0, 1.0), DomainError);
}

TEST(Metrics, PercentChangeInverts) {
  for (auto [base, aug] : {std::pair{1.903, 1.591}, std::pair{2.5, 3.1}, std::pair{0.7, 0.7}}) {
    const double pct = pct_change(base, aug);
    EXPECT_NEAR(base * (1.0 - pct / 100.0), aug, 1e-12);
  }
}

TEST(Metrics, MeanAndPopulationStddev) {
  const auto [mean, sd] = mean_and_stddev({1.0, 2.0, 3.0, 4.0});
  EXPECT_EQ(mean, 2.5);
  EXPECT_DOUBLE_EQ(sd, std::sqrt(1.25));
  EXPECT_EQ(mean_and_stddev({2.0}).second, 0.0);
}

// ---------------------------------------------------------------------------
// Trials

TEST(Trial, MemorizesSingleNucleus) {
  const std::vector<NuclideRecord> one = {{20, 20, 40, 342.052, 0.0, false}};
  TrialSpec spec;
  spec.architecture.hidden_widths = {8};
  spec.seed = 1;
  spec.train_config.epochs = 2000;
  spec.train_config.batch_size = 1;
  Model model;
  const auto r = run_trial(spec, no_augmentation(one), {}, {}, &model);
  ASSERT_TRUE(r.ok()) << r.status;
  EXPECT_LT(std::abs(model.predict(20, 40) - 342.052), 0.01);
}

TEST(Trial, LeakIsRejected) {
  auto data = small_data();
  data.split.test.push_back(data.split.train.front());
  TrialSpec spec;
  spec.architecture.hidden_widths = {4};
  EXPECT_THROW(run_trial(spec, data), DataIntegrityError);
}

TEST(Trial, RerunIsIdentical) {
  const auto data = small_data();
  TrialSpec spec;
  spec.architecture.hidden_widths = {5, 3};
  spec.augmentation = AugmentationLevel::gaussian(3);
  spec.seed = 4;
  spec.train_config.epochs = 10;
  spec.train_config.batch_size = 8;
  const auto a = run_trial(spec, data), b = run_trial(spec, data);
  std::ostringstream sa, sb;
  write_result_row(sa, a);
  write_result_row(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  ASSERT_TRUE(a.rms_extrapolation.has_value());
}

TEST(Trial, DivergenceBecomesFailedStatus) {
  const auto data = small_data();
  TrialSpec spec;
  spec.architecture.hidden_widths = {4};
  spec.optimizer.learning_rate = 1e300;
  spec.train_config.target_standardize = false;
  spec.train_config.input_standardize = false;
  spec.train_config.epochs = 20;
  const auto r = run_trial(spec, data);
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.status.rfind("failed", 0), 0u);
}

TEST(Trial, KeyDependsOnEverySpecField) {
  TrialSpec a;
  a.architecture.hidden_widths = {4};
  const auto base = trial_key(a, 1);
  auto b = a;
  b.seed = 9;
  EXPECT_NE(trial_key(b, 1), base);
  b = a;
  b.optimizer.learning_rate = 0.002;
  EXPECT_NE(trial_key(b, 1), base);
  b = a;
  b.augmentation = AugmentationLevel::gaussian(1);
  EXPECT_NE(trial_key(b, 1), base);
  EXPECT_NE(trial_key(a, 2), base);
  EXPECT_EQ(trial_key(a, 1), base);
}

TEST(Levels, NamesRoundTrip) {
  for (const auto& l : {AugmentationLevel::none(), AugmentationLevel::error(), AugmentationLevel::gaussian(5)})
    EXPECT_EQ(level_from_string(to_string(l)), l);
  EXPECT_EQ(level_from_string("gaussian:3"), AugmentationLevel::gaussian(3));
  EXPECT_THROW(level_from_string("gaussian0"), ConfigError);
  EXPECT_THROW(level_from_string("mixup"), ConfigError);
}

// ---------------------------------------------------------------------------
// Sweeps

TEST(Sweep, SingleTrialGroupMeanEqualsRms) {
  const auto data = small_data();
  SweepAxes axes;
  axes.architectures = {{{4}, 5, 16}};
  axes.levels = {AugmentationLevel::none()};
  axes.seeds = {1};
  const auto table = sweep(axes, data);
  ASSERT_EQ(table.trials.size(), 1u);
  const auto stats = table.aggregate();
  ASSERT_EQ(stats.size(), 1u);
  EXPECT_EQ(stats.begin()->second.mean_test, table.trials[0].rms_test);
  EXPECT_EQ(stats.begin()->second.std_test, 0.0);
}

TEST(Sweep, DeterministicAcrossRunsJobsAndOrder) {
  const auto data = small_data();
  auto specs = small_axes().trials();
  const auto serial = csv_of(sweep(specs, data));
  EXPECT_EQ(csv_of(sweep(specs, data)), serial);
  SweepOptions parallel;
  parallel.jobs = 3;
  std::reverse(specs.begin(), specs.end());
  EXPECT_EQ(csv_of(sweep(specs, data, parallel)), serial);
}

TEST(Sweep, AggregateIsArithmeticMean) {
  const auto table = sweep(small_axes(), small_data());
  for (const auto& [key, st] : table.aggregate()) {
    double sum = 0.0;
    int n = 0;
    for (const auto& t : table.trials)
      if (group_of(t.spec) == key) {
        sum += t.rms_test;
        ++n;
      }
    EXPECT_EQ(n, 3);
    EXPECT_DOUBLE_EQ(st.mean_test, sum / n);
  }
}

TEST(Sweep, ResumesFromCache) {
  const auto data = small_data();
  const auto dir = temp_dir("cache");
  SweepOptions options;
  options.cache_dir = dir;
  std::size_t fresh = 0, cached = 0;
  options.on_trial = [&](const TrialResult&, bool from_cache, std::size_t, std::size_t) {
    (from_cache ? cached : fresh)++;
  };
  const auto first = csv_of(sweep(small_axes(), data, options));
  EXPECT_EQ(fresh, 18u);
  EXPECT_EQ(cached, 0u);

  // Drop one cached trial: only that one is recomputed.
  fs::remove(fs::directory_iterator(dir)->path());
  fresh = cached = 0;
  EXPECT_EQ(csv_of(sweep(small_axes(), data, options)), first);
  EXPECT_EQ(fresh, 1u);
  EXPECT_EQ(cached, 17u);
  fs::remove_all(dir);
}

TEST(Sweep, CacheIgnoredWhenDataChanges) {
  auto data = small_data();
  const auto dir = temp_dir("cache_data");
  SweepOptions options;
  options.cache_dir = dir;
  SweepAxes axes;
  axes.architectures = {{{4}, 3, 16}};
  axes.levels = {AugmentationLevel::gaussian(1)};
  axes.seeds = {1};
  sweep(axes, data, options);
  data.noise_seed = 6;
  std::size_t cached = 0;
  options.on_trial = [&](const TrialResult&, bool from_cache, std::size_t, std::size_t) { cached += from_cache; };
  sweep(axes, data, options);
  EXPECT_EQ(cached, 0u);
  fs::remove_all(dir);
}

// ---------------------------------------------------------------------------
// Seed stability

TEST(SeedStability, TracesAndMissingCells) {
  auto table = sweep(small_axes(), small_data());
  const auto traces =
      seed_stability(table, "4", {AugmentationLevel::none(), AugmentationLevel::gaussian(2)}, Metric::test);
  ASSERT_EQ(traces.size(), 2u);
  EXPECT_EQ(traces[0].seeds, (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_EQ(traces[0].stddev, mean_and_stddev(traces[0].rms).second);

  ResultTable single;
  for (const auto& t : table.trials)
    if (t.spec.seed == 1 && t.spec.architecture.arch_string() == "4") single.trials.push_back(t);
  const auto one = seed_stability(single, "4", {AugmentationLevel::none()});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].rms.size(), 1u);
  EXPECT_EQ(one[0].stddev, 0.0);

  auto holes = table;
  std::erase_if(holes.trials, [](const TrialResult& t) {
    return t.spec.seed == 2 && t.spec.augmentation == AugmentationLevel::gaussian(2);
  });
  EXPECT_THROW(seed_stability(holes, "4", {AugmentationLevel::none(), AugmentationLevel::gaussian(2)}),
               IncompleteDataError);
}

// ---------------------------------------------------------------------------
// Output files

TEST(ResultsCsv, RoundTrip) {
  const auto table = sweep(small_axes(), small_data());
  std::stringstream ss;
  write_results_csv(ss, table);
  EXPECT_EQ(ss.str().substr(0, kResultsCsvHeader.size()), kResultsCsvHeader);
  ResultTable back{read_results_csv(ss)};
  EXPECT_EQ(csv_of(back), csv_of(table));
}

TEST(CurveCsv, OneRowPerCurvePoint) {
  const auto table = sweep(small_axes(), small_data());
  std::ostringstream os;
  write_curve_csv(os, table, Metric::test, nullptr);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "arch,optimizer,activation,k,n_seeds,mean_rms_mev,std_rms_mev,seed_1,seed_2,seed_3");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 4);  // two architectures x {none, gaussian2}
}

TEST(Manifest, OrderedSections) {
  Manifest m;
  m.set("a", "x", "1");
  m.set("b", "y", 2);
  m.set("a", "z", 0.5);
  m.set("a", "x", "3");
  EXPECT_EQ(m.str(), "[a]\nx = 3\nz = 0.5\n\n[b]\ny = 2\n");
}
