#include <gtest/gtest.h>

#include <nucaug/training.hpp>

#include <sstream>

using namespace nucaug;

namespace {

std::vector<NuclideRecord> constant_energy(std::size_t n, double energy) {
  std::vector<NuclideRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int z = 8 + static_cast<int>(i % 10);
    const int nn = 8 + static_cast<int>(i / 10);
    out.push_back({z, nn, z + nn, energy, 0.001, false});
  }
  return out;
}

// Rough liquid-drop-like energies, enough structure to learn.
std::vector<NuclideRecord> smooth_energies(std::size_t n) {
  std::vector<NuclideRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int z = 8 + static_cast<int>(i % 25);
    const int nn = z + static_cast<int>(i / 25);
    const double a = z + nn;
    out.push_back({z, nn, z + nn, 15.5 * a - 17.2 * std::cbrt(a * a) - 0.7 * z * z / std::cbrt(a), 0.01, false});
  }
  return out;
}

NetworkSpec spec_of(std::vector<int> widths) {
  NetworkSpec s;
  s.hidden_widths = std::move(widths);
  return s;
}

TrainConfig config(int epochs, int batch, std::uint64_t seed) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = batch;
  c.init_seed = seed;
  c.shuffle_seed = seed;
  return c;
}

}  // namespace

TEST(Training, FullBatchSingleEpochIsOneStep) {
  const auto set = no_augmentation(smooth_energies(40));
  const auto r = train(spec_of({4}), set, config(1, 40, 1), {});
  EXPECT_EQ(r.steps, 1u);
  EXPECT_EQ(r.loss_history.size(), 1u);
}

TEST(Training, PartialLastBatchIsKept) {
  const auto set = no_augmentation(smooth_energies(10));
  EXPECT_EQ(train(spec_of({4}), set, config(2, 4, 1), {}).steps, 6u);
}

TEST(Training, ConstantTargetIsLearned) {
  const auto set = no_augmentation(constant_energy(100, 5.0));
  for (bool standardize : {true, false}) {
    auto c = config(500, 32, 3);
    c.target_standardize = standardize;
    const auto r = train(spec_of({8}), set, c, {});
    const auto pred = r.model.predict(set.base);
    EXPECT_LT(loss_mse(pred, std::vector<double>(pred.size(), 5.0)), 1e-4) << "standardize " << standardize;
  }
}

TEST(Training, LossDecreasesOnSmoothTarget) {
  const auto set = no_augmentation(smooth_energies(200));
  const auto r = train(spec_of({16, 16}), set, config(300, 32, 2), {});
  EXPECT_LT(r.loss_history.back(), 0.05 * r.loss_history.front());
}

TEST(Training, DeterministicPerSeed) {
  const auto set = gaussian_resample(smooth_energies(60), 2, 4);
  const auto a = train(spec_of({8, 4}), set, config(20, 16, 7), {});
  const auto b = train(spec_of({8, 4}), set, config(20, 16, 7), {});
  const auto c = train(spec_of({8, 4}), set, config(20, 16, 8), {});
  EXPECT_EQ(a.loss_history, b.loss_history);
  EXPECT_EQ(a.model.params, b.model.params);
  EXPECT_NE(a.loss_history, c.loss_history);
}

TEST(Training, StandardizerUsesOriginalRowsOnly) {
  auto records = smooth_energies(30);
  for (auto& r : records) r.be_err = 5.0;
  const auto base = Standardizer::fit(no_augmentation(records), true, true);
  const auto aug = Standardizer::fit(gaussian_resample(records, 5, 1), true, true);
  EXPECT_EQ(base.mean_e, aug.mean_e);
  EXPECT_EQ(base.std_e, aug.std_e);
  EXPECT_EQ(base.std_a, aug.std_a);
  const auto off = Standardizer::fit(no_augmentation(records), false, false);
  EXPECT_EQ(off.scale_z(9.0), 9.0);
  EXPECT_EQ(off.unscale_energy(3.5), 3.5);
}

TEST(Training, DivergenceIsReported) {
  const auto set = no_augmentation(smooth_energies(50));
  auto c = config(50, 8, 1);
  c.target_standardize = false;
  c.input_standardize = false;
  OptimizerConfig opt;
  opt.learning_rate = 1e300;
  EXPECT_THROW(train(spec_of({8}), set, c, opt), TrainingDiverged);
}

TEST(Training, RejectsEmptyOrBadConfig) {
  EXPECT_THROW(train(spec_of({4}), AugmentedTrainingSet{}, config(1, 1, 1), {}), ContractViolation);
  const auto set = no_augmentation(smooth_energies(5));
  EXPECT_THROW(train(spec_of({4}), set, config(0, 1, 1), {}), ConfigError);
  EXPECT_THROW(train(spec_of({4}), set, config(1, 0, 1), {}), ConfigError);
}

TEST(ModelFile, SaveLoadIsBitExact) {
  const auto records = smooth_energies(80);
  const auto r = train(spec_of({6, 3}), no_augmentation(records), config(10, 16, 5), {});
  std::stringstream ss;
  save_model(ss, r.model);
  const auto loaded = load_model(ss);
  EXPECT_EQ(loaded.spec, r.model.spec);
  EXPECT_EQ(loaded.params, r.model.params);
  EXPECT_EQ(loaded.predict(records), r.model.predict(records));
}

TEST(ModelFile, VersionAndTruncationErrors) {
  std::istringstream wrong_version("nucaug-model 2\n");
  EXPECT_THROW(load_model(wrong_version), ParseError);
  const auto r = train(spec_of({2}), no_augmentation(smooth_energies(5)), config(1, 5, 1), {});
  std::stringstream ss;
  save_model(ss, r.model);
  auto text = ss.str();
  std::istringstream truncated(text.substr(0, text.size() / 2));
  EXPECT_THROW(load_model(truncated), ParseError);
}

TEST(HexReal, RoundTrip) {
  for (double v : {0.0, -0.0, 1.0, -2.5, 1e-300, 1636.430224, -7.438e12}) EXPECT_EQ(parse_hex_real(hex_real(v)), v);
}
