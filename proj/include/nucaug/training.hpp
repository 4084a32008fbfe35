#pragma once

// Mini-batch training loop and the trained-model container.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "augmentation.hpp"
#include "errors.hpp"
#include "network.hpp"
#include "optimizer.hpp"
#include "random.hpp"

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

namespace nucaug {

struct TrainConfig {
  int epochs = 1;
  int batch_size = 32;
  std::uint64_t shuffle_seed = 0;
  std::uint64_t init_seed = 0;
  bool input_standardize = true;
  bool target_standardize = true;

  void validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  }
};

// z-score statistics over the original (pre-augmentation) training rows.
// Inputs (Z, A) and the target energy are scaled independently.
struct Standardizer {
  bool inputs = false;
  bool targets = false;
  double mean_z = 0.0;
  double mean_a = 0.0;
  double std_z = 1.0;
  double std_a = 1.0;
  double mean_e = 0.0;  // MeV
  double std_e = 1.0;   // MeV

  static Standardizer fit(const AugmentedTrainingSet& set, bool inputs, bool targets) {
    Standardizer s;
    s.inputs = inputs;
    s.targets = targets;
    double sum_z = 0.0, sum_a = 0.0, sum_e = 0.0;
    std::size_t count = 0;
    for (const auto& r : set.rows) {
      if (r.origin.kind != OriginKind::original) continue;
      sum_z += r.z;
      sum_a += r.a;
      sum_e += r.energy;
      ++count;
    }
    if (count == 0) throw ContractViolation("training set has no original rows");
    const auto n = static_cast<double>(count);
    const double mz = sum_z / n, ma = sum_a / n, me = sum_e / n;
    double ss_z = 0.0, ss_a = 0.0, ss_e = 0.0;
    for (const auto& r : set.rows) {
      if (r.origin.kind != OriginKind::original) continue;
      ss_z += (r.z - mz) * (r.z - mz);
      ss_a += (r.a - ma) * (r.a - ma);
      ss_e += (r.energy - me) * (r.energy - me);
    }
    // A single distinct nucleus has zero spread; that axis is only shifted.
    auto spread = [n](double ss) { return ss > 0.0 ? std::sqrt(ss / n) : 1.0; };
    if (inputs) {
      s.mean_z = mz;
      s.mean_a = ma;
      s.std_z = spread(ss_z);
      s.std_a = spread(ss_a);
    }
    if (targets) {
      s.mean_e = me;
      s.std_e = spread(ss_e);
    }
    return s;
  }

  double scale_z(double z) const { return (z - mean_z) / std_z; }
  double scale_a(double a) const { return (a - mean_a) / std_a; }
  double scale_energy(double e) const { return (e - mean_e) / std_e; }
  double unscale_energy(double y) const { return y * std_e + mean_e; }
};

struct Model {
  NetworkSpec spec;
  NetworkParams params;
  Standardizer standardizer;

  Eigen::MatrixXd inputs_for(std::span<const std::pair<int, int>> za) const {
    Eigen::MatrixXd x(2, static_cast<Eigen::Index>(za.size()));
    for (std::size_t i = 0; i < za.size(); ++i) {
      x(0, static_cast<Eigen::Index>(i)) = standardizer.scale_z(za[i].first);
      x(1, static_cast<Eigen::Index>(i)) = standardizer.scale_a(za[i].second);
    }
    return x;
  }

  double predict(int z, int a) const {
    const double x[2] = {standardizer.scale_z(z), standardizer.scale_a(a)};
    return standardizer.unscale_energy(forward(params, spec, x));
  }

  std::vector<double> predict(const std::vector<NuclideRecord>& records) const {
    std::vector<std::pair<int, int>> za;
    za.reserve(records.size());
    for (const auto& r : records) za.emplace_back(r.z, r.a);
    const Eigen::MatrixXd y = forward_batch(params, spec, inputs_for(za));
    std::vector<double> out(static_cast<std::size_t>(y.size()));
    for (Eigen::Index i = 0; i < y.size(); ++i) out[static_cast<std::size_t>(i)] = standardizer.unscale_energy(y(i));
    return out;
  }
};

struct TrainResult {
  Model model;
  std::vector<double> loss_history;  // sample-weighted mean batch loss per epoch, in MeV^2
  std::uint64_t steps = 0;
};

// Flush-to-zero / denormals-are-zero for the lifetime of the guard. Moment
// buffers decay into the subnormal range late in training. train() always
// runs under this mode regardless of the caller's MXCSR.
class FlushDenormalsGuard {
 public:
  FlushDenormalsGuard() {
#if defined(__SSE2__)
    saved_ = _mm_getcsr();
    _mm_setcsr(saved_ | 0x8040u);  // FTZ | DAZ
#endif
  }
  ~FlushDenormalsGuard() {
#if defined(__SSE2__)
    _mm_setcsr(saved_);
#endif
  }
  FlushDenormalsGuard(const FlushDenormalsGuard&) = delete;
  FlushDenormalsGuard& operator=(const FlushDenormalsGuard&) = delete;

 private:
  unsigned saved_ = 0;
};

// Mini-batch training. Each epoch visits the rows in a fresh permutation
// drawn from stream (shuffle_seed, epoch); the last partial batch is kept.
// Gradients are batch means.
inline TrainResult train(const NetworkSpec& spec, const AugmentedTrainingSet& set, const TrainConfig& config,
                         const OptimizerConfig& opt) {
  spec.validate();
  config.validate();
  opt.validate();
  if (spec.input_dim != 2 || spec.output_dim != 1)
    throw ConfigError("binding-energy networks take (Z, A) and predict one energy");
  if (set.rows.empty()) throw ContractViolation("train: empty training set");

  TrainResult result;
  result.model.spec = spec;
  FlushDenormalsGuard fp_mode;
  result.model.standardizer = Standardizer::fit(set, config.input_standardize, config.target_standardize);
  result.model.params = init_network(spec, config.init_seed);
  auto& params = result.model.params;
  const auto& standardizer = result.model.standardizer;

  const auto n = static_cast<Eigen::Index>(set.rows.size());
  Eigen::MatrixXd x(2, n);
  Eigen::MatrixXd t(1, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = set.rows[static_cast<std::size_t>(i)];
    x(0, i) = standardizer.scale_z(r.z);
    x(1, i) = standardizer.scale_a(r.a);
    t(0, i) = standardizer.scale_energy(r.energy);
  }

  OptimizerState state(opt.algorithm, params.size());
  NetworkParams grads(spec);
  BackwardWorkspace ws;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  Eigen::MatrixXd xb, tb;
  const Eigen::Index batch = config.batch_size;
  result.loss_history.reserve(static_cast<std::size_t>(config.epochs));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    CounterStream stream(config.shuffle_seed, {0x5f0ffULL, static_cast<std::uint64_t>(epoch)});
    shuffle_in_place(std::span<Eigen::Index>(order), stream);

    double weighted_loss = 0.0;
    for (Eigen::Index start = 0; start < n; start += batch) {
      const Eigen::Index len = std::min(batch, n - start);
      xb.resize(2, len);
      tb.resize(1, len);
      for (Eigen::Index j = 0; j < len; ++j) {
        const auto src = order[static_cast<std::size_t>(start + j)];
        xb.col(j) = x.col(src);
        tb(0, j) = t(0, src);
      }
      const double loss = backward(params, spec, xb, tb, grads, ws);
      optimizer_step(state, opt, params.flat(), grads.flat());
      weighted_loss += loss * static_cast<double>(len);
    }
    const double epoch_loss = weighted_loss / static_cast<double>(n) * standardizer.std_e * standardizer.std_e;
    if (!std::isfinite(epoch_loss)) throw TrainingDiverged(epoch + 1, "non-finite training loss");
    result.loss_history.push_back(epoch_loss);
  }
  result.steps = state.step;
  return result;
}

// ---------------------------------------------------------------------------
// Model file. Line-oriented text; every real is a C99 hex float so loading
// reproduces parameters bit for bit.
//
//   nucaug-model 1
//   input_dim 2
//   output_dim 1
//   hidden 32 32
//   activation relu
//   standardize_inputs 1 <mean_z> <mean_a> <std_z> <std_a>
//   standardize_targets 1 <mean_e> <std_e>
//   params <count>
//   <one value per line>
//   end

inline constexpr int kModelFormatVersion = 1;

inline std::string hex_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
  return std::string(buf, ptr);
}

inline double parse_hex_real(std::string_view s) {
  bool negative = false;
  if (!s.empty() && s.front() == '-') {
    negative = true;
    s.remove_prefix(1);
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::hex);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError(0, "bad hex real '" + std::string(s) + "'");
  return negative ? -v : v;
}

inline void save_model(std::ostream& os, const Model& model) {
  const auto& spec = model.spec;
  const auto& st = model.standardizer;
  os << "nucaug-model " << kModelFormatVersion << '\n';
  os << "input_dim " << spec.input_dim << '\n';
  os << "output_dim " << spec.output_dim << '\n';
  os << "hidden";
  for (int w : spec.hidden_widths) os << ' ' << w;
  os << '\n';
  os << "activation " << to_string(spec.activation) << '\n';
  os << "standardize_inputs " << (st.inputs ? 1 : 0) << ' ' << hex_real(st.mean_z) << ' ' << hex_real(st.mean_a)
     << ' ' << hex_real(st.std_z) << ' ' << hex_real(st.std_a) << '\n';
  os << "standardize_targets " << (st.targets ? 1 : 0) << ' ' << hex_real(st.mean_e) << ' ' << hex_real(st.std_e)
     << '\n';
  os << "params " << model.params.size() << '\n';
  for (double v : model.params.flat()) os << hex_real(v) << '\n';
  os << "end\n";
}

inline Model load_model(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&](const char* expected) {
    if (!std::getline(is, line)) throw ParseError(line_no + 1, std::string("model file truncated before ") + expected);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key != expected) throw ParseError(line_no, std::string("expected '") + expected + "', found '" + key + "'");
    std::string rest;
    std::getline(ls, rest);
    return std::istringstream(rest);
  };

  Model model;
  {
    auto ls = next_line("nucaug-model");
    int version = 0;
    ls >> version;
    if (version != kModelFormatVersion)
      throw ParseError(line_no, "unsupported model format version " + std::to_string(version));
  }
  next_line("input_dim") >> model.spec.input_dim;
  next_line("output_dim") >> model.spec.output_dim;
  {
    auto ls = next_line("hidden");
    int w = 0;
    while (ls >> w) model.spec.hidden_widths.push_back(w);
  }
  {
    auto ls = next_line("activation");
    std::string name;
    ls >> name;
    model.spec.activation = activation_from_string(name);
  }
  model.spec.validate();
  try {
    auto& st = model.standardizer;
    {
      auto ls = next_line("standardize_inputs");
      int enabled = 0;
      std::string mz, ma, sz, sa;
      ls >> enabled >> mz >> ma >> sz >> sa;
      st.inputs = enabled != 0;
      st.mean_z = parse_hex_real(mz);
      st.mean_a = parse_hex_real(ma);
      st.std_z = parse_hex_real(sz);
      st.std_a = parse_hex_real(sa);
    }
    {
      auto ls = next_line("standardize_targets");
      int enabled = 0;
      std::string me, se;
      ls >> enabled >> me >> se;
      st.targets = enabled != 0;
      st.mean_e = parse_hex_real(me);
      st.std_e = parse_hex_real(se);
    }
  } catch (const ParseError& e) {
    if (e.line() != 0) throw;
    throw ParseError(line_no, e.what());
  }
  std::size_t count = 0;
  next_line("params") >> count;
  model.params = NetworkParams(model.spec);
  if (count != model.params.size())
    throw ParseError(line_no, "parameter count " + std::to_string(count) + " does not match architecture (" +
                                  std::to_string(model.params.size()) + ")");
  auto flat = model.params.flat();
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(is, line)) throw ParseError(line_no + 1, "model file truncated in parameter block");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    try {
      flat[i] = parse_hex_real(line);
    } catch (const ParseError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  next_line("end");
  return model;
}

}  // namespace nucaug
