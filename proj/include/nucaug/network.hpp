#pragma once

// Dense feedforward regression network.
//
// Hidden layers apply a pointwise activation to an affine map; the output
// layer is affine only. Parameters live in one flat buffer of doubles; each
// layer's weight matrix (fan_out x fan_in, column-major) is followed by its
// bias vector. Gradients use the same layout, so optimizers work on flat
// spans.

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "random.hpp"

namespace nucaug {

enum class Activation { relu, tanh, sigmoid };

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
  }
  return "?";
}

inline Activation activation_from_string(std::string_view s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  if (s == "sigmoid") return Activation::sigmoid;
  throw ConfigError("unknown activation '" + std::string(s) + "' (expected relu, tanh or sigmoid)");
}

struct NetworkSpec {
  int input_dim = 2;
  std::vector<int> hidden_widths;
  Activation activation = Activation::relu;
  int output_dim = 1;

  void validate() const {
    if (hidden_widths.empty()) throw ConfigError("network needs at least one hidden layer");
    if (input_dim < 1 || output_dim < 1) throw ConfigError("network input/output dimensions must be >= 1");
    for (int w : hidden_widths)
      if (w < 1) throw ConfigError("hidden layer widths must be >= 1");
  }

  std::size_t layer_count() const { return hidden_widths.size() + 1; }

  int fan_in(std::size_t layer) const { return layer == 0 ? input_dim : hidden_widths[layer - 1]; }

  int fan_out(std::size_t layer) const {
    return layer < hidden_widths.size() ? hidden_widths[layer] : output_dim;
  }

  // "32-16-8"
  std::string arch_string() const {
    std::string s;
    for (std::size_t i = 0; i < hidden_widths.size(); ++i) {
      if (i) s += '-';
      s += std::to_string(hidden_widths[i]);
    }
    return s;
  }

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

// Parses "32-16-8" into hidden widths.
inline std::vector<int> parse_arch(std::string_view text) {
  std::vector<int> widths;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto dash = text.find('-', start);
    if (dash == std::string_view::npos) dash = text.size();
    const auto part = text.substr(start, dash - start);
    int w = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), w);
    if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size() || w < 1)
      throw ConfigError("bad architecture '" + std::string(text) + "'");
    widths.push_back(w);
    start = dash + 1;
  }
  return widths;
}

// Sum over layers of (fan_in + 1) * fan_out.
inline std::size_t param_count(const NetworkSpec& spec) {
  spec.validate();
  std::size_t total = 0;
  for (std::size_t l = 0; l < spec.layer_count(); ++l)
    total += static_cast<std::size_t>(spec.fan_in(l) + 1) * static_cast<std::size_t>(spec.fan_out(l));
  return total;
}

struct LayerShape {
  Eigen::Index fan_in;
  Eigen::Index fan_out;
  std::size_t weight_offset;
  std::size_t bias_offset;
};

inline std::vector<LayerShape> layer_shapes(const NetworkSpec& spec) {
  std::vector<LayerShape> shapes;
  std::size_t offset = 0;
  for (std::size_t l = 0; l < spec.layer_count(); ++l) {
    LayerShape s{spec.fan_in(l), spec.fan_out(l), offset, 0};
    offset += static_cast<std::size_t>(s.fan_in * s.fan_out);
    s.bias_offset = offset;
    offset += static_cast<std::size_t>(s.fan_out);
    shapes.push_back(s);
  }
  return shapes;
}

using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

// Flat parameter (or gradient) buffer with per-layer views.
class NetworkParams {
 public:
  NetworkParams() = default;

  explicit NetworkParams(const NetworkSpec& spec)
      : shapes_(layer_shapes(spec)), values_(param_count(spec), 0.0) {}

  std::size_t size() const noexcept { return values_.size(); }
  std::size_t layer_count() const noexcept { return shapes_.size(); }
  const LayerShape& shape(std::size_t l) const { return shapes_.at(l); }

  std::span<double> flat() noexcept { return values_; }
  std::span<const double> flat() const noexcept { return values_; }

  MatrixMap weights(std::size_t l) {
    const auto& s = shapes_[l];
    return MatrixMap(values_.data() + s.weight_offset, s.fan_out, s.fan_in);
  }
  ConstMatrixMap weights(std::size_t l) const {
    const auto& s = shapes_[l];
    return ConstMatrixMap(values_.data() + s.weight_offset, s.fan_out, s.fan_in);
  }
  VectorMap bias(std::size_t l) {
    const auto& s = shapes_[l];
    return VectorMap(values_.data() + s.bias_offset, s.fan_out);
  }
  ConstVectorMap bias(std::size_t l) const {
    const auto& s = shapes_[l];
    return ConstVectorMap(values_.data() + s.bias_offset, s.fan_out);
  }

  void set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

  bool matches(const NetworkSpec& spec) const {
    const auto expected = layer_shapes(spec);
    if (expected.size() != shapes_.size() || values_.size() != param_count(spec)) return false;
    for (std::size_t l = 0; l < expected.size(); ++l)
      if (expected[l].fan_in != shapes_[l].fan_in || expected[l].fan_out != shapes_[l].fan_out) return false;
    return true;
  }

  friend bool operator==(const NetworkParams& a, const NetworkParams& b) { return a.values_ == b.values_; }

 private:
  std::vector<LayerShape> shapes_;
  // Aligned so Eigen's vectorized kernels split every layer the same way
  // regardless of where the buffer lands; otherwise results vary in the last bits.
  std::vector<double, Eigen::aligned_allocator<double>> values_;
};

inline double glorot_normal_stddev(Eigen::Index fan_in, Eigen::Index fan_out) {
  return std::sqrt(2.0 / static_cast<double>(fan_in + fan_out));
}

// Glorot-normal weights, zero biases. Layer l draws from stream
// (init_seed, l) in column-major order.
inline NetworkParams init_network(const NetworkSpec& spec, std::uint64_t init_seed) {
  NetworkParams params(spec);
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    const auto& s = params.shape(l);
    const double stddev = glorot_normal_stddev(s.fan_in, s.fan_out);
    CounterStream stream(init_seed, {0x1417ULL, static_cast<std::uint64_t>(l)});
    auto w = params.weights(l);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = stddev * stream.next_standard_normal();
  }
  return params;
}

// ---------------------------------------------------------------------------
// Activations. The ReLU derivative at exactly 0 is 0.

inline void apply_activation(Activation act, Eigen::MatrixXd& m) {
  switch (act) {
    case Activation::relu: m = m.cwiseMax(0.0); break;
    case Activation::tanh: m = m.array().tanh().matrix(); break;
    case Activation::sigmoid: m = (1.0 / (1.0 + (-m.array()).exp())).matrix(); break;
  }
}

// Multiplies `delta` in place by f'(pre) given pre-activations and outputs.
inline void scale_by_derivative(Activation act, const Eigen::MatrixXd& pre, const Eigen::MatrixXd& out,
                                Eigen::MatrixXd& delta) {
  switch (act) {
    case Activation::relu: delta = (pre.array() > 0.0).select(delta, 0.0); break;
    case Activation::tanh: delta.array() *= 1.0 - out.array().square(); break;
    case Activation::sigmoid: delta.array() *= out.array() * (1.0 - out.array()); break;
  }
}

// Per-layer buffers reused across batches.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> pre;  // affine outputs per layer
  std::vector<Eigen::MatrixXd> out;  // activations per hidden layer (last entry = network output)
};

// Columns of `inputs` are samples; returns output_dim x batch.
inline const Eigen::MatrixXd& forward_batch(const NetworkParams& params, const NetworkSpec& spec,
                                            const Eigen::MatrixXd& inputs, ForwardCache& cache) {
  if (!params.matches(spec)) throw ContractViolation("parameters do not match network spec");
  if (inputs.rows() != spec.input_dim) throw ContractViolation("input dimension does not match network spec");
  const auto layers = params.layer_count();
  cache.pre.resize(layers);
  cache.out.resize(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    const Eigen::MatrixXd& prev = l == 0 ? inputs : cache.out[l - 1];
    auto& pre = cache.pre[l];
    pre.resize(params.shape(l).fan_out, inputs.cols());
    pre.noalias() = params.weights(l) * prev;
    pre.colwise() += params.bias(l);
    cache.out[l] = pre;
    if (l + 1 < layers) apply_activation(spec.activation, cache.out[l]);
  }
  return cache.out.back();
}

inline Eigen::MatrixXd forward_batch(const NetworkParams& params, const NetworkSpec& spec,
                                     const Eigen::MatrixXd& inputs) {
  ForwardCache cache;
  return forward_batch(params, spec, inputs, cache);
}

// Single-sample prediction for a one-output network.
inline double forward(const NetworkParams& params, const NetworkSpec& spec, std::span<const double> input) {
  if (static_cast<int>(input.size()) != spec.input_dim)
    throw ContractViolation("input dimension does not match network spec");
  if (spec.output_dim != 1) throw ContractViolation("forward() expects a single-output network");
  Eigen::MatrixXd x = ConstVectorMap(input.data(), static_cast<Eigen::Index>(input.size()));
  return forward_batch(params, spec, x)(0, 0);
}

inline double loss_mse(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size()) throw ContractViolation("loss_mse: length mismatch");
  if (predictions.empty()) throw ContractViolation("loss_mse: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - targets[i];
    sum += d * d;
  }
  return sum / static_cast<double>(predictions.size());
}

struct BackwardWorkspace {
  ForwardCache cache;
  Eigen::MatrixXd delta;
  Eigen::MatrixXd delta_prev;
};

// Gradient of the batch-mean MSE (mean over samples and outputs) into
// `grads`. Returns the batch loss.
inline double backward(const NetworkParams& params, const NetworkSpec& spec, const Eigen::MatrixXd& inputs,
                       const Eigen::MatrixXd& targets, NetworkParams& grads, BackwardWorkspace& ws) {
  if (inputs.cols() == 0) throw ContractViolation("backward: empty batch");
  if (targets.rows() != spec.output_dim || targets.cols() != inputs.cols())
    throw ContractViolation("backward: target shape mismatch");
  if (!grads.matches(spec)) throw ContractViolation("backward: gradient buffer does not match network spec");
  const auto& y = forward_batch(params, spec, inputs, ws.cache);
  const double count = static_cast<double>(targets.size());
  ws.delta = y - targets;
  const double loss = ws.delta.squaredNorm() / count;
  ws.delta *= 2.0 / count;

  for (std::size_t l = params.layer_count(); l-- > 0;) {
    const Eigen::MatrixXd& prev = l == 0 ? inputs : ws.cache.out[l - 1];
    grads.weights(l).noalias() = ws.delta * prev.transpose();
    grads.bias(l).noalias() = ws.delta.rowwise().sum();
    if (l == 0) break;
    ws.delta_prev.noalias() = params.weights(l).transpose() * ws.delta;
    scale_by_derivative(spec.activation, ws.cache.pre[l - 1], ws.cache.out[l - 1], ws.delta_prev);
    ws.delta.swap(ws.delta_prev);
  }
  return loss;
}

inline double backward(const NetworkParams& params, const NetworkSpec& spec, const Eigen::MatrixXd& inputs,
                       const Eigen::MatrixXd& targets, NetworkParams& grads) {
  BackwardWorkspace ws;
  return backward(params, spec, inputs, targets, grads, ws);
}

}  // namespace nucaug
