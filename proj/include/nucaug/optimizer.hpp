#pragma once

// Adaptive-gradient optimizers over flat parameter buffers.
//
//   adam     m = b1 m + (1-b1) g ; v = b2 v + (1-b2) g^2
//            x -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
//   nadam    as adam, with the Nesterov look-ahead on the first moment
//            (constant momentum, no schedule):
//            x -= lr * (b1 m / (1-b1^(t+1)) + (1-b1) g / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
//   adamax   u = max(b2 u, |g|)
//            x -= lr / (1-b1^t) * m / (u + eps)
//   rmsprop  v = rho v + (1-rho) g^2 ; x -= lr * g / (sqrt(v) + eps)

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace nucaug {

enum class Algorithm { adam, nadam, adamax, rmsprop };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::adam: return "adam";
    case Algorithm::nadam: return "nadam";
    case Algorithm::adamax: return "adamax";
    case Algorithm::rmsprop: return "rmsprop";
  }
  return "?";
}

inline Algorithm algorithm_from_string(std::string_view s) {
  if (s == "adam") return Algorithm::adam;
  if (s == "nadam") return Algorithm::nadam;
  if (s == "adamax") return Algorithm::adamax;
  if (s == "rmsprop") return Algorithm::rmsprop;
  throw ConfigError("unknown optimizer '" + std::string(s) + "' (expected adam, nadam, adamax or rmsprop)");
}

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::adam;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double epsilon = 1e-8;
  double rmsprop_decay = 0.9;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    auto in_unit = [](double x) { return x >= 0.0 && x < 1.0; };
    if (!in_unit(beta1) || !in_unit(beta2) || !in_unit(rmsprop_decay))
      throw ConfigError("beta1, beta2 and rmsprop_decay must lie in [0, 1)");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  }

  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

struct OptimizerState {
  Algorithm algorithm = Algorithm::adam;
  std::uint64_t step = 0;
  std::vector<double> m;  // first moment (unused by rmsprop)
  std::vector<double> v;  // second moment, or infinity norm for adamax

  OptimizerState() = default;
  OptimizerState(Algorithm alg, std::size_t size) : algorithm(alg), m(size, 0.0), v(size, 0.0) {}
};

inline void optimizer_step(OptimizerState& state, const OptimizerConfig& config, std::span<double> params,
                           std::span<const double> grads) {
  if (state.algorithm != config.algorithm) throw ContractViolation("optimizer state belongs to another algorithm");
  if (state.m.size() != params.size() || state.v.size() != params.size() || grads.size() != params.size())
    throw ContractViolation("optimizer state shape does not match parameters");
  const std::size_t n = params.size();
  const double lr = config.learning_rate;
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  const double eps = config.epsilon;
  auto& m = state.m;
  auto& v = state.v;
  const auto t = static_cast<double>(++state.step);

  switch (config.algorithm) {
    case Algorithm::adam: {
      const double c1 = 1.0 - std::pow(b1, t);
      const double c2 = 1.0 - std::pow(b2, t);
      for (std::size_t i = 0; i < n; ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * grads[i];
        v[i] = b2 * v[i] + (1.0 - b2) * grads[i] * grads[i];
        params[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
      }
      break;
    }
    case Algorithm::nadam: {
      const double c1 = 1.0 - std::pow(b1, t);
      const double c1_next = 1.0 - std::pow(b1, t + 1.0);
      const double c2 = 1.0 - std::pow(b2, t);
      for (std::size_t i = 0; i < n; ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * grads[i];
        v[i] = b2 * v[i] + (1.0 - b2) * grads[i] * grads[i];
        const double look_ahead = b1 * m[i] / c1_next + (1.0 - b1) * grads[i] / c1;
        params[i] -= lr * look_ahead / (std::sqrt(v[i] / c2) + eps);
      }
      break;
    }
    case Algorithm::adamax: {
      const double step_size = lr / (1.0 - std::pow(b1, t));
      for (std::size_t i = 0; i < n; ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * grads[i];
        v[i] = std::max(b2 * v[i], std::abs(grads[i]));
        params[i] -= step_size * m[i] / (v[i] + eps);
      }
      break;
    }
    case Algorithm::rmsprop: {
      const double rho = config.rmsprop_decay;
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = rho * v[i] + (1.0 - rho) * grads[i] * grads[i];
        params[i] -= lr * grads[i] / (std::sqrt(v[i]) + eps);
      }
      break;
    }
  }
}

}  // namespace nucaug
