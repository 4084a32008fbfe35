#pragma once

// Counter-based deterministic random streams.
//
// Every stream is addressed by a key built from integers (a seed plus any
// number of indices). The n-th value of a stream is a pure function of
// (key, n), so draws for one nucleus or one resample pass never depend on
// how many values were consumed elsewhere. This is what makes cumulative
// resampling and parallel generation reproducible.
//
// Normal deviates use the Box-Muller cosine branch and always consume two
// uniforms per draw. Uniforms carry 53 random bits.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <span>
#include <vector>

#include "errors.hpp"

namespace nucaug {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t combine_key(std::uint64_t key, std::uint64_t value) noexcept {
  return mix64(key ^ mix64(value + 0x632be59bd9b4e019ULL));
}

class CounterStream {
 public:
  CounterStream() = default;

  explicit CounterStream(std::uint64_t seed) : key_(mix64(seed)) {}

  CounterStream(std::uint64_t seed, std::initializer_list<std::uint64_t> indices) : key_(mix64(seed)) {
    for (auto idx : indices) key_ = combine_key(key_, idx);
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t position() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept { return mix64(key_ ^ mix64(counter_++)); }

  // Uniform in [0, 1).
  double next_uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1].
  double next_uniform_open_low() noexcept { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  // Standard normal via Box-Muller; consumes exactly two stream values.
  double next_standard_normal() noexcept {
    const double u1 = next_uniform_open_low();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t next_below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % bound;
  }

 private:
  std::uint64_t key_ = mix64(0);
  std::uint64_t counter_ = 0;
};

// Fisher-Yates shuffle driven by a counter stream.
template <typename T>
void shuffle_in_place(std::span<T> items, CounterStream& stream) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(stream.next_below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace nucaug
