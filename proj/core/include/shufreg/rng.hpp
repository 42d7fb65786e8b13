#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>

namespace shufreg {

/// SplitMix64 finalizer: a bijective avalanche mix of 64 bits.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// FNV-1a over the bytes of a purpose tag.
constexpr std::uint64_t hash_tag(std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : tag) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Identifies one random stream. Streams with different keys never share
/// draws; keys are derived from a user seed plus a purpose tag, and can be
/// refined by integer indices (sample size, replication, ...).
struct StreamKey {
  std::uint64_t value = 0;

  static constexpr StreamKey derive(std::uint64_t seed, std::string_view purpose) noexcept {
    return StreamKey{mix64(mix64(seed) ^ hash_tag(purpose))};
  }

  [[nodiscard]] constexpr StreamKey child(std::uint64_t index) const noexcept {
    return StreamKey{mix64(value ^ mix64(index + 0x9e3779b97f4a7c15ULL))};
  }

  friend constexpr bool operator==(StreamKey, StreamKey) = default;
};

/// Counter-based generator. The k-th output of a stream is a pure function of
/// (key, k), so a stream can be replayed or split without shared state.
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(StreamKey key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    ++counter_;
    return mix64(key_.value + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Number of 64-bit draws consumed so far.
  [[nodiscard]] constexpr std::uint64_t draws() const noexcept { return counter_; }
  [[nodiscard]] constexpr StreamKey key() const noexcept { return key_; }

  /// Uniform on the open interval (0, 1); one draw.
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Integer in [0, bound) by the multiply-high map; one draw.
  std::uint64_t below(std::uint64_t bound) noexcept {
    __extension__ using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>((*this)()) * bound) >> 64);
  }

  /// Standard normal by Box-Muller (cosine branch only); two draws.
  double normal() noexcept {
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    return r * std::cos(2.0 * std::numbers::pi * uniform());
  }

  /// Exp(1) by inversion; one draw.
  double exponential() noexcept { return -std::log(uniform()); }

 private:
  StreamKey key_;
  std::uint64_t counter_ = 0;
};

}  // namespace shufreg
