// Copyright 2026 The gsbandit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace gsb {

//---------------------------------------------------------------------------//
/*!
 * Philox4x32-10 counter-based generator (Salmon et al., SC'11).
 *
 * Every draw is a pure function of (key, counter), so a simulation keyed by
 * (master seed, run, step) is reproducible independently of thread layout.
 * Constants and round structure follow the Random123 reference, so outputs
 * match its known-answer vectors bit for bit.
 */
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }
};

/// SplitMix64 finalizer; used to derive independent seeds from a master seed.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Named streams so different consumers of one seed never share counters.
enum class Stream : std::uint32_t {
  kRewards = 0,
  kWeights = 1,
  kConfig = 2,
  kPerturbation = 3,
};

/// 64 random bits at position `index` of stream `stream` under key `seed`.
constexpr std::uint64_t random_bits_at(std::uint64_t seed, std::uint64_t index, Stream stream) {
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                                static_cast<std::uint32_t>(stream), 0u};
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const auto out = Philox4x32::block(ctr, key);
  return (std::uint64_t{out[1]} << 32) | out[0];
}

/// Maps 64 random bits to a double in [0, 1) using the top 53 bits.
constexpr double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

constexpr double uniform_at(std::uint64_t seed, std::uint64_t index, Stream stream) {
  return to_unit(random_bits_at(seed, index, stream));
}

/// Sequential view of one Philox stream; satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  constexpr CounterRng(std::uint64_t seed, Stream stream) : seed_(seed), stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() { return random_bits_at(seed_, counter_++, stream_); }
  constexpr double uniform() { return to_unit((*this)()); }
  /// Uniform on [lo, hi], clamped so rounding never leaves the interval.
  constexpr double uniform(double lo, double hi) {
    const double x = lo + (hi - lo) * uniform();
    return x < lo ? lo : (x > hi ? hi : x);
  }

  [[nodiscard]] constexpr std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t seed_;
  Stream stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace gsb
