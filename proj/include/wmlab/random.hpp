/*
 * Copyright 2026 The wmlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Keyed mixing and seeded random streams.
//
// Every pseudo-random decision in the toolkit goes through one of two paths:
//
//   * prf(secret, a, b): a stateless keyed function used for watermark
//     partitions and key sequences. It must be reproducible across builds, so
//     the mixer is fixed: the SplitMix64 finalizer (Steele, Lea & Flood),
//     constants 0xbf58476d1ce4e5b9 / 0x94d049bb133111eb, shifts 30/27/31.
//
//   * Rng: a seeded std::mt19937_64 stream for sampling, attacks and data
//     splits. Uniform doubles are taken from the top 53 bits directly rather
//     than through std::uniform_real_distribution, whose algorithm is
//     implementation-defined.

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace wmlab {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Keyed pseudo-random function over (secret, a, b).
constexpr std::uint64_t prf(std::uint64_t secret, std::uint64_t a,
                            std::uint64_t b) noexcept {
  std::uint64_t h = mix64(secret + kGoldenGamma);
  h = mix64(h ^ (a + 2 * kGoldenGamma));
  h = mix64(h ^ (b + 3 * kGoldenGamma));
  return h;
}

// Maps 64 random bits to the open interval (0, 1).
constexpr double bits_to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

// Order-sensitive hash of a token window.
inline std::uint64_t hash_ids(std::span<const std::uint32_t> ids) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc909ULL ^ ids.size();
  for (std::uint32_t id : ids) h = mix64(h ^ (id + kGoldenGamma));
  return h;
}

inline std::uint64_t hash_string(std::string_view s) noexcept {
  // FNV-1a 64
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Derives an independent stream seed from a base seed and a list of labels.
template <typename... Parts>
constexpr std::uint64_t derive_seed(std::uint64_t base, Parts... parts) noexcept {
  std::uint64_t h = mix64(base ^ 0x243f6a8885a308d3ULL);
  ((h = mix64(h ^ (static_cast<std::uint64_t>(parts) + kGoldenGamma))), ...);
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Lemire-style rejection keeps it unbiased.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    shuffle(std::span<T>(items));
  }

  // Samples an index from an unnormalized non-negative weight vector.
  std::size_t categorical(std::span<const double> weights, double total) {
    double u = uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0.0) return i;
    }
    // Rounding can leave u marginally positive; fall back to the last
    // index with positive weight.
    for (std::size_t i = weights.size(); i > 0; --i) {
      if (weights[i - 1] > 0.0) return i - 1;
    }
    return 0;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace wmlab
