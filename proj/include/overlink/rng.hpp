/*
 * Copyright 2026 The overlink Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "overlink/common.hpp"

namespace overlink {

// All randomness in the simulator flows through this generator so that runs
// are reproducible bit for bit across platforms and worker counts.  The
// standard <random> distributions are deliberately avoided: their outputs are
// implementation defined, which would tie results to a particular libstdc++.

/// splitmix64 finalizer.  Good avalanche behaviour, cheap, stable.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

/// Derives an independent stream seed from (master, label, index).
///
/// A pure function of its arguments: no global state, no ordering
/// requirements.  Labels are short path-like strings ("fading/ue2/rx0");
/// distinct labels or indices give unrelated seeds.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view label,
                                 std::uint64_t index = 0) {
  std::uint64_t h = mix64(master_seed + 0x9e3779b97f4a7c15ULL);
  for (unsigned char c : label) {
    h = mix64(h ^ (static_cast<std::uint64_t>(c) * 0xff51afd7ed558ccdULL));
  }
  h = mix64(h ^ mix64(index + 0x2545f4914f6cdd1dULL));
  return h;
}

/// xoshiro256++ generator seeded through splitmix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 1) {
    std::uint64_t sm = seed;
    for (auto& word : state_) {
      sm += 0x9e3779b97f4a7c15ULL;
      word = mix64(sm);
    }
    have_spare_ = false;
    spare_ = 0.0;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound).  bound must be positive.
  std::uint64_t bounded(std::uint64_t bound) {
    // Rejection sampling on the top bits; bias-free.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  /// Standard normal via Box-Muller; caches the second deviate.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // 1 - uniform() lies in (0, 1], keeping the log argument positive.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * kPi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  /// Circularly symmetric complex Gaussian, unit variance (0.5 per axis).
  cplx cgaussian() {
    const double re = gaussian();
    const double im = gaussian();
    return cplx(re * 0.7071067811865475244, im * 0.7071067811865475244);
  }

  /// Fisher-Yates shuffle, stable across platforms.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  bool have_spare_;
  double spare_;
};

}  // namespace overlink
