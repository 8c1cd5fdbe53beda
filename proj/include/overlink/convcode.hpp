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

#include <bit>
#include <cstdint>
#include <vector>

#include "overlink/config.hpp"

namespace overlink {

// Rate-1/2 convolutional mother code, constraint length 7, generators
// 133/171 (octal), terminated with six zero tail bits.  Generator words are
// packed with bit k holding the coefficient of the input delayed by k.
inline constexpr std::uint32_t kConvPolyA = 0x6D;  // 133 octal
inline constexpr std::uint32_t kConvPolyB = 0x4F;  // 171 octal
inline constexpr int kConvMemory = 6;

/// Encodes info bits plus six tail zeros into the mother stream
/// [a0 b0 a1 b1 ...], length 2 * (n_info + 6).
inline std::vector<std::uint8_t> conv_encode(
    const std::vector<std::uint8_t>& info_bits) {
  const std::size_t n_in = info_bits.size() + kConvMemory;
  std::vector<std::uint8_t> mother(2 * n_in);
  std::uint32_t window = 0;
  for (std::size_t t = 0; t < n_in; ++t) {
    const std::uint32_t u = t < info_bits.size() ? (info_bits[t] & 1) : 0;
    window = ((window << 1) | u) & 0x7F;
    mother[2 * t] = static_cast<std::uint8_t>(std::popcount(window & kConvPolyA) & 1);
    mother[2 * t + 1] = static_cast<std::uint8_t>(std::popcount(window & kConvPolyB) & 1);
  }
  return mother;
}

/// Periodic map from the mother stream onto transmitted bits.  Rates above
/// 1/2 puncture mother bits; rates below repeat them (the receiver adds the
/// LLRs of repeated copies, recovering the energy).
///
/// 'emit' lists offsets into one mother period of 2 * period_in bits, in
/// transmission order.
struct RatePattern {
  int period_in = 1;      // input bits per period
  int period_mother = 2;  // mother bits per period
  std::vector<int> emit;  // transmitted offsets within one period

  static const RatePattern& get(const Rate& rate) {
    static const RatePattern r12{1, 2, {0, 1}};
    static const RatePattern r23{2, 4, {0, 1, 2}};
    static const RatePattern r34{3, 6, {0, 1, 3, 4}};
    static const RatePattern r13{1, 2, {0, 1, 0}};
    static const RatePattern r14{1, 2, {0, 1, 0, 1}};
    if (rate == Rate{1, 2}) return r12;
    if (rate == Rate{2, 3}) return r23;
    if (rate == Rate{3, 4}) return r34;
    if (rate == Rate{1, 3}) return r13;
    if (rate == Rate{1, 4}) return r14;
    throw ConfigError("code_rate: unsupported rate " + to_string(rate));
  }

 private:
  RatePattern(int pi, int pm, std::vector<int> e)
      : period_in(pi), period_mother(pm), emit(std::move(e)) {}
};

/// Mother stream -> transmitted stream.
inline std::vector<std::uint8_t> rate_match(
    const std::vector<std::uint8_t>& mother, const Rate& rate) {
  const RatePattern& pat = RatePattern::get(rate);
  const std::size_t n_periods = mother.size() / pat.period_mother;
  std::vector<std::uint8_t> out;
  out.reserve(n_periods * pat.emit.size());
  for (std::size_t p = 0; p < n_periods; ++p) {
    for (int off : pat.emit) {
      out.push_back(mother[p * pat.period_mother + off]);
    }
  }
  return out;
}

/// Transmitted-stream LLRs -> mother-stream LLRs.  Punctured positions get
/// zero (no channel information); repeated positions accumulate.
inline std::vector<double> derate_match(const std::vector<double>& coded_llrs,
                                        const Rate& rate, int n_mother) {
  const RatePattern& pat = RatePattern::get(rate);
  std::vector<double> mother(static_cast<std::size_t>(n_mother), 0.0);
  const std::size_t n_periods = static_cast<std::size_t>(n_mother) / pat.period_mother;
  std::size_t i = 0;
  for (std::size_t p = 0; p < n_periods; ++p) {
    for (int off : pat.emit) {
      mother[p * pat.period_mother + off] += coded_llrs[i++];
    }
  }
  return mother;
}

/// Mother-stream values -> transmitted-stream values (used to push decoder
/// extrinsics back through the rate matcher; repeated positions both carry
/// the same mother value).
inline std::vector<double> rerate_match(const std::vector<double>& mother_vals,
                                        const Rate& rate) {
  const RatePattern& pat = RatePattern::get(rate);
  const std::size_t n_periods = mother_vals.size() / pat.period_mother;
  std::vector<double> out;
  out.reserve(n_periods * pat.emit.size());
  for (std::size_t p = 0; p < n_periods; ++p) {
    for (int off : pat.emit) {
      out.push_back(mother_vals[p * pat.period_mother + off]);
    }
  }
  return out;
}

/// Convenience: encode + rate match in one step.
inline std::vector<std::uint8_t> encode_block(
    const std::vector<std::uint8_t>& info_bits, const Rate& rate) {
  return rate_match(conv_encode(info_bits), rate);
}

}  // namespace overlink
