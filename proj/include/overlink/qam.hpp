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

#include <array>
#include <cstdint>
#include <vector>

#include "overlink/common.hpp"
#include "overlink/config.hpp"

namespace overlink {

/// Square QAM with the per-axis Gray labelling used by the 5G NR modulation
/// mapper.  A symbol carries bits b0..b(bps-1) in stream order; even stream
/// positions select the in-phase level, odd positions the quadrature level:
///
///   QPSK : (1-2*b0), (1-2*b1), scaled by 1/sqrt(2)
///   16QAM: (1-2*b0)*(2-(1-2*b2)), I bits (b0, b2), scaled by 1/sqrt(10)
///   64QAM: (1-2*b0)*(4-(1-2*b2)*(2-(1-2*b4))), scaled by 1/sqrt(42)
///
/// Each axis is Gray coded (amplitude-adjacent levels differ in one bit) and
/// the constellation has unit average energy.
struct Constellation {
  int order = 4;
  int bps = 2;
  int bps_axis = 1;
  std::array<double, 8> axis_levels{};  // indexed by the packed axis label
  std::array<cplx, 64> points{};        // indexed by the packed symbol label

  /// Packed I-axis label: bits from even stream positions.
  int i_label(int sym) const {
    int lbl = 0;
    for (int k = 0; k < bps_axis; ++k) lbl |= ((sym >> (2 * k)) & 1) << k;
    return lbl;
  }

  /// Packed Q-axis label: bits from odd stream positions.
  int q_label(int sym) const {
    int lbl = 0;
    for (int k = 0; k < bps_axis; ++k) lbl |= ((sym >> (2 * k + 1)) & 1) << k;
    return lbl;
  }

  static const Constellation& get(int order) {
    static const Constellation qpsk = make(4);
    static const Constellation qam16 = make(16);
    static const Constellation qam64 = make(64);
    switch (order) {
      case 4: return qpsk;
      case 16: return qam16;
      case 64: return qam64;
      default: throw ConfigError("modulation: unsupported order " +
                                 std::to_string(order));
    }
  }

 private:
  static Constellation make(int order) {
    Constellation c;
    c.order = order;
    c.bps = order == 4 ? 2 : (order == 16 ? 4 : 6);
    c.bps_axis = c.bps / 2;
    const double scale =
        order == 4 ? 1.0 / std::sqrt(2.0)
                   : (order == 16 ? 1.0 / std::sqrt(10.0) : 1.0 / std::sqrt(42.0));
    for (int lbl = 0; lbl < (1 << c.bps_axis); ++lbl) {
      const int b0 = lbl & 1;
      const int b1 = (lbl >> 1) & 1;
      const int b2 = (lbl >> 2) & 1;
      double v = 0.0;
      if (c.bps_axis == 1) {
        v = 1.0 - 2.0 * b0;
      } else if (c.bps_axis == 2) {
        v = (1.0 - 2.0 * b0) * (2.0 - (1.0 - 2.0 * b1));
      } else {
        v = (1.0 - 2.0 * b0) * (4.0 - (1.0 - 2.0 * b1) * (2.0 - (1.0 - 2.0 * b2)));
      }
      c.axis_levels[lbl] = v * scale;
    }
    for (int sym = 0; sym < order; ++sym) {
      c.points[sym] =
          cplx(c.axis_levels[c.i_label(sym)], c.axis_levels[c.q_label(sym)]);
    }
    return c;
  }
};

/// Maps a coded bit stream onto constellation symbols, bps bits per symbol,
/// first bit in the lowest label position.
inline std::vector<cplx> map_qam(const std::vector<std::uint8_t>& bits,
                                 int order) {
  const Constellation& c = Constellation::get(order);
  if (bits.size() % c.bps != 0) {
    throw std::invalid_argument("map_qam: bit count not a multiple of bits per symbol");
  }
  std::vector<cplx> symbols(bits.size() / c.bps);
  for (std::size_t s = 0; s < symbols.size(); ++s) {
    int label = 0;
    for (int k = 0; k < c.bps; ++k) {
      label |= static_cast<int>(bits[s * c.bps + k] & 1) << k;
    }
    symbols[s] = c.points[label];
  }
  return symbols;
}

}  // namespace overlink
