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

#include <cmath>

#include "overlink/common.hpp"
#include "overlink/counters.hpp"
#include "overlink/qam.hpp"

namespace overlink {

/// Max-log LLRs for one square-QAM symbol seen through an effective scalar
/// channel z = gain * s + eta, Var(eta) = noise_var, gain real > 0.
///
/// Because the constellation is a product of two PAM axes and the metric
/// |z - gain*s|^2 separates into I and Q parts, the per-bit minima can be
/// taken per axis; the result is the exact max-log LLR, not an approximation.
/// out_llrs gets bps values, positive meaning bit 0 more likely.
inline void scalar_maxlog_demap(cplx z, double gain, double noise_var,
                                const Constellation& c, double* out_llrs,
                                ComplexityCounters* counters,
                                int* hard_label = nullptr) {
  const double inv = 1.0 / (noise_var > 0 ? noise_var : 1e-300);
  // Per-axis metric for level a: (gain*a)^2/nv - 2*(gain*a)*zaxis/nv, offsets
  // common to both hypotheses cancel in the LLR.
  const double gs = gain * inv;
  const double gi = gain * gs;
  const double zr2 = 2.0 * z.real() * gs;
  const double zi2 = 2.0 * z.imag() * gs;
  if (counters) counters->add_real(5);  // div, gs, gi, zr2, zi2 (doubling is free)

  const int nl = 1 << c.bps_axis;
  double axis_cost[8];
  int hard = 0;
  for (int axis = 0; axis < 2; ++axis) {
    const double zs = axis == 0 ? zr2 : zi2;
    int arg = 0;
    for (int m = 0; m < nl; ++m) {
      const double a = c.axis_levels[m];
      axis_cost[m] = gi * (a * a) - zs * a;  // a*a is constellation data, free
      if (counters) counters->add_real(2);
      if (axis_cost[m] < axis_cost[arg]) arg = m;
    }
    for (int b = 0; b < c.bps_axis; ++b) {
      double m0 = kPosInf, m1 = kPosInf;
      for (int m = 0; m < nl; ++m) {
        if ((m >> b) & 1) {
          if (axis_cost[m] < m1) m1 = axis_cost[m];
        } else {
          if (axis_cost[m] < m0) m0 = axis_cost[m];
        }
      }
      // axis bit b sits at interleaved stream position 2b (I) or 2b+1 (Q)
      out_llrs[2 * b + axis] = m1 - m0;
      hard |= ((arg >> b) & 1) << (2 * b + axis);
    }
  }
  if (hard_label) *hard_label = hard;
}

/// Exact max-log demap of a single user through its vector channel h
/// (n_rx entries), y = h*s + n with per-component noise variance sigma2.
/// Matched filtering is lossless for one stream, so this equals the full
/// per-bit search over the constellation.
inline void single_user_demap(const cplx* y, const cplx* h, int n_rx,
                              const Constellation& c, double sigma2,
                              double* out_llrs, ComplexityCounters* counters) {
  cplx z{0.0, 0.0};
  double g = 0.0;
  for (int r = 0; r < n_rx; ++r) {
    z += std::conj(h[r]) * y[r];
    g += abs2(h[r]);
  }
  if (counters) {
    counters->add_cm(static_cast<std::uint64_t>(n_rx));
    counters->add_sq(static_cast<std::uint64_t>(n_rx));
  }
  // z = g*s + eta with Var(eta) = g*sigma2.
  scalar_maxlog_demap(z, g, g * sigma2, c, out_llrs, counters);
  if (counters) counters->add_real(1);
}

}  // namespace overlink
