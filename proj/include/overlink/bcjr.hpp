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
#include "overlink/convcode.hpp"

namespace overlink {

/// Branch tables of the 64-state mother code trellis.
struct ConvTrellis {
  std::array<std::array<std::uint8_t, 2>, 64> next{};
  std::array<std::array<std::uint8_t, 2>, 64> out0{};
  std::array<std::array<std::uint8_t, 2>, 64> out1{};

  static const ConvTrellis& get() {
    static const ConvTrellis t = make();
    return t;
  }

 private:
  static ConvTrellis make() {
    ConvTrellis t;
    for (int s = 0; s < 64; ++s) {
      for (int u = 0; u < 2; ++u) {
        const std::uint32_t window = ((static_cast<std::uint32_t>(s) << 1) | u) & 0x7F;
        t.next[s][u] = static_cast<std::uint8_t>(window & 0x3F);
        t.out0[s][u] = static_cast<std::uint8_t>(std::popcount(window & kConvPolyA) & 1);
        t.out1[s][u] = static_cast<std::uint8_t>(std::popcount(window & kConvPolyB) & 1);
      }
    }
    return t;
  }
};

struct BcjrResult {
  std::vector<double> info_llr;         // posterior LLRs, positive favours bit 0
  std::vector<std::uint8_t> info_bits;  // hard decisions from info_llr
  std::vector<double> coded_extrinsic;  // mother-domain: posterior minus input
};

/// Max-log BCJR for the zero-terminated mother code.
///
/// Inputs are mother-domain LLRs (2 per trellis step, zeros at punctured
/// positions) and optional a priori LLRs on the info bits.  All LLRs follow
/// the positive-means-zero convention.  The branch metric is
///   0.5*(1-2*a)*La + 0.5*(1-2*b)*Lb + 0.5*(1-2*u)*Lprior,
/// under which the output posteriors are exact max-log word posteriors: the
/// difference of the best codeword metrics with the bit pinned to 0 and 1.
///
/// Coded extrinsics subtract the corresponding input LLR from the coded-bit
/// posterior; iterative receivers feed exactly these back to the detector.
class BcjrDecoder {
 public:
  BcjrResult decode(const std::vector<double>& mother_llrs, int n_info,
                    const std::vector<double>* info_priors = nullptr) {
    const ConvTrellis& tr = ConvTrellis::get();
    const int n_steps = n_info + kConvMemory;
    if (static_cast<int>(mother_llrs.size()) != 2 * n_steps) {
      throw std::invalid_argument("bcjr: LLR length does not match info length");
    }
    constexpr double kFloor = -1e300;

    alpha_.assign(static_cast<std::size_t>(n_steps + 1) * 64, kFloor);
    alpha_[0] = 0.0;  // state 0 at t = 0

    // Forward pass.
    for (int t = 0; t < n_steps; ++t) {
      const double la = mother_llrs[2 * t];
      const double lb = mother_llrs[2 * t + 1];
      const double lp = (info_priors && t < n_info) ? (*info_priors)[t] : 0.0;
      // Half-metrics per (coded pair, input bit) combination.
      double g[2][2][2];
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          const double base = 0.5 * ((1 - 2 * a) * la + (1 - 2 * b) * lb);
          g[a][b][0] = base + 0.5 * lp;
          g[a][b][1] = base - 0.5 * lp;
        }
      }
      const double* cur = alpha_.data() + static_cast<std::size_t>(t) * 64;
      double* nxt = alpha_.data() + static_cast<std::size_t>(t + 1) * 64;
      const int u_max = t < n_info ? 2 : 1;  // tail forces zeros
      for (int s = 0; s < 64; ++s) {
        const double a_s = cur[s];
        if (a_s <= kFloor) continue;
        for (int u = 0; u < u_max; ++u) {
          const double m = a_s + g[tr.out0[s][u]][tr.out1[s][u]][u];
          double& dst = nxt[tr.next[s][u]];
          if (m > dst) dst = m;
        }
      }
    }

    BcjrResult res;
    res.info_llr.assign(static_cast<std::size_t>(n_info), 0.0);
    res.info_bits.assign(static_cast<std::size_t>(n_info), 0);
    res.coded_extrinsic.assign(static_cast<std::size_t>(2 * n_steps), 0.0);

    // Backward pass with on-the-fly output computation.
    beta_.assign(64, kFloor);
    beta_next_.assign(64, kFloor);
    beta_next_[0] = 0.0;  // terminated in state 0
    for (int t = n_steps - 1; t >= 0; --t) {
      const double la = mother_llrs[2 * t];
      const double lb = mother_llrs[2 * t + 1];
      const double lp = (info_priors && t < n_info) ? (*info_priors)[t] : 0.0;
      double g[2][2][2];
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          const double base = 0.5 * ((1 - 2 * a) * la + (1 - 2 * b) * lb);
          g[a][b][0] = base + 0.5 * lp;
          g[a][b][1] = base - 0.5 * lp;
        }
      }
      const double* cur = alpha_.data() + static_cast<std::size_t>(t) * 64;
      const int u_max = t < n_info ? 2 : 1;
      double best_u[2] = {kFloor, kFloor};
      double best_a[2] = {kFloor, kFloor};
      double best_b[2] = {kFloor, kFloor};
      for (int s = 0; s < 64; ++s) beta_[s] = kFloor;
      for (int s = 0; s < 64; ++s) {
        const double a_s = cur[s];
        for (int u = 0; u < u_max; ++u) {
          const int o0 = tr.out0[s][u];
          const int o1 = tr.out1[s][u];
          const double gamma = g[o0][o1][u];
          const double bn = beta_next_[tr.next[s][u]];
          // Backward recursion does not depend on alpha.
          const double bm = gamma + bn;
          if (bm > beta_[s]) beta_[s] = bm;
          if (a_s <= kFloor || bn <= kFloor) continue;
          const double full = a_s + gamma + bn;
          if (full > best_u[u]) best_u[u] = full;
          if (full > best_a[o0]) best_a[o0] = full;
          if (full > best_b[o1]) best_b[o1] = full;
        }
      }
      if (t < n_info) {
        const double llr = best_u[0] - best_u[1];
        res.info_llr[t] = llr;
        res.info_bits[t] = llr < 0.0 ? 1 : 0;
      }
      res.coded_extrinsic[2 * t] = (best_a[0] - best_a[1]) - la;
      res.coded_extrinsic[2 * t + 1] = (best_b[0] - best_b[1]) - lb;
      std::swap(beta_, beta_next_);
    }
    return res;
  }

 private:
  std::vector<double> alpha_;
  std::vector<double> beta_;
  std::vector<double> beta_next_;
};

inline BcjrResult bcjr_decode(const std::vector<double>& mother_llrs, int n_info,
                              const std::vector<double>* info_priors = nullptr) {
  thread_local BcjrDecoder decoder;
  return decoder.decode(mother_llrs, n_info, info_priors);
}

}  // namespace overlink
