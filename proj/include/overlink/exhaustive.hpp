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
#include <cstdint>
#include <stdexcept>

#include "overlink/common.hpp"
#include "overlink/counters.hpp"
#include "overlink/qam.hpp"

namespace overlink {

inline constexpr int kMaxUsers = 6;
inline constexpr int kMaxRx = 8;
inline constexpr std::uint64_t kMaxJointPoints = 65536;  // M^K cap for search

/// Max-log prior cost of bit value v under LLR l = log P(0)/P(1):
/// zero when v matches the sign preference, |l| otherwise.
inline double prior_penalty(int v, double l) {
  return (1 - 2 * v) * l < 0.0 ? std::fabs(l) : 0.0;
}

struct JointDetectOptions {
  // Metric ||y - H s||^2 / sigma2 [+ ||s||^2 if augmented] + prior penalties.
  // The ||s||^2 term is the MMSE regularization used by the tree search; it
  // shifts all hypotheses by a constellation-energy term that does not cancel
  // per bit, so augmented and plain LLRs differ slightly by design.
  bool augmented = false;
  const double* prior_llrs = nullptr;  // K*bps, user-major, may be null
};

namespace detail {

struct ExhaustiveCtx {
  const cplx* h;  // K columns of n_rx entries each
  int n_rx, n_users;
  const Constellation* c;
  double inv_sigma2;
  bool augmented;
  double e_sym[64];          // |s|^2 per label
  double prior_cost[kMaxUsers][64];
  cplx resid[kMaxUsers + 1][kMaxRx];
  int path[kMaxUsers];
  double part_cost[kMaxUsers + 1];
  double best0[kMaxUsers * 6], best1[kMaxUsers * 6];
  ComplexityCounters* counters;

  void walk(int d) {
    const int m_count = c->order;
    if (d == n_users) {
      double e = 0.0;
      for (int r = 0; r < n_rx; ++r) e += abs2(resid[d][r]);
      const double metric = e * inv_sigma2 + part_cost[d];
      if (counters) {
        counters->add_sq(static_cast<std::uint64_t>(n_rx));
        counters->add_real(1);
      }
      const int bps = c->bps;
      for (int u = 0; u < n_users; ++u) {
        const int label = path[u];
        for (int b = 0; b < bps; ++b) {
          double* slot = ((label >> b) & 1) ? &best1[u * bps + b]
                                            : &best0[u * bps + b];
          if (metric < *slot) *slot = metric;
        }
      }
      return;
    }
    const cplx* col = h + static_cast<std::size_t>(d) * n_rx;
    for (int m = 0; m < m_count; ++m) {
      const cplx s = c->points[m];
      for (int r = 0; r < n_rx; ++r) resid[d + 1][r] = resid[d][r] - col[r] * s;
      if (counters) {
        counters->add_cm(static_cast<std::uint64_t>(n_rx));
        counters->nodes_visited++;
      }
      path[d] = m;
      part_cost[d + 1] =
          part_cost[d] + prior_cost[d][m] + (augmented ? e_sym[m] : 0.0);
      walk(d + 1);
    }
  }
};

}  // namespace detail

/// Brute-force max-log joint detection of K streams: enumerates all M^K
/// hypotheses with shared-prefix partial residuals.  LLR convention:
/// positive favors bit 0.  h holds K contiguous length-n_rx columns
/// (user u's channel at h + u*n_rx); out_llrs gets K*bps values user-major.
inline void exhaustive_maxlog(const cplx* y, const cplx* h, int n_rx,
                              int n_users, const Constellation& c,
                              double sigma2, const JointDetectOptions& opt,
                              double* out_llrs,
                              ComplexityCounters* counters = nullptr) {
  if (n_users < 1 || n_users > kMaxUsers || n_rx < 1 || n_rx > kMaxRx)
    throw std::invalid_argument("exhaustive_maxlog: unsupported dimensions");
  std::uint64_t leaves = 1;
  for (int u = 0; u < n_users; ++u) {
    leaves *= static_cast<std::uint64_t>(c.order);
    if (leaves > kMaxJointPoints)
      throw std::invalid_argument("exhaustive_maxlog: M^K exceeds search cap");
  }

  detail::ExhaustiveCtx ctx;
  ctx.h = h;
  ctx.n_rx = n_rx;
  ctx.n_users = n_users;
  ctx.c = &c;
  ctx.inv_sigma2 = 1.0 / (sigma2 > 0 ? sigma2 : 1e-300);
  ctx.augmented = opt.augmented;
  ctx.counters = counters;
  if (counters) counters->add_real(1);

  for (int m = 0; m < c.order; ++m) ctx.e_sym[m] = abs2(c.points[m]);
  for (int u = 0; u < n_users; ++u) {
    for (int m = 0; m < c.order; ++m) {
      double p = 0.0;
      if (opt.prior_llrs) {
        for (int b = 0; b < c.bps; ++b)
          p += prior_penalty((m >> b) & 1, opt.prior_llrs[u * c.bps + b]);
      }
      ctx.prior_cost[u][m] = p;
    }
  }
  for (int r = 0; r < n_rx; ++r) ctx.resid[0][r] = y[r];
  ctx.part_cost[0] = 0.0;
  const int n_bits = n_users * c.bps;
  for (int i = 0; i < n_bits; ++i) {
    ctx.best0[i] = kPosInf;
    ctx.best1[i] = kPosInf;
  }

  ctx.walk(0);

  for (int i = 0; i < n_bits; ++i) out_llrs[i] = ctx.best1[i] - ctx.best0[i];
  if (counters) {
    counters->re_detected++;
    counters->detector_runs++;
  }
}

}  // namespace overlink
