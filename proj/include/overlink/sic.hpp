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

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "overlink/common.hpp"
#include "overlink/counters.hpp"
#include "overlink/demap.hpp"
#include "overlink/exhaustive.hpp"  // kMaxUsers / kMaxRx bounds
#include "overlink/qam.hpp"

namespace overlink {

struct SicOptions {
  // Detection order (indices into the K users).  Null selects the order
  // adaptively: at every stage the remaining user with the largest
  // post-MMSE SINR is detected next.  The cost of evaluating the
  // candidates is part of the detector and is counted.
  const int* fixed_order = nullptr;
};

namespace detail {

/// In-place Cholesky A = L L^H of a Hermitian positive definite n x n
/// matrix (row-major); the strict upper triangle is left untouched.
inline void chol_inplace(cplx* a, int n, ComplexityCounters* counters) {
  for (int j = 0; j < n; ++j) {
    double d = a[j * n + j].real();
    for (int k = 0; k < j; ++k) d -= abs2(a[j * n + k]);
    if (counters) counters->add_sq(static_cast<std::uint64_t>(j));
    if (d < 1e-300) d = 1e-300;
    const double ljj = std::sqrt(d);
    a[j * n + j] = ljj;
    if (counters) counters->add_real(1);
    const double inv = 1.0 / ljj;
    if (counters && j + 1 < n) counters->add_real(1);
    for (int i = j + 1; i < n; ++i) {
      cplx s = a[i * n + j];
      for (int k = 0; k < j; ++k) s -= a[i * n + k] * std::conj(a[j * n + k]);
      a[i * n + j] = s * inv;
      if (counters) {
        counters->add_cm(static_cast<std::uint64_t>(j));
        counters->add_rc(1);
      }
    }
  }
}

/// Solves L L^H x = b given the Cholesky factor (lower, row-major).
inline void chol_solve(const cplx* l, int n, const cplx* b, cplx* x,
                       ComplexityCounters* counters) {
  cplx t[kMaxRx];
  for (int i = 0; i < n; ++i) {
    cplx s = b[i];
    for (int k = 0; k < i; ++k) s -= l[i * n + k] * t[k];
    t[i] = s / l[i * n + i].real();
    if (counters) {
      counters->add_cm(static_cast<std::uint64_t>(i));
      counters->add_rc(1);
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    cplx s = t[i];
    for (int k = i + 1; k < n; ++k) s -= std::conj(l[k * n + i]) * x[k];
    x[i] = s / l[i * n + i].real();
    if (counters) {
      counters->add_cm(static_cast<std::uint64_t>(n - 1 - i));
      counters->add_rc(1);
    }
  }
}

}  // namespace detail

/// Soft-output MMSE-SIC: per stage, MMSE-filter one user treating the rest
/// as noise, demap it exactly under the scalar Gaussian model
/// z = q*s + eta, Var(eta) = q*(1-q) with q = h^H (H_R H_R^H + sigma2 I)^-1 h,
/// then cancel its hard decision and downdate the covariance.
///
/// h holds K contiguous length-n_rx columns; out_llrs gets K*bps values
/// user-major (positive favors bit 0).  hard_labels (optional, length K)
/// receives the per-user hard decisions that were cancelled.
inline void mmse_sic_detect(const cplx* y_in, const cplx* h, int n_rx,
                            int n_users, const Constellation& c, double sigma2,
                            const SicOptions& opt, double* out_llrs,
                            ComplexityCounters* counters = nullptr,
                            int* hard_labels = nullptr) {
  if (n_users < 1 || n_users > kMaxUsers || n_rx < 1 || n_rx > kMaxRx)
    throw std::invalid_argument("mmse_sic_detect: unsupported dimensions");
  const double s2 = sigma2 > 0 ? sigma2 : 1e-300;

  cplx y[kMaxRx];
  for (int r = 0; r < n_rx; ++r) y[r] = y_in[r];

  // A = sigma2 I + sum_u h_u h_u^H, kept Hermitian-full for the solver.
  cplx a[kMaxRx * kMaxRx];
  for (int i = 0; i < n_rx; ++i) {
    for (int j = i; j < n_rx; ++j) {
      cplx s = i == j ? cplx{s2, 0.0} : cplx{0.0, 0.0};
      for (int u = 0; u < n_users; ++u) {
        const cplx* col = h + static_cast<std::size_t>(u) * n_rx;
        s += col[i] * std::conj(col[j]);
      }
      a[i * n_rx + j] = s;
      a[j * n_rx + i] = std::conj(s);
      if (counters) {
        if (i == j)
          counters->add_sq(static_cast<std::uint64_t>(n_users));
        else
          counters->add_cm(static_cast<std::uint64_t>(n_users));
      }
    }
  }

  bool remaining[kMaxUsers];
  std::fill(remaining, remaining + n_users, true);
  cplx lw[kMaxRx * kMaxRx];
  cplx x[kMaxRx], w[kMaxRx];

  for (int stage = 0; stage < n_users; ++stage) {
    for (int i = 0; i < n_rx * n_rx; ++i) lw[i] = a[i];
    detail::chol_inplace(lw, n_rx, counters);

    int pick = -1;
    double pick_q = -1.0;
    if (opt.fixed_order) {
      pick = opt.fixed_order[stage];
      if (pick < 0 || pick >= n_users || !remaining[pick])
        throw std::invalid_argument("mmse_sic_detect: bad fixed order");
    }
    for (int u = 0; u < n_users; ++u) {
      if (!remaining[u]) continue;
      if (opt.fixed_order && u != pick) continue;
      const cplx* col = h + static_cast<std::size_t>(u) * n_rx;
      detail::chol_solve(lw, n_rx, col, x, counters);
      double q = 0.0;
      for (int r = 0; r < n_rx; ++r)
        q += (std::conj(col[r]) * x[r]).real();
      if (counters) counters->add_cm(static_cast<std::uint64_t>(n_rx));
      if (q > pick_q) {
        pick_q = q;
        pick = u;
        for (int r = 0; r < n_rx; ++r) w[r] = x[r];
      }
    }

    const cplx* col = h + static_cast<std::size_t>(pick) * n_rx;
    cplx z{0.0, 0.0};
    for (int r = 0; r < n_rx; ++r) z += std::conj(w[r]) * y[r];
    if (counters) counters->add_cm(static_cast<std::uint64_t>(n_rx));

    // q in (0,1); clamp guards estimated channels that are nearly singular
    const double q = std::clamp(pick_q, 1e-12, 1.0 - 1e-12);
    const double nv = q * (1.0 - q);
    if (counters) counters->add_real(1);

    int hard = 0;
    scalar_maxlog_demap(z, q, nv, c, out_llrs + pick * c.bps, counters, &hard);
    if (hard_labels) hard_labels[pick] = hard;

    remaining[pick] = false;
    if (stage + 1 == n_users) break;

    const cplx s_hat = c.points[hard];
    for (int r = 0; r < n_rx; ++r) y[r] -= col[r] * s_hat;
    if (counters) counters->add_cm(static_cast<std::uint64_t>(n_rx));
    for (int i = 0; i < n_rx; ++i) {
      for (int j = i; j < n_rx; ++j) {
        const cplx d = col[i] * std::conj(col[j]);
        a[i * n_rx + j] -= d;
        a[j * n_rx + i] = std::conj(a[i * n_rx + j]);
        if (counters) {
          if (i == j)
            counters->add_sq(1);
          else
            counters->add_cm(1);
        }
      }
    }
  }

  if (counters) {
    counters->re_detected++;
    counters->detector_runs++;
  }
}

/// Two-user power-domain SIC: the higher-power stream is detected first by
/// design rather than adaptively.  Power asymmetry is expected to already be
/// folded into the effective columns of h; strong_user says which one it is.
inline void noma2_sic_detect(const cplx* y, const cplx* h, int n_rx,
                             const Constellation& c, double sigma2,
                             int strong_user, double* out_llrs,
                             ComplexityCounters* counters = nullptr,
                             int* hard_labels = nullptr) {
  if (strong_user < 0 || strong_user > 1)
    throw std::invalid_argument("noma2_sic_detect: strong_user must be 0 or 1");
  const int order[2] = {strong_user, 1 - strong_user};
  SicOptions opt;
  opt.fixed_order = order;
  mmse_sic_detect(y, h, n_rx, 2, c, sigma2, opt, out_llrs, counters,
                  hard_labels);
}

}  // namespace overlink
