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
#include <vector>

#include "overlink/common.hpp"
#include "overlink/counters.hpp"
#include "overlink/exhaustive.hpp"
#include "overlink/qam.hpp"

namespace overlink {

/// Column-pivoted Cholesky factor of the regularized Gram matrix
/// G = H^H H + sigma2 I, i.e. P^T G P = L L^H with L lower triangular and a
/// real positive diagonal.  The pivot rule takes the column with the smallest
/// updated diagonal first, which sorts streams so the tree search fixes the
/// strongest stream at the root; it is the same ordering a sorted QR of the
/// noise-augmented matrix [H; sigma I] produces (see AugmentedQr).
struct PivotedGramChol {
  int n = 0;
  cplx l[kMaxUsers * kMaxUsers];  // row-major lower triangle
  int perm[kMaxUsers];            // perm[j] = original column at position j
};

inline PivotedGramChol pivoted_gram_chol(const cplx* h, int n_rx, int n_users,
                                         double sigma2,
                                         ComplexityCounters* counters) {
  PivotedGramChol out;
  out.n = n_users;
  cplx g[kMaxUsers * kMaxUsers];
  for (int i = 0; i < n_users; ++i) {
    const cplx* ci = h + static_cast<std::size_t>(i) * n_rx;
    for (int j = i; j < n_users; ++j) {
      const cplx* cj = h + static_cast<std::size_t>(j) * n_rx;
      cplx s = i == j ? cplx{sigma2, 0.0} : cplx{0.0, 0.0};
      for (int r = 0; r < n_rx; ++r) s += std::conj(ci[r]) * cj[r];
      g[i * n_users + j] = s;
      g[j * n_users + i] = std::conj(s);
      if (counters) {
        if (i == j)
          counters->add_sq(static_cast<std::uint64_t>(n_rx));
        else
          counters->add_cm(static_cast<std::uint64_t>(n_rx));
      }
    }
  }

  double d[kMaxUsers];
  for (int i = 0; i < n_users; ++i) {
    d[i] = g[i * n_users + i].real();
    out.perm[i] = i;
  }
  cplx* l = out.l;
  for (int j = 0; j < n_users; ++j) {
    int p = j;
    for (int i = j + 1; i < n_users; ++i)
      if (d[i] < d[p]) p = i;
    if (p != j) {
      std::swap(d[p], d[j]);
      std::swap(out.perm[p], out.perm[j]);
      for (int k = 0; k < j; ++k)
        std::swap(l[p * n_users + k], l[j * n_users + k]);
    }
    double dj = d[j] > 1e-300 ? d[j] : 1e-300;
    const double ljj = std::sqrt(dj);
    l[j * n_users + j] = ljj;
    const double inv = 1.0 / ljj;
    if (counters) counters->add_real(2);  // sqrt + reciprocal
    for (int i = j + 1; i < n_users; ++i) {
      cplx s = g[out.perm[i] * n_users + out.perm[j]];
      for (int k = 0; k < j; ++k)
        s -= l[i * n_users + k] * std::conj(l[j * n_users + k]);
      s *= inv;
      l[i * n_users + j] = s;
      d[i] -= abs2(s);
      if (counters) {
        counters->add_cm(static_cast<std::uint64_t>(j));
        counters->add_rc(1);
        counters->add_sq(1);
      }
    }
  }
  return out;
}

/// Sorted QR decomposition of the noise-augmented channel [H; sigma I]
/// (modified Gram-Schmidt, explicit Q).  Columns are pivoted by smallest
/// residual norm first, the same rule as pivoted_gram_chol, so R here equals
/// L^H from that factorization and perm matches.  This is the companion
/// orthogonal form used for cross-checking; the detector itself goes through
/// the Gram matrix, which is cheaper when n_rx < K.
struct AugmentedQr {
  int n_rows = 0;
  int n_cols = 0;
  std::vector<cplx> q;  // row-major n_rows x n_cols, orthonormal columns
  std::vector<cplx> r;  // row-major n_cols x n_cols upper, real positive diag
  std::vector<int> perm;

  static AugmentedQr compute(const cplx* h, int n_rx, int n_users,
                             double sigma) {
    AugmentedQr out;
    const int rows = n_rx + n_users;
    out.n_rows = rows;
    out.n_cols = n_users;
    out.perm.resize(n_users);
    out.r.assign(static_cast<std::size_t>(n_users) * n_users, cplx{});
    // working columns of [H; sigma I], column-major
    std::vector<cplx> a(static_cast<std::size_t>(rows) * n_users, cplx{});
    for (int u = 0; u < n_users; ++u) {
      for (int r = 0; r < n_rx; ++r)
        a[u * rows + r] = h[static_cast<std::size_t>(u) * n_rx + r];
      a[u * rows + n_rx + u] = sigma;
      out.perm[u] = u;
    }
    std::vector<double> d(n_users);
    for (int u = 0; u < n_users; ++u) {
      double s = 0.0;
      for (int r = 0; r < rows; ++r) s += abs2(a[u * rows + r]);
      d[u] = s;
    }
    out.q.assign(static_cast<std::size_t>(rows) * n_users, cplx{});
    for (int j = 0; j < n_users; ++j) {
      int p = j;
      for (int i = j + 1; i < n_users; ++i)
        if (d[i] < d[p]) p = i;
      if (p != j) {
        std::swap(d[p], d[j]);
        std::swap(out.perm[p], out.perm[j]);
        for (int r = 0; r < rows; ++r)
          std::swap(a[p * rows + r], a[j * rows + r]);
        for (int k = 0; k < j; ++k)
          std::swap(out.r[k * n_users + p], out.r[k * n_users + j]);
      }
      double nrm2 = 0.0;
      for (int r = 0; r < rows; ++r) nrm2 += abs2(a[j * rows + r]);
      const double rjj = std::sqrt(nrm2 > 1e-300 ? nrm2 : 1e-300);
      out.r[j * n_users + j] = rjj;
      const double inv = 1.0 / rjj;
      for (int r = 0; r < rows; ++r) out.q[r * n_users + j] = a[j * rows + r] * inv;
      for (int i = j + 1; i < n_users; ++i) {
        cplx rij{0.0, 0.0};
        for (int r = 0; r < rows; ++r)
          rij += std::conj(out.q[r * n_users + j]) * a[i * rows + r];
        out.r[j * n_users + i] = rij;
        for (int r = 0; r < rows; ++r)
          a[i * rows + r] -= rij * out.q[r * n_users + j];
        d[i] -= abs2(rij);
      }
    }
    return out;
  }
};

struct SphereResult {
  bool truncated = false;
  std::uint64_t nodes = 0;
};

/// Soft-output sphere detector, single-tree-search flavor: one depth-first
/// pass simultaneously tightens the MAP metric and every per-bit
/// counter-hypothesis metric, so the resulting max-log LLRs are exactly those
/// of the MMSE-augmented brute-force search (exhaustive_maxlog with
/// augmented=true).  The augmented metric keeps the Gram matrix positive
/// definite for any channel, estimated or rank-deficient included.
///
/// Pruning subtlety: each child has its own admission radius (bits of the
/// child's row that differ from the MAP add their counter-hypothesis metrics
/// to the shared base), so the sorted-sibling loop may only break early once
/// a child's cost exceeds the largest of ALL tracked metrics.
class SphereDetector {
 public:
  SphereResult detect(const cplx* y, const cplx* h, int n_rx, int n_users,
                      const Constellation& c, double sigma2,
                      const double* prior_llrs, std::uint64_t max_nodes,
                      double* out_llrs,
                      ComplexityCounters* counters = nullptr) {
    if (n_users < 1 || n_users > kMaxUsers || n_rx < 1 || n_rx > kMaxRx)
      throw std::invalid_argument("SphereDetector: unsupported dimensions");
    const double s2 = sigma2 > 0 ? sigma2 : 1e-300;
    c_ = &c;
    bps_ = c.bps;
    k_ = n_users;
    counters_ = counters;
    budget_ = max_nodes;
    nv_ = 0;
    abort_ = false;

    const PivotedGramChol f = pivoted_gram_chol(h, n_rx, n_users, s2, counters);
    const double sigma = std::sqrt(s2);
    const double inv_sigma = 1.0 / sigma;
    if (counters) counters->add_real(2);

    // matched filter, then permute and whiten: yp = L^-1 P^T H^H y / sigma
    cplx bfull[kMaxUsers];
    for (int u = 0; u < n_users; ++u) {
      const cplx* col = h + static_cast<std::size_t>(u) * n_rx;
      cplx s{0.0, 0.0};
      for (int r = 0; r < n_rx; ++r) s += std::conj(col[r]) * y[r];
      bfull[u] = s;
      if (counters) counters->add_cm(static_cast<std::uint64_t>(n_rx));
    }
    cplx yhat[kMaxUsers];
    for (int i = 0; i < n_users; ++i) {
      cplx s = bfull[f.perm[i]];
      for (int k = 0; k < i; ++k) s -= f.l[i * n_users + k] * yhat[k];
      yhat[i] = s / f.l[i * n_users + i].real();
      if (counters) {
        counters->add_cm(static_cast<std::uint64_t>(i));
        counters->add_rc(1);
      }
    }
    for (int i = 0; i < n_users; ++i) {
      yp_[i] = yhat[i] * inv_sigma;
      if (counters) counters->add_rc(1);
    }

    // U = L^H / sigma; off-diagonal entries only ever multiply constellation
    // axis levels, so store them pre-multiplied per level (partial distances
    // in the tree then need additions only).
    const int nl = 1 << c.bps_axis;
    for (int i = 0; i < n_users; ++i) {
      const double uii = f.l[i * n_users + i].real() * inv_sigma;
      if (counters) counters->add_real(1);
      for (int m = 0; m < nl; ++m) {
        sax_[i][m] = uii * c.axis_levels[m];
        if (counters) counters->add_real(1);
      }
      for (int j = i + 1; j < n_users; ++j) {
        const cplx uij = std::conj(f.l[j * n_users + i]) * inv_sigma;
        if (counters) counters->add_rc(1);
        for (int m = 0; m < nl; ++m) {
          uax_[i][j][m] = uij * c.axis_levels[m];
          if (counters) counters->add_rc(1);
        }
      }
    }

    for (int i = 0; i < n_users; ++i) {
      for (int m = 0; m < c.order; ++m) {
        double p = 0.0;
        if (prior_llrs) {
          const double* pl = prior_llrs + f.perm[i] * bps_;
          for (int b = 0; b < bps_; ++b)
            p += prior_penalty((m >> b) & 1, pl[b]);
        }
        pc_[i][m] = p;
      }
    }

    lam_map_ = kPosInf;
    for (int i = 0; i < n_users * bps_; ++i) lam_bar_[i] = kPosInf;
    max_all_ = kPosInf;
    dirty_ = false;

    search(n_users - 1, 0.0);

    for (int i = 0; i < n_users; ++i) {
      const int u = f.perm[i];
      for (int b = 0; b < bps_; ++b) {
        double v;
        if (std::isinf(lam_map_)) {
          v = 0.0;  // budget too small for even one leaf: erase everything
        } else {
          const double diff = lam_bar_[i * bps_ + b] - lam_map_;
          v = ((map_label_[i] >> b) & 1) ? -diff : diff;
        }
        out_llrs[u * bps_ + b] = v;
      }
    }

    SphereResult res;
    res.truncated = abort_;
    res.nodes = nv_;
    if (counters) {
      counters->nodes_visited += nv_;
      counters->re_detected++;
      counters->detector_runs++;
      if (abort_) counters->truncated++;
    }
    return res;
  }

 private:
  double max_all() {
    if (dirty_) {
      double m = lam_map_;
      for (int i = 0; i < k_ * bps_; ++i)
        if (lam_bar_[i] > m) m = lam_bar_[i];
      max_all_ = m;
      dirty_ = false;
    }
    return max_all_;
  }

  // Largest metric this child could still improve: the MAP metric, every
  // counter-hypothesis of not-yet-fixed rows below, and the counter
  // hypotheses of already-differing fixed bits (own row uses the candidate
  // label, rows above use the committed path).
  double child_radius(int i, int label) const {
    double rad = lam_map_;
    if (std::isinf(rad)) return rad;
    int diff = label ^ map_label_[i];
    for (int b = 0; b < bps_; ++b)
      if ((diff >> b) & 1) {
        const double v = lam_bar_[i * bps_ + b];
        if (v > rad) rad = v;
      }
    for (int j = i + 1; j < k_; ++j) {
      diff = cur_label_[j] ^ map_label_[j];
      for (int b = 0; b < bps_; ++b)
        if ((diff >> b) & 1) {
          const double v = lam_bar_[j * bps_ + b];
          if (v > rad) rad = v;
        }
    }
    for (int j = 0; j < i; ++j)
      for (int b = 0; b < bps_; ++b) {
        const double v = lam_bar_[j * bps_ + b];
        if (v > rad) rad = v;
      }
    return rad;
  }

  void leaf_update(int label0, double metric) {
    cur_label_[0] = label0;
    if (metric < lam_map_) {
      // previous best leaf becomes the counter hypothesis of every bit that
      // changed; it is the best leaf seen in those complement classes
      if (!std::isinf(lam_map_)) {
        for (int j = 0; j < k_; ++j) {
          const int diff = cur_label_[j] ^ map_label_[j];
          for (int b = 0; b < bps_; ++b)
            if ((diff >> b) & 1) lam_bar_[j * bps_ + b] = lam_map_;
        }
      }
      lam_map_ = metric;
      for (int j = 0; j < k_; ++j) map_label_[j] = cur_label_[j];
    } else {
      for (int j = 0; j < k_; ++j) {
        const int diff = cur_label_[j] ^ map_label_[j];
        for (int b = 0; b < bps_; ++b)
          if (((diff >> b) & 1) && metric < lam_bar_[j * bps_ + b])
            lam_bar_[j * bps_ + b] = metric;
      }
    }
    dirty_ = true;
  }

  void search(int i, double pm) {
    const Constellation& c = *c_;
    const int m_count = c.order;
    const int nl = 1 << c.bps_axis;

    nv_ += static_cast<std::uint64_t>(m_count);
    if (budget_ && nv_ > budget_) {
      abort_ = true;
      return;
    }

    // partial upper-triangular residual for this row, additions only
    cplx b{yp_[i]};
    for (int j = i + 1; j < k_; ++j) {
      const int lab = cur_label_[j];
      const cplx& cx = uax_[i][j][c.i_label(lab)];
      const cplx& cy = uax_[i][j][c.q_label(lab)];
      b -= cplx{cx.real() - cy.imag(), cx.imag() + cy.real()};
    }

    double vi[8], vq[8];
    for (int m = 0; m < nl; ++m) {
      const double di = b.real() - sax_[i][m];
      const double dq = b.imag() - sax_[i][m];
      vi[m] = di * di;
      vq[m] = dq * dq;
    }
    if (counters_) counters_->add_real(2 * static_cast<std::uint64_t>(nl));

    double cost[64];
    int order[64];
    for (int m = 0; m < m_count; ++m) {
      cost[m] = pm + vi[c.i_label(m)] + vq[c.q_label(m)] + pc_[i][m];
      order[m] = m;
    }
    for (int m = 1; m < m_count; ++m) {  // insertion sort, ascending cost
      const int om = order[m];
      const double cm = cost[om];
      int t = m - 1;
      while (t >= 0 && cost[order[t]] > cm) {
        order[t + 1] = order[t];
        --t;
      }
      order[t + 1] = om;
    }

    for (int n = 0; n < m_count; ++n) {
      const int m = order[n];
      const double cum = cost[m];
      const double rad = child_radius(i, m);
      if (cum > rad) {
        if (cum > max_all()) break;  // sorted: no later sibling can matter
        continue;
      }
      if (i == 0) {
        leaf_update(m, cum);
      } else {
        cur_label_[i] = m;
        search(i - 1, cum);
        if (abort_) return;
      }
    }
  }

  const Constellation* c_ = nullptr;
  ComplexityCounters* counters_ = nullptr;
  int k_ = 0, bps_ = 0;
  std::uint64_t budget_ = 0, nv_ = 0;
  bool abort_ = false;

  cplx yp_[kMaxUsers];
  double sax_[kMaxUsers][8];
  cplx uax_[kMaxUsers][kMaxUsers][8];
  double pc_[kMaxUsers][64];
  double lam_map_ = kPosInf;
  double lam_bar_[kMaxUsers * 6];
  double max_all_ = kPosInf;
  bool dirty_ = false;
  int map_label_[kMaxUsers] = {};
  int cur_label_[kMaxUsers] = {};
};

}  // namespace overlink
