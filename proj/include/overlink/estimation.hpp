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
#include <vector>

#include "overlink/common.hpp"
#include "overlink/grid.hpp"

namespace overlink {

/// Raw least-squares channel estimates of one user on one rx antenna,
/// defined on the user's pilot comb only.
struct PilotObservation {
  std::vector<int> t;    // pilot-bearing OFDM symbols, ascending
  std::vector<int> f;    // comb subcarriers owned by the user, ascending
  std::vector<cplx> raw; // raw[it * f.size() + if_], estimate at (t[it], f[if_])
};

/// Divides the received pilot cells by the known unit-magnitude pilot
/// sequence: h_hat = y / p, unbiased with per-cell error variance sigma2.
/// When the transmit chain scales a user's whole grid by a power factor the
/// result is that user's effective (power-included) channel, which is what
/// the detectors want.
inline PilotObservation ls_estimate(const cplx* rx_grid, const GridDims& dims,
                                    const std::vector<int>& pilot_symbols,
                                    int user, int n_users) {
  PilotObservation obs;
  obs.t = pilot_symbols;
  std::sort(obs.t.begin(), obs.t.end());
  for (int f = user; f < dims.n_subcarriers; f += n_users) obs.f.push_back(f);
  const std::size_t nf = obs.f.size();
  const std::size_t n_cells = obs.t.size() * nf;
  // the known sequence is laid down in the transmit grid's pilot-cell order,
  // which follows pilot_symbols as configured, not sorted
  const std::vector<cplx> seq = pilot_sequence(user, n_cells);
  obs.raw.resize(n_cells);
  for (std::size_t it = 0; it < obs.t.size(); ++it) {
    const auto pos = std::find(pilot_symbols.begin(), pilot_symbols.end(),
                               obs.t[it]) -
                     pilot_symbols.begin();
    for (std::size_t k = 0; k < nf; ++k) {
      const cplx p = seq[static_cast<std::size_t>(pos) * nf + k];
      if (abs2(p) < 1e-12)
        throw std::invalid_argument("ls_estimate: degenerate pilot symbol");
      obs.raw[it * nf + k] = rx_grid[dims.index(obs.t[it], obs.f[k])] / p;
    }
  }
  return obs;
}

/// Frequency smoother used only to expose the noise: each comb cell is
/// replaced by the mean of its comb neighbors (interior) or its single
/// neighbor (edges).  The residual raw - smoothed has noise variance
/// 1.5*sigma2 in the interior and 2*sigma2 at the edges, which
/// estimate_noise_var divides back out.
inline std::vector<cplx> smooth_freq_neighbors(const PilotObservation& obs) {
  const std::size_t nf = obs.f.size();
  std::vector<cplx> out(obs.raw.size());
  for (std::size_t it = 0; it < obs.t.size(); ++it) {
    const cplx* row = obs.raw.data() + it * nf;
    cplx* dst = out.data() + it * nf;
    for (std::size_t k = 0; k < nf; ++k) {
      if (nf == 1) {
        dst[k] = row[k];
      } else if (k == 0) {
        dst[k] = row[1];
      } else if (k + 1 == nf) {
        dst[k] = row[nf - 2];
      } else {
        dst[k] = 0.5 * (row[k - 1] + row[k + 1]);
      }
    }
  }
  return out;
}

/// Mean squared smoother residual, divided by the smoother's per-cell noise
/// amplification so a flat channel returns sigma2 unbiased.  Channel
/// curvature and Doppler leak extra power into the residual, biasing the
/// estimate up; that is the honest direction for LLR scaling.  Clipped
/// below at 1e-12.
inline double estimate_noise_var(const PilotObservation& obs,
                                 const std::vector<cplx>& smoothed) {
  const std::size_t nf = obs.f.size();
  if (obs.raw.size() < 2 || nf < 2 || smoothed.size() != obs.raw.size())
    return 1e-12;
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t it = 0; it < obs.t.size(); ++it) {
    for (std::size_t k = 0; k < nf; ++k) {
      const std::size_t i = it * nf + k;
      const double factor = (k == 0 || k + 1 == nf) ? 2.0 : 1.5;
      acc += abs2(obs.raw[i] - smoothed[i]) / factor;
      ++n;
    }
  }
  return std::max(acc / static_cast<double>(n), 1e-12);
}

namespace detail {

/// Linear interpolation of comb values across all subcarriers of one OFDM
/// symbol, nearest-neighbor beyond the outermost comb cells.
inline void interp_freq_row(const std::vector<int>& f, const cplx* vals,
                            int n_subcarriers, cplx* out) {
  const std::size_t nf = f.size();
  std::size_t seg = 0;
  for (int x = 0; x < n_subcarriers; ++x) {
    if (x <= f.front()) {
      out[x] = vals[0];
      continue;
    }
    if (x >= f.back()) {
      out[x] = vals[nf - 1];
      continue;
    }
    while (f[seg + 1] < x) ++seg;
    const double w =
        static_cast<double>(x - f[seg]) / static_cast<double>(f[seg + 1] - f[seg]);
    out[x] = (1.0 - w) * vals[seg] + w * vals[seg + 1];
  }
}

/// Bracketing pilot-symbol pair used for time interpolation at symbol t:
/// interior symbols interpolate, symbols outside the pilot span extrapolate
/// from the nearest pair.  A single pilot symbol holds constant.
inline void time_bracket(const std::vector<int>& pt, int t, std::size_t* a,
                         std::size_t* b, double* u) {
  const std::size_t n = pt.size();
  if (n == 1) {
    *a = *b = 0;
    *u = 0.0;
    return;
  }
  std::size_t lo = 0;
  while (lo + 2 < n && pt[lo + 1] <= t) ++lo;
  *a = lo;
  *b = lo + 1;
  *u = static_cast<double>(t - pt[lo]) /
       static_cast<double>(pt[lo + 1] - pt[lo]);
}

}  // namespace detail

/// Expands raw comb estimates to the full grid: linear across frequency
/// within each pilot symbol, then linear across time through the pilot
/// symbols (extrapolated outside their span, held constant if there is
/// only one).  Returns cell-major values (dims.index layout).
inline std::vector<cplx> interpolate_estimates(const PilotObservation& obs,
                                               const GridDims& dims) {
  const std::size_t nt = obs.t.size();
  const int nf = dims.n_subcarriers;
  std::vector<cplx> rows(nt * static_cast<std::size_t>(nf));
  for (std::size_t it = 0; it < nt; ++it)
    detail::interp_freq_row(obs.f, obs.raw.data() + it * obs.f.size(), nf,
                            rows.data() + it * nf);
  std::vector<cplx> out(dims.cells());
  for (int t = 0; t < dims.n_symbols; ++t) {
    std::size_t a, b;
    double u;
    detail::time_bracket(obs.t, t, &a, &b, &u);
    for (int x = 0; x < nf; ++x) {
      const cplx va = rows[a * nf + x];
      const cplx vb = rows[b * nf + x];
      out[dims.index(t, x)] = (1.0 - u) * va + u * vb;
    }
  }
  return out;
}

/// Noise amplification of the whole pilots-to-grid chain per cell: the
/// interpolated estimate is a fixed linear combination of independent raw
/// cells, so its error variance is sigma2 times this gain.  Time and
/// frequency factors multiply because the two pilot symbols contribute
/// independent noise.
inline std::vector<double> interpolation_noise_gain(
    const GridDims& dims, const std::vector<int>& pilot_symbols, int user,
    int n_users) {
  std::vector<int> pt = pilot_symbols;
  std::sort(pt.begin(), pt.end());
  std::vector<int> f;
  for (int x = user; x < dims.n_subcarriers; x += n_users) f.push_back(x);

  std::vector<double> gf(dims.n_subcarriers, 1.0);
  std::size_t seg = 0;
  for (int x = 0; x < dims.n_subcarriers; ++x) {
    if (x <= f.front() || x >= f.back()) {
      gf[x] = 1.0;
      continue;
    }
    while (f[seg + 1] < x) ++seg;
    const double w =
        static_cast<double>(x - f[seg]) / static_cast<double>(f[seg + 1] - f[seg]);
    gf[x] = (1.0 - w) * (1.0 - w) + w * w;
  }

  std::vector<double> out(dims.cells());
  for (int t = 0; t < dims.n_symbols; ++t) {
    std::size_t a, b;
    double u;
    detail::time_bracket(pt, t, &a, &b, &u);
    const double gt = a == b ? 1.0 : (1.0 - u) * (1.0 - u) + u * u;
    for (int x = 0; x < dims.n_subcarriers; ++x)
      out[dims.index(t, x)] = gt * gf[x];
  }
  return out;
}

/// Full channel estimate of one user across rx antennas, plus the
/// smoother-residual noise figure behind the effective-noise model.
struct UserChannelEstimate {
  GridDims dims;
  int n_rx = 1;
  std::vector<cplx> h;       // h[r * dims.cells() + cell]
  double sigma2_hat = 0.0;   // bias-corrected residual power, averaged over rx
  double mse_true = -1.0;    // filled by the truth hook only
};

/// rx_grids holds n_rx received slots back to back (r * cells + cell).
inline UserChannelEstimate estimate_user_channel(
    const std::vector<cplx>& rx_grids, int n_rx, const GridDims& dims,
    const std::vector<int>& pilot_symbols, int user, int n_users) {
  if (rx_grids.size() != static_cast<std::size_t>(n_rx) * dims.cells())
    throw std::invalid_argument("estimate_user_channel: rx size mismatch");
  UserChannelEstimate est;
  est.dims = dims;
  est.n_rx = n_rx;
  est.h.resize(rx_grids.size());
  double acc = 0.0;
  for (int r = 0; r < n_rx; ++r) {
    const PilotObservation obs = ls_estimate(
        rx_grids.data() + static_cast<std::size_t>(r) * dims.cells(), dims,
        pilot_symbols, user, n_users);
    acc += estimate_noise_var(obs, smooth_freq_neighbors(obs));
    const std::vector<cplx> grid = interpolate_estimates(obs, dims);
    std::copy(grid.begin(), grid.end(),
              est.h.begin() + static_cast<std::size_t>(r) * dims.cells());
  }
  est.sigma2_hat = acc / n_rx;
  return est;
}

/// Truth hook: mean squared error of an estimate grid against the true one.
inline double estimate_mse(const std::vector<cplx>& est,
                           const std::vector<cplx>& truth) {
  if (est.size() != truth.size() || est.empty())
    throw std::invalid_argument("estimate_mse: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) acc += abs2(est[i] - truth[i]);
  return acc / static_cast<double>(est.size());
}

/// Per-cell effective noise variance consumed by the detectors: thermal
/// noise plus each user's estimation-error power, the latter modeled as the
/// user's residual noise figure scaled by the deterministic interpolation
/// gain at that cell.  Keeps LLR magnitudes honest where the estimate is
/// extrapolated (channel aging) without ever touching the true channel.
inline std::vector<double> effective_noise_grid(
    const std::vector<UserChannelEstimate>& ests, const GridDims& dims,
    const std::vector<int>& pilot_symbols, double sigma2_hat_slot) {
  std::vector<double> out(dims.cells(), sigma2_hat_slot);
  const int n_users = static_cast<int>(ests.size());
  for (int u = 0; u < n_users; ++u) {
    const std::vector<double> gain =
        interpolation_noise_gain(dims, pilot_symbols, u, n_users);
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] += gain[i] * ests[u].sigma2_hat;
  }
  return out;
}

}  // namespace overlink
