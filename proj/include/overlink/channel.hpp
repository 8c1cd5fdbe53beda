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
#include <cstdint>
#include <vector>

#include "overlink/common.hpp"
#include "overlink/config.hpp"
#include "overlink/rng.hpp"

namespace overlink {

/// Tapped delay line: tap delays in seconds and average linear powers.
/// Invariants: delays sorted ascending, powers sum to 1.
struct PowerDelayProfile {
  struct Tap {
    double delay_s = 0.0;
    double power = 0.0;
  };
  std::vector<Tap> taps;
};

/// TDL-A profile scaled to the requested RMS delay spread.
///
/// Normalized delays and per-tap powers follow the published 23-tap NLOS
/// table; the normalized delay axis is multiplied by the delay spread.  Taps
/// are reordered by absolute delay (the published table is power-ordered
/// around the strongest tap, not delay-ordered) and powers are renormalized
/// to unit total so the frequency response has unit average energy.
inline PowerDelayProfile tdla_pdp(double delay_spread_s) {
  static constexpr double kNormDelay[23] = {
      0.0000, 0.3819, 0.4025, 0.5868, 0.4610, 0.5375, 0.6708, 0.5750,
      0.7618, 1.5375, 1.8978, 2.2242, 2.1718, 2.4942, 2.5119, 3.0582,
      4.0810, 4.4579, 4.5695, 4.7966, 5.0066, 5.3043, 9.6586};
  static constexpr double kPowerDb[23] = {
      -13.4, 0.0,   -2.2,  -4.0,  -6.0,  -8.2,  -9.9,  -10.5,
      -7.5,  -15.9, -6.6,  -16.7, -12.4, -15.2, -10.8, -11.3,
      -12.7, -16.2, -18.3, -18.9, -16.6, -19.9, -29.7};

  PowerDelayProfile pdp;
  pdp.taps.resize(23);
  double total = 0.0;
  for (int i = 0; i < 23; ++i) {
    pdp.taps[i].delay_s = kNormDelay[i] * delay_spread_s;
    pdp.taps[i].power = db_to_linear(kPowerDb[i]);
    total += pdp.taps[i].power;
  }
  for (auto& tap : pdp.taps) tap.power /= total;
  std::sort(pdp.taps.begin(), pdp.taps.end(),
            [](const auto& a, const auto& b) { return a.delay_s < b.delay_s; });
  return pdp;
}

/// Maximum Doppler shift for a terminal moving at speed_kmh.
inline double doppler_from_speed(double speed_kmh, double carrier_hz) {
  return speed_kmh / 3.6 * carrier_hz / kSpeedOfLight;
}

/// Time series of complex tap gains, one row per tap (tap-major layout).
struct FadingProcess {
  int n_taps = 0;
  int n_samples = 0;
  double doppler_hz = 0.0;
  std::vector<cplx> gains;  // gains[tap * n_samples + t]

  cplx at(int tap, int t) const { return gains[tap * n_samples + t]; }
};

inline constexpr int kFadingSinusoids = 64;

/// Sum-of-sinusoids Rayleigh fading.
///
/// Each tap is an independent process
///   g(t) = sqrt(p / N) * sum_n exp(j * (2*pi*fd*cos(alpha_n)*t + phi_n))
/// with alpha_n, phi_n drawn uniform over [0, 2*pi) and N = 64 sinusoids,
/// which makes the ensemble autocorrelation J0(2*pi*fd*tau) per tap and the
/// marginal asymptotically complex Gaussian.  Zero Doppler degenerates to a
/// time-constant gain, still Rayleigh distributed across seeds.
inline FadingProcess generate_fading(const PowerDelayProfile& pdp,
                                     double doppler_hz, int n_samples,
                                     double sample_duration_s,
                                     std::uint64_t seed) {
  FadingProcess fp;
  fp.n_taps = static_cast<int>(pdp.taps.size());
  fp.n_samples = n_samples;
  fp.doppler_hz = doppler_hz;
  fp.gains.assign(static_cast<std::size_t>(fp.n_taps) * n_samples, cplx(0, 0));

  Rng rng(seed);
  std::vector<cplx> phasor(kFadingSinusoids);
  std::vector<cplx> step(kFadingSinusoids);
  for (int tap = 0; tap < fp.n_taps; ++tap) {
    const double scale = std::sqrt(pdp.taps[tap].power / kFadingSinusoids);
    for (int n = 0; n < kFadingSinusoids; ++n) {
      const double alpha = 2.0 * kPi * rng.uniform();
      const double phi = 2.0 * kPi * rng.uniform();
      const double omega =
          2.0 * kPi * doppler_hz * std::cos(alpha) * sample_duration_s;
      phasor[n] = cplx(std::cos(phi), std::sin(phi));
      step[n] = cplx(std::cos(omega), std::sin(omega));
    }
    cplx* row = fp.gains.data() + static_cast<std::size_t>(tap) * n_samples;
    for (int t = 0; t < n_samples; ++t) {
      cplx acc(0, 0);
      for (int n = 0; n < kFadingSinusoids; ++n) {
        acc += phasor[n];
        phasor[n] *= step[n];  // rotate instead of re-evaluating sincos
      }
      row[t] = scale * acc;
    }
  }
  return fp;
}

/// Precomputed subcarrier twiddles exp(-j*2*pi*f_i*tau_tap) for one profile
/// and grid; reused across every fading realization of a run.
struct FreqResponseTable {
  int n_taps = 0;
  int n_subcarriers = 0;
  std::vector<cplx> twiddle;  // twiddle[tap * n_subcarriers + f]

  FreqResponseTable() = default;
  FreqResponseTable(const PowerDelayProfile& pdp, int n_subcarriers_in,
                    double scs_hz) {
    n_taps = static_cast<int>(pdp.taps.size());
    n_subcarriers = n_subcarriers_in;
    twiddle.resize(static_cast<std::size_t>(n_taps) * n_subcarriers);
    for (int tap = 0; tap < n_taps; ++tap) {
      for (int f = 0; f < n_subcarriers; ++f) {
        const double angle = -2.0 * kPi * (f * scs_hz) * pdp.taps[tap].delay_s;
        twiddle[static_cast<std::size_t>(tap) * n_subcarriers + f] =
            cplx(std::cos(angle), std::sin(angle));
      }
    }
  }
};

/// Narrowband frequency response per (symbol, subcarrier), time-major:
/// out[t * n_subcarriers + f] = sum_tap g_tap(t) * exp(-j*2*pi*f_sub*tau_tap).
/// Assumes the cyclic prefix covers the maximum tap delay, so inter-symbol
/// and inter-carrier interference are not modelled.
inline std::vector<cplx> freq_response(const FadingProcess& fading,
                                       const FreqResponseTable& table) {
  const int n_sc = table.n_subcarriers;
  std::vector<cplx> h(static_cast<std::size_t>(fading.n_samples) * n_sc,
                      cplx(0, 0));
  for (int tap = 0; tap < fading.n_taps; ++tap) {
    const cplx* tw = table.twiddle.data() + static_cast<std::size_t>(tap) * n_sc;
    const cplx* row =
        fading.gains.data() + static_cast<std::size_t>(tap) * fading.n_samples;
    for (int t = 0; t < fading.n_samples; ++t) {
      const cplx g = row[t];
      cplx* dst = h.data() + static_cast<std::size_t>(t) * n_sc;
      for (int f = 0; f < n_sc; ++f) dst[f] += g * tw[f];
    }
  }
  return h;
}

inline std::vector<cplx> freq_response(const FadingProcess& fading,
                                       const PowerDelayProfile& pdp,
                                       int n_subcarriers, double scs_hz) {
  return freq_response(fading, FreqResponseTable(pdp, n_subcarriers, scs_hz));
}

/// Adds circularly symmetric complex Gaussian noise of variance sigma2.
inline std::vector<cplx> add_awgn(std::vector<cplx> signal, double sigma2,
                                  std::uint64_t seed) {
  if (sigma2 <= 0.0) return signal;
  Rng rng(seed);
  const double sigma = std::sqrt(sigma2);
  for (auto& s : signal) s += sigma * rng.cgaussian();
  return signal;
}

}  // namespace overlink
