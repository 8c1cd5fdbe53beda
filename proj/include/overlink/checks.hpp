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
#include <cstdio>
#include <string>
#include <vector>

#include "overlink/channel.hpp"
#include "overlink/common.hpp"
#include "overlink/exhaustive.hpp"
#include "overlink/qam.hpp"
#include "overlink/rng.hpp"
#include "overlink/sphere.hpp"

namespace overlink {

/// Outcome of one built-in integrity check.  worst is the largest observed
/// deviation, limit the bound it must stay under.
struct CheckResult {
  std::string name;
  bool pass = false;
  double worst = 0.0;
  double limit = 0.0;
  std::string detail;

  std::string summary() const {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-24s %s  worst %.3e  limit %.3e  %s",
                  name.c_str(), pass ? "PASS" : "FAIL", worst, limit,
                  detail.c_str());
    return buf;
  }
};

/// Tree search vs enumeration.  Draws random joint detection instances over
/// the supported user counts, constellations and antenna counts and requires
/// the sphere LLRs to match the enumerated regularized max-log LLRs, priors
/// included, to within numerical noise.
inline CheckResult sphere_oracle_check(int n_instances = 1000,
                                       std::uint64_t seed = 0x0bac1e5eedULL) {
  CheckResult res;
  res.name = "sphere_oracle";
  res.limit = 1e-9;

  Rng rng(seed);
  SphereDetector sphere;
  cplx y[kMaxRx];
  cplx h[kMaxRx * kMaxUsers];
  double llr_ref[kMaxUsers * 6];
  double llr_tree[kMaxUsers * 6];
  double priors[kMaxUsers * 6];

  static const int kUsers[] = {2, 3, 4};
  static const int kMods[] = {4, 16};
  static const int kRx[] = {1, 2};

  for (int i = 0; i < n_instances; ++i) {
    const int n_users = kUsers[i % 3];
    const int order = kMods[(i / 3) % 2];
    const int n_rx = kRx[(i / 6) % 2];
    const Constellation& c = Constellation::get(order);
    const int n_bits = n_users * c.bps;

    const double snr_db = 12.0 * rng.uniform();
    const double sigma2 = n_users / db_to_linear(snr_db);
    for (int j = 0; j < n_rx * n_users; ++j) h[j] = rng.cgaussian();
    for (int r = 0; r < n_rx; ++r) {
      cplx acc = std::sqrt(sigma2) * rng.cgaussian();
      for (int u = 0; u < n_users; ++u) {
        acc += h[u * n_rx + r] * c.points[rng.bounded(static_cast<std::uint64_t>(order))];
      }
      y[r] = acc;
    }
    const bool with_priors = (i % 2) == 1;
    for (int b = 0; b < n_bits; ++b) priors[b] = 4.0 * (rng.uniform() - 0.5);

    JointDetectOptions opt;
    opt.augmented = true;
    opt.prior_llrs = with_priors ? priors : nullptr;
    exhaustive_maxlog(y, h, n_rx, n_users, c, sigma2, opt, llr_ref);
    sphere.detect(y, h, n_rx, n_users, c, sigma2,
                  with_priors ? priors : nullptr, 0, llr_tree);

    for (int b = 0; b < n_bits; ++b) {
      res.worst = std::max(res.worst, std::abs(llr_tree[b] - llr_ref[b]));
    }
  }
  res.pass = res.worst <= res.limit;
  res.detail = std::to_string(n_instances) + " instances";
  return res;
}

/// Temporal fidelity of the fading generator: the ensemble autocorrelation
/// of a single unit-power tap must track J0(2*pi*fd*tau) out to 5 ms at both
/// the pedestrian and the high-speed Doppler of a 2 GHz carrier.
inline CheckResult fading_autocorr_check(int n_realizations = 8000,
                                         std::uint64_t seed = 0xfade0a07ULL) {
  CheckResult res;
  res.name = "fading_autocorr";
  res.limit = 0.05;

  const double ts = 1.0 / 30.0e3;
  const int n_lags = 150;  // 150 * ts = 5 ms
  const int n_samples = n_lags + 10;
  PowerDelayProfile tap;
  tap.taps.push_back({0.0, 1.0});
  const double dopplers[2] = {doppler_from_speed(5.0, 2.0e9),
                              doppler_from_speed(500.0, 2.0e9)};

  for (int d = 0; d < 2; ++d) {
    const double fd = dopplers[d];
    std::vector<cplx> acc(static_cast<std::size_t>(n_lags) + 1, cplx(0, 0));
    for (int rlz = 0; rlz < n_realizations; ++rlz) {
      const FadingProcess fp = generate_fading(
          tap, fd, n_samples, ts,
          derive_seed(seed, "check/autocorr",
                      static_cast<std::uint64_t>(d) * n_realizations + rlz));
      const cplx* g = fp.gains.data();
      for (int lag = 0; lag <= n_lags; ++lag) {
        cplx s(0, 0);
        for (int t = 0; t + lag < n_samples; ++t) s += g[t + lag] * std::conj(g[t]);
        acc[static_cast<std::size_t>(lag)] += s;
      }
    }
    const double m0 =
        acc[0].real() / (static_cast<double>(n_realizations) * n_samples);
    for (int lag = 0; lag <= n_lags; ++lag) {
      const double count =
          static_cast<double>(n_realizations) * (n_samples - lag);
      const cplx m = acc[static_cast<std::size_t>(lag)] / count;
      const double ref = std::cyl_bessel_j(0.0, 2.0 * kPi * fd * lag * ts);
      res.worst = std::max(res.worst, std::abs(m / m0 - cplx(ref, 0.0)));
    }
  }
  res.pass = res.worst <= res.limit;
  res.detail = "both Dopplers, lags to 5 ms";
  return res;
}

/// Power normalization of the multipath profile: the ensemble energy summed
/// over taps must come out at unity.  Doppler only rotates phasors, so the
/// zero-Doppler ensemble measures the same normalization cheaply.
inline CheckResult fading_power_check(int n_realizations = 20000,
                                      std::uint64_t seed = 0xfade90e2ULL) {
  CheckResult res;
  res.name = "fading_power";
  res.limit = 0.02;

  const PowerDelayProfile pdp = tdla_pdp(100e-9);
  double total = 0.0;
  for (int rlz = 0; rlz < n_realizations; ++rlz) {
    const FadingProcess fp = generate_fading(
        pdp, 0.0, 1, 1.0 / 30.0e3,
        derive_seed(seed, "check/power", static_cast<std::uint64_t>(rlz)));
    for (int tap = 0; tap < fp.n_taps; ++tap) total += abs2(fp.at(tap, 0));
  }
  const double mean = total / n_realizations;
  res.worst = std::abs(mean - 1.0);
  res.pass = res.worst <= res.limit;
  res.detail = "mean slot energy " + std::to_string(mean);
  return res;
}

/// The built-in integrity suite: detector oracle equivalence plus fading
/// statistics.  Used by the selftest command and by the release gate.
inline std::vector<CheckResult> run_selftest() {
  std::vector<CheckResult> out;
  out.push_back(sphere_oracle_check());
  out.push_back(fading_autocorr_check());
  out.push_back(fading_power_check());
  return out;
}

}  // namespace overlink
