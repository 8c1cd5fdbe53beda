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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "overlink/channel.hpp"
#include "overlink/estimation.hpp"
#include "overlink/grid.hpp"
#include "overlink/rng.hpp"

namespace overlink {
namespace {

constexpr int kUsers = 4;
const std::vector<int> kPilots{2, 11};

GridDims dims48() { return GridDims{48, 14}; }

// Received slot for one user in isolation: its pilot cells carry
// truth * pilot (+ optional noise); everything else is zero.
std::vector<cplx> rx_from_truth(const std::vector<cplx>& truth,
                                const GridDims& dims, int user, double sigma2,
                                Rng* rng) {
  std::vector<cplx> rx(dims.cells(), cplx{0.0, 0.0});
  const std::vector<int> cells =
      pilot_cell_indices(dims, kPilots, kUsers, user);
  const std::vector<cplx> seq = pilot_sequence(user, cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    rx[cells[i]] = truth[cells[i]] * seq[i];
    if (rng) rx[cells[i]] += std::sqrt(sigma2) * rng->cgaussian();
  }
  return rx;
}

TEST(LsEstimate, NoiselessIsExact) {
  const GridDims dims = dims48();
  Rng rng(derive_seed(200, "test/ls-exact"));
  std::vector<cplx> truth(dims.cells());
  for (auto& v : truth) v = rng.cgaussian();
  const std::vector<cplx> rx = rx_from_truth(truth, dims, 1, 0.0, nullptr);
  const PilotObservation obs = ls_estimate(rx.data(), dims, kPilots, 1, kUsers);
  ASSERT_EQ(obs.t.size(), 2u);
  ASSERT_EQ(obs.f.size(), 12u);
  for (std::size_t it = 0; it < obs.t.size(); ++it)
    for (std::size_t k = 0; k < obs.f.size(); ++k)
      EXPECT_NEAR(std::abs(obs.raw[it * obs.f.size() + k] -
                           truth[dims.index(obs.t[it], obs.f[k])]),
                  0.0, 1e-12);
}

TEST(LsEstimate, ErrorVarianceEqualsNoise) {
  // unit-power pilots: per-cell estimation error variance is exactly sigma2
  const GridDims dims = dims48();
  const double sigma2 = 0.1;
  Rng rng(derive_seed(201, "test/ls-mse"));
  const cplx h{0.8, -0.6};
  std::vector<cplx> truth(dims.cells(), h);
  double acc = 0.0;
  std::size_t n = 0;
  while (n < 100000) {
    const std::vector<cplx> rx = rx_from_truth(truth, dims, 0, sigma2, &rng);
    const PilotObservation obs =
        ls_estimate(rx.data(), dims, kPilots, 0, kUsers);
    for (const cplx& v : obs.raw) acc += abs2(v - h);
    n += obs.raw.size();
  }
  EXPECT_NEAR(acc / static_cast<double>(n), sigma2, 0.05 * sigma2);
}

TEST(LsEstimate, ErrorMagnitudeIgnoresPilotPhase) {
  // y = h*p + n with |p| = 1: the error is n/p, same magnitude as n
  const GridDims dims = dims48();
  Rng rng(derive_seed(202, "test/ls-phase"));
  const cplx h{1.2, 0.4};
  std::vector<cplx> truth(dims.cells(), h);
  const std::vector<int> cells = pilot_cell_indices(dims, kPilots, kUsers, 2);
  const std::vector<cplx> seq = pilot_sequence(2, cells.size());
  std::vector<cplx> rx(dims.cells(), cplx{});
  std::vector<double> noise_mag(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const cplx n = 0.3 * rng.cgaussian();
    noise_mag[i] = std::abs(n);
    rx[cells[i]] = h * seq[i] + n;
  }
  const PilotObservation obs = ls_estimate(rx.data(), dims, kPilots, 2, kUsers);
  for (std::size_t i = 0; i < obs.raw.size(); ++i)
    EXPECT_NEAR(std::abs(obs.raw[i] - h), noise_mag[i], 1e-12);
}

TEST(Interpolate, ConstantChannelIsExactEverywhere) {
  const GridDims dims = dims48();
  const cplx h{0.3, -1.1};
  std::vector<cplx> truth(dims.cells(), h);
  const std::vector<cplx> rx = rx_from_truth(truth, dims, 3, 0.0, nullptr);
  const PilotObservation obs = ls_estimate(rx.data(), dims, kPilots, 3, kUsers);
  const std::vector<cplx> est = interpolate_estimates(obs, dims);
  for (std::size_t i = 0; i < est.size(); ++i)
    EXPECT_NEAR(std::abs(est[i] - h), 0.0, 1e-12);
}

TEST(Interpolate, LinearInTimeIsExactIncludingExtrapolation) {
  // channel a + s*t sampled at pilot symbols 2 and 11: the two-point linear
  // fit reproduces it at every symbol, the extrapolated edges included
  const GridDims dims = dims48();
  const cplx a{0.5, 0.2}, s{-0.07, 0.11};
  std::vector<cplx> truth(dims.cells());
  for (int t = 0; t < dims.n_symbols; ++t)
    for (int f = 0; f < dims.n_subcarriers; ++f)
      truth[dims.index(t, f)] = a + s * static_cast<double>(t);
  const std::vector<cplx> rx = rx_from_truth(truth, dims, 0, 0.0, nullptr);
  const PilotObservation obs = ls_estimate(rx.data(), dims, kPilots, 0, kUsers);
  const std::vector<cplx> est = interpolate_estimates(obs, dims);
  for (std::size_t i = 0; i < est.size(); ++i)
    EXPECT_NEAR(std::abs(est[i] - truth[i]), 0.0, 1e-12);
}

TEST(Interpolate, LinearInFrequencyExactInsideComb) {
  // user 0 comb covers 0,4,...,44: linear recovery inside [0,44], nearest
  // value held beyond the last comb cell
  const GridDims dims = dims48();
  const cplx a{1.0, -0.3}, s{0.02, 0.05};
  std::vector<cplx> truth(dims.cells());
  for (int t = 0; t < dims.n_symbols; ++t)
    for (int f = 0; f < dims.n_subcarriers; ++f)
      truth[dims.index(t, f)] = a + s * static_cast<double>(f);
  const std::vector<cplx> rx = rx_from_truth(truth, dims, 0, 0.0, nullptr);
  const PilotObservation obs = ls_estimate(rx.data(), dims, kPilots, 0, kUsers);
  const std::vector<cplx> est = interpolate_estimates(obs, dims);
  for (int t = 0; t < dims.n_symbols; ++t) {
    for (int f = 0; f <= 44; ++f)
      EXPECT_NEAR(std::abs(est[dims.index(t, f)] - truth[dims.index(t, f)]),
                  0.0, 1e-12);
    const cplx held = truth[dims.index(t, 44)];
    for (int f = 45; f < 48; ++f)
      EXPECT_NEAR(std::abs(est[dims.index(t, f)] - held), 0.0, 1e-12);
  }
}

TEST(Interpolate, AveragingBeatsRawPilotsOnStaticChannel) {
  const GridDims dims = dims48();
  const double sigma2 = 0.05;
  Rng rng(derive_seed(203, "test/interp-mse"));
  const cplx h{0.9, 0.1};
  std::vector<cplx> truth(dims.cells(), h);
  double grid_mse = 0.0;
  const int slots = 400;
  for (int i = 0; i < slots; ++i) {
    const std::vector<cplx> rx = rx_from_truth(truth, dims, 1, sigma2, &rng);
    const PilotObservation obs =
        ls_estimate(rx.data(), dims, kPilots, 1, kUsers);
    grid_mse += estimate_mse(interpolate_estimates(obs, dims), truth);
  }
  grid_mse /= slots;
  EXPECT_LT(grid_mse, sigma2);          // raw pilot-cell MSE is sigma2
  EXPECT_GT(grid_mse, 0.3 * sigma2);    // but it cannot be free
}

TEST(NoiseVar, NoiselessStaticIsClippedZero) {
  const GridDims dims = dims48();
  std::vector<cplx> truth(dims.cells(), cplx{0.7, 0.7});
  const std::vector<cplx> rx = rx_from_truth(truth, dims, 0, 0.0, nullptr);
  const PilotObservation obs = ls_estimate(rx.data(), dims, kPilots, 0, kUsers);
  const double v = estimate_noise_var(obs, smooth_freq_neighbors(obs));
  EXPECT_LE(v, 1e-9);
  EXPECT_GE(v, 1e-12);
}

TEST(NoiseVar, FlatChannelRecoversSigma2) {
  const GridDims dims = dims48();
  const double sigma2 = 0.1;
  Rng rng(derive_seed(204, "test/nv-flat"));
  const cplx h{1.1, -0.2};
  std::vector<cplx> truth(dims.cells(), h);
  double acc = 0.0;
  const int slots = 1000;
  for (int i = 0; i < slots; ++i) {
    const std::vector<cplx> rx = rx_from_truth(truth, dims, 0, sigma2, &rng);
    const PilotObservation obs =
        ls_estimate(rx.data(), dims, kPilots, 0, kUsers);
    acc += estimate_noise_var(obs, smooth_freq_neighbors(obs));
  }
  EXPECT_NEAR(acc / slots, sigma2, 0.2 * sigma2);
}

TEST(NoiseVar, ScaleEquivariant) {
  const GridDims dims = dims48();
  Rng rng(derive_seed(205, "test/nv-scale"));
  std::vector<cplx> truth(dims.cells());
  for (auto& v : truth) v = rng.cgaussian();
  std::vector<cplx> rx = rx_from_truth(truth, dims, 1, 0.2, &rng);
  const PilotObservation obs = ls_estimate(rx.data(), dims, kPilots, 1, kUsers);
  const double base = estimate_noise_var(obs, smooth_freq_neighbors(obs));
  const double alpha = 3.0;
  for (auto& v : rx) v *= alpha;
  const PilotObservation obs2 =
      ls_estimate(rx.data(), dims, kPilots, 1, kUsers);
  const double scaled = estimate_noise_var(obs2, smooth_freq_neighbors(obs2));
  EXPECT_NEAR(scaled, alpha * alpha * base, 1e-9 * scaled);
}

TEST(NoiseGain, ClosedFormValues) {
  const GridDims dims = dims48();
  const std::vector<double> g =
      interpolation_noise_gain(dims, kPilots, 0, kUsers);
  // pilot cell: both time and frequency weights degenerate to 1
  EXPECT_NEAR(g[dims.index(2, 0)], 1.0, 1e-12);
  // halfway between comb cells 0 and 4 on a pilot symbol: 0.5^2 + 0.5^2
  EXPECT_NEAR(g[dims.index(2, 2)], 0.5, 1e-12);
  // symbol 0 extrapolates with u = -2/9: gain (11/9)^2 + (2/9)^2 = 125/81
  EXPECT_NEAR(g[dims.index(0, 0)], 125.0 / 81.0, 1e-12);
  EXPECT_NEAR(g[dims.index(13, 0)], 125.0 / 81.0, 1e-12);
  // interior time midpoint-ish symbol 6: u = 4/9
  EXPECT_NEAR(g[dims.index(6, 0)], (25.0 + 16.0) / 81.0, 1e-12);
}

TEST(NoiseGain, EffectiveNoiseGridCombinesUsers) {
  const GridDims dims = dims48();
  std::vector<UserChannelEstimate> ests(2);
  ests[0].sigma2_hat = 0.1;
  ests[1].sigma2_hat = 0.3;
  const std::vector<double> eff =
      effective_noise_grid(ests, dims, kPilots, 0.05);
  const std::vector<double> g0 = interpolation_noise_gain(dims, kPilots, 0, 2);
  const std::vector<double> g1 = interpolation_noise_gain(dims, kPilots, 1, 2);
  for (std::size_t i = 0; i < eff.size(); ++i)
    EXPECT_NEAR(eff[i], 0.05 + 0.1 * g0[i] + 0.3 * g1[i], 1e-12);
  for (double v : eff) EXPECT_GT(v, 0.05);
}

TEST(Estimation, FastFadingHurtsMoreThanSlow) {
  // same sinusoid draws, Doppler scaled 100x: channel aging between pilots
  // and data must raise the interpolated MSE at equal noise
  const GridDims dims = dims48();
  const double scs = 30e3;
  const double sym_dur = 1.0 / scs;
  const PowerDelayProfile pdp = tdla_pdp(100e-9);
  const double sigma2 = 0.01;
  double slow_mse = 0.0, fast_mse = 0.0;
  const int slots = 150;
  Rng noise_rng(derive_seed(206, "test/aging-noise"));
  FreqResponseTable table(pdp, dims.n_subcarriers, scs);
  for (int i = 0; i < slots; ++i) {
    const std::uint64_t seed = derive_seed(207, "test/aging-fade", i);
    for (int pass = 0; pass < 2; ++pass) {
      const double doppler = pass == 0 ? 9.26567 : 926.567;
      const FadingProcess fade =
          generate_fading(pdp, doppler, dims.n_symbols, sym_dur, seed);
      const std::vector<cplx> truth = freq_response(fade, table);
      Rng rng = noise_rng;  // identical noise draws for both passes
      const std::vector<cplx> rx = rx_from_truth(truth, dims, 0, sigma2, &rng);
      const PilotObservation obs =
          ls_estimate(rx.data(), dims, kPilots, 0, kUsers);
      const double mse = estimate_mse(interpolate_estimates(obs, dims), truth);
      (pass == 0 ? slow_mse : fast_mse) += mse;
    }
    // advance the shared noise stream once per slot
    const std::vector<cplx> rx =
        rx_from_truth(std::vector<cplx>(dims.cells()), dims, 0, sigma2,
                      &noise_rng);
    (void)rx;
  }
  EXPECT_GT(fast_mse, 2.0 * slow_mse);
}

TEST(Estimation, MultiRxAssemblesPerAntenna) {
  const GridDims dims = dims48();
  Rng rng(derive_seed(208, "test/multirx"));
  const int n_rx = 2;
  std::vector<cplx> rx(static_cast<std::size_t>(n_rx) * dims.cells());
  std::vector<cplx> truth0(dims.cells(), cplx{0.4, 0.1});
  std::vector<cplx> truth1(dims.cells(), cplx{-0.8, 0.9});
  const std::vector<cplx> r0 = rx_from_truth(truth0, dims, 0, 0.0, nullptr);
  const std::vector<cplx> r1 = rx_from_truth(truth1, dims, 0, 0.0, nullptr);
  std::copy(r0.begin(), r0.end(), rx.begin());
  std::copy(r1.begin(), r1.end(), rx.begin() + dims.cells());
  const UserChannelEstimate est =
      estimate_user_channel(rx, n_rx, dims, kPilots, 0, kUsers);
  EXPECT_EQ(est.n_rx, 2);
  for (int i = 0; i < dims.cells(); ++i) {
    EXPECT_NEAR(std::abs(est.h[i] - truth0[i]), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(est.h[dims.cells() + i] - truth1[i]), 0.0, 1e-12);
  }
  rx.pop_back();
  EXPECT_THROW(estimate_user_channel(rx, n_rx, dims, kPilots, 0, kUsers),
               std::invalid_argument);
}

}  // namespace
}  // namespace overlink
