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
#include "overlink/rng.hpp"

namespace overlink {

/// Instantaneous sum capacity of K equal-power users superposed on one
/// resource, in bit/s/Hz:  log2(1 + rho * sum_k |h_k|^2).  With a genie
/// successive decoder this is achievable regardless of how the total splits
/// across users, so it upper-bounds every detector in this simulator.
inline double sum_capacity(double snr_linear,
                           const std::vector<double>& channel_gains) {
  double total = 0.0;
  for (double g : channel_gains) total += g;
  return std::log2(1.0 + snr_linear * total);
}

struct ErgodicCapacity {
  double mean = 0.0;    // bit/s/Hz
  double stderr_ = 0.0; // standard error of the mean
  std::uint64_t n_draws = 0;
};

/// Monte Carlo average of sum_capacity over iid Rayleigh user gains
/// (|h_k|^2 ~ Exp(1), so the sum is Gamma(K, 1) distributed).
///
/// Draws are organized in fixed-size chunks with seeds derived per chunk, so
/// the result is a pure function of (snr_db, n_users, n_draws, seed)
/// independent of any threading in the caller.
inline ErgodicCapacity ergodic_sum_capacity(double snr_db, int n_users,
                                            std::uint64_t n_draws,
                                            std::uint64_t seed) {
  const double rho = db_to_linear(snr_db);
  constexpr std::uint64_t kChunk = 4096;
  double sum = 0.0;
  double sum_sq = 0.0;
  std::vector<double> gains(static_cast<std::size_t>(n_users));
  for (std::uint64_t start = 0; start < n_draws; start += kChunk) {
    const std::uint64_t end = std::min(n_draws, start + kChunk);
    Rng rng(derive_seed(seed, "capacity/chunk", start / kChunk));
    for (std::uint64_t i = start; i < end; ++i) {
      for (int k = 0; k < n_users; ++k) gains[k] = abs2(rng.cgaussian());
      const double c = sum_capacity(rho, gains);
      sum += c;
      sum_sq += c * c;
    }
  }
  ErgodicCapacity out;
  out.n_draws = n_draws;
  if (n_draws > 0) {
    out.mean = sum / n_draws;
    const double var =
        (sum_sq - sum * sum / static_cast<double>(n_draws)) /
        std::max<double>(1.0, static_cast<double>(n_draws - 1));
    out.stderr_ = std::sqrt(std::max(0.0, var) / static_cast<double>(n_draws));
  }
  return out;
}

}  // namespace overlink
