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

#include <cstdint>
#include <vector>

#include "overlink/rng.hpp"

namespace overlink {

/// Pseudo-random channel interleaver permutation, a pure function of the
/// block length.  Transmitter and receiver derive it independently; no
/// signaling and no dependence on the run seed.
inline std::vector<std::uint32_t> interleaver_permutation(std::size_t n) {
  std::vector<std::uint32_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<std::uint32_t>(i);
  Rng rng(mix64(0x1317ee5eed000000ULL ^ static_cast<std::uint64_t>(n)));
  rng.shuffle(perm);
  return perm;
}

/// out[i] = in[perm[i]].
template <typename T>
std::vector<T> interleave(const std::vector<T>& in,
                          const std::vector<std::uint32_t>& perm) {
  std::vector<T> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[perm[i]];
  return out;
}

/// Inverse of interleave: out[perm[i]] = in[i].
template <typename T>
std::vector<T> deinterleave(const std::vector<T>& in,
                            const std::vector<std::uint32_t>& perm) {
  std::vector<T> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[perm[i]] = in[i];
  return out;
}

}  // namespace overlink
