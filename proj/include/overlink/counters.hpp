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

namespace overlink {

/// Arithmetic cost accounting shared by every detector.
///
/// Everything is reduced to real multiplications under one fixed convention,
/// applied uniformly so ratios between detectors are meaningful:
///   complex * complex        -> 4 real mults
///   real    * complex        -> 2
///   |z|^2 of a complex       -> 2
///   square of a real         -> 1
///   real multiply / divide   -> 1
///   sqrt                     -> 1
/// Additions, comparisons, table lookups and sign flips are free.  The
/// complex-mult figure reported per RE is real_mults / 4.
struct ComplexityCounters {
  std::uint64_t real_mults = 0;
  std::uint64_t nodes_visited = 0;   // tree children whose metric was evaluated
  std::uint64_t re_detected = 0;     // resource elements processed
  std::uint64_t truncated = 0;       // REs where a node budget cut the search
  std::uint64_t detector_runs = 0;

  void add_cm(std::uint64_t n) { real_mults += 4 * n; }  // complex*complex
  void add_rc(std::uint64_t n) { real_mults += 2 * n; }  // real*complex
  void add_sq(std::uint64_t n) { real_mults += 2 * n; }  // |z|^2
  void add_real(std::uint64_t n) { real_mults += n; }    // real mult/div/sqrt

  double complex_mults() const { return static_cast<double>(real_mults) / 4.0; }

  double mults_per_re() const {
    return re_detected ? complex_mults() / static_cast<double>(re_detected) : 0.0;
  }

  ComplexityCounters& operator+=(const ComplexityCounters& o) {
    real_mults += o.real_mults;
    nodes_visited += o.nodes_visited;
    re_detected += o.re_detected;
    truncated += o.truncated;
    detector_runs += o.detector_runs;
    return *this;
  }
};

}  // namespace overlink
