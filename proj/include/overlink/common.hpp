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
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace overlink {

using cplx = std::complex<double>;

inline constexpr const char* kVersion = "0.3.0";

/// Propagation speed used for Doppler conversion, m/s.
inline constexpr double kSpeedOfLight = 299792458.0;

inline constexpr double kPi = std::numbers::pi;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// |z|^2 without the sqrt of std::abs.
inline double abs2(cplx z) { return z.real() * z.real() + z.imag() * z.imag(); }

}  // namespace overlink
