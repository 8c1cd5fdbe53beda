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

#include "overlink/common.hpp"
#include "overlink/config.hpp"
#include "overlink/rng.hpp"

namespace overlink {

struct GridDims {
  int n_subcarriers = 48;
  int n_symbols = 14;

  int cells() const { return n_subcarriers * n_symbols; }
  int index(int t, int f) const { return t * n_subcarriers + f; }
};

enum class CellKind : std::uint8_t { kEmpty = 0, kPilot = 1, kData = 2 };

/// One user's transmit grid for a slot, time-major cell layout.
struct UserGrid {
  GridDims dims;
  std::vector<cplx> cells;
  std::vector<CellKind> kind;
};

/// Data symbol indices: every OFDM symbol that carries no pilots.
inline std::vector<int> data_symbol_indices(int n_symbols,
                                            const std::vector<int>& pilot_symbols) {
  std::vector<bool> is_pilot(static_cast<std::size_t>(n_symbols), false);
  for (int p : pilot_symbols) is_pilot[static_cast<std::size_t>(p)] = true;
  std::vector<int> out;
  for (int t = 0; t < n_symbols; ++t) {
    if (!is_pilot[static_cast<std::size_t>(t)]) out.push_back(t);
  }
  return out;
}

/// The set of data symbols one user transmits on.  Superposed access gives
/// every user every data symbol; the orthogonal baseline deals data symbols
/// round robin (user u gets the d-th data symbol iff d mod K == u), which
/// keeps per-user shares within one symbol of each other for any K.
struct Allocation {
  std::vector<int> data_symbols;
};

inline Allocation full_allocation(int n_symbols,
                                  const std::vector<int>& pilot_symbols) {
  return Allocation{data_symbol_indices(n_symbols, pilot_symbols)};
}

inline Allocation oma_allocation(int n_symbols,
                                 const std::vector<int>& pilot_symbols,
                                 int n_users, int user) {
  const std::vector<int> all = data_symbol_indices(n_symbols, pilot_symbols);
  Allocation alloc;
  for (std::size_t d = 0; d < all.size(); ++d) {
    if (static_cast<int>(d) % n_users == user) alloc.data_symbols.push_back(all[d]);
  }
  return alloc;
}

/// Grid cell indices of an allocation's data cells, in (symbol, subcarrier)
/// scan order.  This order defines how coded symbols map onto the grid and
/// how per-RE detector output maps back into the coded stream.
inline std::vector<int> data_cell_indices(const GridDims& dims,
                                          const Allocation& alloc) {
  std::vector<int> out;
  out.reserve(alloc.data_symbols.size() * static_cast<std::size_t>(dims.n_subcarriers));
  for (int t : alloc.data_symbols) {
    for (int f = 0; f < dims.n_subcarriers; ++f) out.push_back(dims.index(t, f));
  }
  return out;
}

/// Pilot comb of one user: within each pilot symbol, subcarriers congruent
/// to the user index modulo the user count.  Combs of distinct users are
/// disjoint, and together they cover every subcarrier of a pilot symbol.
inline std::vector<int> pilot_cell_indices(const GridDims& dims,
                                           const std::vector<int>& pilot_symbols,
                                           int n_users, int user) {
  std::vector<int> out;
  for (int t : pilot_symbols) {
    for (int f = user; f < dims.n_subcarriers; f += n_users) {
      out.push_back(dims.index(t, f));
    }
  }
  return out;
}

/// Unit-magnitude QPSK pilot sequence, a pure function of the user id.  Both
/// link ends regenerate it; it does not depend on the run seed.
inline std::vector<cplx> pilot_sequence(int user, std::size_t count) {
  Rng rng(mix64(0x9110A17E5EEDULL ^ (static_cast<std::uint64_t>(user) << 32)));
  std::vector<cplx> seq(count);
  constexpr double kInvSqrt2 = 0.7071067811865475244;
  for (auto& p : seq) {
    const std::uint64_t r = rng.next_u64();
    p = cplx((r & 1) ? kInvSqrt2 : -kInvSqrt2,
             (r & 2) ? kInvSqrt2 : -kInvSqrt2);
  }
  return seq;
}

/// Assembles one user's transmit grid: pilots on the user's comb, data
/// symbols (scan order) on the allocation's data cells, zeros elsewhere.
inline UserGrid build_grid(const GridDims& dims,
                           const std::vector<int>& pilot_symbols, int n_users,
                           int user, const Allocation& alloc,
                           const std::vector<cplx>& data_symbols) {
  const std::vector<int> data_cells = data_cell_indices(dims, alloc);
  if (data_symbols.size() != data_cells.size()) {
    throw std::invalid_argument("build_grid: data symbol count does not match allocation");
  }
  UserGrid g;
  g.dims = dims;
  g.cells.assign(static_cast<std::size_t>(dims.cells()), cplx(0, 0));
  g.kind.assign(static_cast<std::size_t>(dims.cells()), CellKind::kEmpty);

  const std::vector<int> pilots = pilot_cell_indices(dims, pilot_symbols, n_users, user);
  const std::vector<cplx> seq = pilot_sequence(user, pilots.size());
  for (std::size_t i = 0; i < pilots.size(); ++i) {
    g.cells[static_cast<std::size_t>(pilots[i])] = seq[i];
    g.kind[static_cast<std::size_t>(pilots[i])] = CellKind::kPilot;
  }
  for (std::size_t i = 0; i < data_cells.size(); ++i) {
    g.cells[static_cast<std::size_t>(data_cells[i])] = data_symbols[i];
    g.kind[static_cast<std::size_t>(data_cells[i])] = CellKind::kData;
  }
  return g;
}

}  // namespace overlink
