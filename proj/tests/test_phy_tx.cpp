#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "overlink/convcode.hpp"
#include "overlink/grid.hpp"
#include "overlink/interleaver.hpp"
#include "overlink/qam.hpp"
#include "overlink/rng.hpp"

namespace ol = overlink;

// ---------------------------------------------------------------------------
// QAM mapper
// ---------------------------------------------------------------------------

TEST(Qam, UnitAverageEnergy) {
  for (int order : {4, 16, 64}) {
    const auto& c = ol::Constellation::get(order);
    double e = 0.0;
    for (int s = 0; s < order; ++s) e += ol::abs2(c.points[s]);
    EXPECT_NEAR(e / order, 1.0, 1e-12) << "order " << order;
  }
}

TEST(Qam, GrayNeighbours) {
  // Any two constellation points at minimum distance differ in exactly one
  // label bit.
  for (int order : {4, 16, 64}) {
    const auto& c = ol::Constellation::get(order);
    double dmin = 1e9;
    for (int a = 0; a < order; ++a) {
      for (int b = a + 1; b < order; ++b) {
        dmin = std::min(dmin, std::abs(c.points[a] - c.points[b]));
      }
    }
    for (int a = 0; a < order; ++a) {
      for (int b = a + 1; b < order; ++b) {
        if (std::abs(c.points[a] - c.points[b]) < dmin + 1e-9) {
          EXPECT_EQ(__builtin_popcount(a ^ b), 1)
              << "order " << order << " labels " << a << "," << b;
        }
      }
    }
  }
}

TEST(Qam, QpskPointsExact) {
  const auto& c = ol::Constellation::get(4);
  const double s = 1.0 / std::sqrt(2.0);
  EXPECT_EQ(c.points[0], ol::cplx(s, s));     // bits (0,0)
  EXPECT_EQ(c.points[1], ol::cplx(-s, s));    // bits (1,0)
  EXPECT_EQ(c.points[2], ol::cplx(s, -s));    // bits (0,1)
  EXPECT_EQ(c.points[3], ol::cplx(-s, -s));   // bits (1,1)
}

TEST(Qam, SixteenQamCorners) {
  const auto& c = ol::Constellation::get(16);
  const double s = 1.0 / std::sqrt(10.0);
  // label 0 = all-zero bits: (1, 1); setting b2 moves I outward to 3.
  EXPECT_NEAR(std::abs(c.points[0] - ol::cplx(s, s)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(c.points[4] - ol::cplx(3 * s, s)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(c.points[1] - ol::cplx(-s, s)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(c.points[8] - ol::cplx(s, 3 * s)), 0.0, 1e-12);
}

TEST(Qam, MapQamStreamOrder) {
  const std::vector<std::uint8_t> bits = {0, 0, 1, 0, 0, 1, 1, 1};
  const auto syms = ol::map_qam(bits, 4);
  const auto& c = ol::Constellation::get(4);
  ASSERT_EQ(syms.size(), 4u);
  EXPECT_EQ(syms[0], c.points[0]);
  EXPECT_EQ(syms[1], c.points[1]);
  EXPECT_EQ(syms[2], c.points[2]);
  EXPECT_EQ(syms[3], c.points[3]);
  EXPECT_THROW(ol::map_qam({0, 1, 1}, 4), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Convolutional code + rate matching
// ---------------------------------------------------------------------------

TEST(ConvCode, ImpulseResponse) {
  // Generators 133/171 octal: streams (1,0,1,1,0,1,1) and (1,1,1,1,0,0,1).
  const auto mother = ol::conv_encode({1, 0, 0, 0, 0, 0, 0});
  const std::vector<std::uint8_t> a = {1, 0, 1, 1, 0, 1, 1};
  const std::vector<std::uint8_t> b = {1, 1, 1, 1, 0, 0, 1};
  ASSERT_EQ(mother.size(), 2u * 13u);
  for (int t = 0; t < 7; ++t) {
    EXPECT_EQ(mother[2 * t], a[t]) << "t = " << t;
    EXPECT_EQ(mother[2 * t + 1], b[t]) << "t = " << t;
  }
  for (std::size_t i = 14; i < mother.size(); ++i) EXPECT_EQ(mother[i], 0);
}

TEST(ConvCode, Linearity) {
  // The code is linear: encode(x xor y) = encode(x) xor encode(y).
  ol::Rng rng(5);
  std::vector<std::uint8_t> x(40), y(40), z(40);
  for (int i = 0; i < 40; ++i) {
    x[i] = rng.next_u64() & 1;
    y[i] = rng.next_u64() & 1;
    z[i] = x[i] ^ y[i];
  }
  const auto cx = ol::conv_encode(x);
  const auto cy = ol::conv_encode(y);
  const auto cz = ol::conv_encode(z);
  for (std::size_t i = 0; i < cz.size(); ++i) {
    EXPECT_EQ(cz[i], cx[i] ^ cy[i]);
  }
}

TEST(ConvCode, TerminatesInZeroState) {
  // Tail bits drive the register to zero: appending further zeros to the
  // info stream only appends zero output pairs.
  const std::vector<std::uint8_t> info = {1, 1, 0, 1, 0, 0, 1, 0, 1, 1};
  auto longer = info;
  longer.push_back(0);
  const auto m1 = ol::conv_encode(info);
  const auto m2 = ol::conv_encode(longer);
  for (std::size_t i = 0; i < m1.size() - 12; ++i) EXPECT_EQ(m1[i], m2[i]);
}

TEST(RateMatch, LengthsAllRates) {
  const std::vector<std::uint8_t> info(570, 1);
  const auto mother = ol::conv_encode(info);  // 1152 bits
  EXPECT_EQ(ol::rate_match(mother, {1, 2}).size(), 1152u);
  EXPECT_EQ(ol::rate_match(mother, {2, 3}).size(), 864u);
  EXPECT_EQ(ol::rate_match(mother, {3, 4}).size(), 768u);
  EXPECT_EQ(ol::rate_match(mother, {1, 3}).size(), 1728u);
  EXPECT_EQ(ol::rate_match(mother, {1, 4}).size(), 2304u);
}

TEST(RateMatch, PunctureAndRepeatStructure) {
  std::vector<std::uint8_t> mother(12);
  for (int i = 0; i < 12; ++i) mother[i] = static_cast<std::uint8_t>(i % 2);
  // 2/3: keep a0 b0 a1, drop b1 within each 2-input period.
  const auto r23 = ol::rate_match(mother, {2, 3});
  ASSERT_EQ(r23.size(), 9u);
  // 3/4: keep a0 b0 b1 a2, drop a1 b2.
  const auto r34 = ol::rate_match(mother, {3, 4});
  ASSERT_EQ(r34.size(), 8u);
  // 1/3 repeats a; 1/4 repeats both.
  const auto r13 = ol::rate_match(mother, {1, 3});
  ASSERT_EQ(r13.size(), 18u);
  EXPECT_EQ(r13[0], r13[2]);
  const auto r14 = ol::rate_match(mother, {1, 4});
  ASSERT_EQ(r14.size(), 24u);
  EXPECT_EQ(r14[0], r14[2]);
  EXPECT_EQ(r14[1], r14[3]);
}

TEST(RateMatch, DerateAccumulatesAndZerosPunctured) {
  const int n_mother = 12;
  // 3/4 pattern keeps offsets {0,1,3,4} of every 6: positions 2 and 5 are
  // punctured in each period.
  std::vector<double> llr(8);
  for (std::size_t i = 0; i < llr.size(); ++i) llr[i] = 1.0 + i;
  const auto mother = ol::derate_match(llr, {3, 4}, n_mother);
  EXPECT_DOUBLE_EQ(mother[0], 1.0);
  EXPECT_DOUBLE_EQ(mother[1], 2.0);
  EXPECT_DOUBLE_EQ(mother[2], 0.0);
  EXPECT_DOUBLE_EQ(mother[3], 3.0);
  EXPECT_DOUBLE_EQ(mother[4], 4.0);
  EXPECT_DOUBLE_EQ(mother[5], 0.0);

  // Repetition adds the two copies.
  std::vector<double> rep(8, 0.5);
  const auto m14 = ol::derate_match(rep, {1, 4}, 4);
  EXPECT_DOUBLE_EQ(m14[0], 1.0);
  EXPECT_DOUBLE_EQ(m14[1], 1.0);
}

TEST(RateMatch, DerateIsAdjointOfRerate) {
  // <derate(l), m> == <l, rerate(m)> for every rate: both sides sum
  // l_i * m_{pos(i)} over transmitted positions i.
  ol::Rng rng(9);
  for (const ol::Rate& rate : ol::supported_rates()) {
    const int n_mother = 24;
    const int n_coded = n_mother / 2 * rate.den / rate.num;
    std::vector<double> l(static_cast<std::size_t>(n_coded));
    std::vector<double> m(n_mother);
    for (auto& v : l) v = rng.gaussian();
    for (auto& v : m) v = rng.gaussian();
    const auto dl = ol::derate_match(l, rate, n_mother);
    const auto rm = ol::rerate_match(m, rate);
    ASSERT_EQ(rm.size(), l.size());
    double lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < n_mother; ++i) lhs += dl[i] * m[i];
    for (std::size_t i = 0; i < l.size(); ++i) rhs += l[i] * rm[i];
    EXPECT_NEAR(lhs, rhs, 1e-9) << ol::to_string(rate);
  }
}

TEST(RateMatch, RoundTripEncode) {
  // encode_block output length matches code_block_dims for every rate.
  for (const ol::Rate& rate : ol::supported_rates()) {
    const auto dims = ol::code_block_dims(1152, rate);
    const std::vector<std::uint8_t> info(static_cast<std::size_t>(dims.n_info), 1);
    const auto coded = ol::encode_block(info, rate);
    EXPECT_EQ(static_cast<int>(coded.size()), dims.n_coded) << ol::to_string(rate);
  }
}

// ---------------------------------------------------------------------------
// Interleaver
// ---------------------------------------------------------------------------

TEST(Interleaver, PermutationAndInverse) {
  const auto perm = ol::interleaver_permutation(101);
  std::set<std::uint32_t> s(perm.begin(), perm.end());
  EXPECT_EQ(s.size(), 101u);
  std::vector<double> v(101);
  for (int i = 0; i < 101; ++i) v[i] = i * 0.5;
  const auto w = ol::interleave(v, perm);
  EXPECT_NE(v, w);
  EXPECT_EQ(ol::deinterleave(w, perm), v);
}

TEST(Interleaver, PureFunctionOfLength) {
  const auto a = ol::interleaver_permutation(1152);
  const auto b = ol::interleaver_permutation(1152);
  EXPECT_EQ(a, b);
  const auto c = ol::interleaver_permutation(1153);
  EXPECT_NE(a.size(), c.size());
}

TEST(Interleaver, SpreadsNeighbours) {
  // Adjacent input bits land far apart on average: mean output distance of
  // input neighbours should be near n/3 for a random permutation.
  const std::size_t n = 1152;
  const auto perm = ol::interleaver_permutation(n);
  std::vector<std::uint32_t> pos(n);
  for (std::uint32_t i = 0; i < n; ++i) pos[perm[i]] = i;
  double mean = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    mean += std::abs(static_cast<double>(pos[i]) - pos[i + 1]);
  }
  mean /= (n - 1);
  EXPECT_GT(mean, n / 5.0);
}

// ---------------------------------------------------------------------------
// Resource grid
// ---------------------------------------------------------------------------

TEST(Grid, PilotCombsPartitionPilotSymbols) {
  const ol::GridDims dims{48, 14};
  const std::vector<int> pilots = {2, 11};
  for (int k : {1, 2, 3, 4, 5, 6}) {
    std::set<int> all;
    std::size_t total = 0;
    for (int u = 0; u < k; ++u) {
      const auto cells = ol::pilot_cell_indices(dims, pilots, k, u);
      total += cells.size();
      for (int c : cells) {
        EXPECT_TRUE(all.insert(c).second) << "overlap, K = " << k;
      }
    }
    EXPECT_EQ(total, 2u * 48u) << "K = " << k;  // combs cover both symbols
  }
}

TEST(Grid, DataCellCounts) {
  const ol::GridDims dims{48, 14};
  const std::vector<int> pilots = {2, 11};
  const auto full = ol::full_allocation(14, pilots);
  EXPECT_EQ(ol::data_cell_indices(dims, full).size(), 576u);

  // Orthogonal split: every data symbol owned by exactly one user.
  for (int k : {2, 3, 4, 5, 6}) {
    std::set<int> owned;
    for (int u = 0; u < k; ++u) {
      const auto alloc = ol::oma_allocation(14, pilots, k, u);
      for (int t : alloc.data_symbols) {
        EXPECT_TRUE(owned.insert(t).second);
      }
    }
    EXPECT_EQ(owned.size(), 12u) << "K = " << k;
  }

  const auto a0 = ol::oma_allocation(14, pilots, 5, 0);
  const auto a4 = ol::oma_allocation(14, pilots, 5, 4);
  EXPECT_EQ(a0.data_symbols.size(), 3u);
  EXPECT_EQ(a4.data_symbols.size(), 2u);
}

TEST(Grid, BuildGridPlacement) {
  const ol::GridDims dims{48, 14};
  const std::vector<int> pilots = {2, 11};
  const auto alloc = ol::full_allocation(14, pilots);
  std::vector<ol::cplx> data(576);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = ol::cplx(static_cast<double>(i), -1.0);
  }
  const auto g = ol::build_grid(dims, pilots, 4, 1, alloc, data);

  int n_pilot = 0, n_data = 0, n_empty = 0;
  for (int t = 0; t < 14; ++t) {
    for (int f = 0; f < 48; ++f) {
      const auto kind = g.kind[static_cast<std::size_t>(dims.index(t, f))];
      const bool pilot_sym = (t == 2 || t == 11);
      if (kind == ol::CellKind::kPilot) {
        ++n_pilot;
        EXPECT_TRUE(pilot_sym);
        EXPECT_EQ(f % 4, 1);  // user 1 comb
        EXPECT_NEAR(std::abs(g.cells[dims.index(t, f)]), 1.0, 1e-12);
      } else if (kind == ol::CellKind::kData) {
        ++n_data;
        EXPECT_FALSE(pilot_sym);
      } else {
        ++n_empty;
        EXPECT_EQ(g.cells[dims.index(t, f)], ol::cplx(0, 0));
      }
    }
  }
  EXPECT_EQ(n_pilot, 24);
  EXPECT_EQ(n_data, 576);
  EXPECT_EQ(n_empty, 14 * 48 - 24 - 576);

  // Data scan order: first data symbol is t = 0, subcarrier ascending.
  EXPECT_EQ(g.cells[dims.index(0, 0)], data[0]);
  EXPECT_EQ(g.cells[dims.index(0, 47)], data[47]);
  EXPECT_EQ(g.cells[dims.index(1, 0)], data[48]);
  // t = 2 carries pilots; next data symbol is t = 3.
  EXPECT_EQ(g.cells[dims.index(3, 0)], data[96]);
}

TEST(Grid, PilotSequenceUserSpecificAndDeterministic) {
  const auto a = ol::pilot_sequence(0, 24);
  const auto b = ol::pilot_sequence(0, 24);
  const auto c = ol::pilot_sequence(1, 24);
  EXPECT_EQ(a, b);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= (a[i] != c[i]);
  EXPECT_TRUE(differs);
  for (const auto& p : a) {
    EXPECT_NEAR(std::abs(p), 1.0, 1e-12);
  }
}

TEST(Grid, BuildGridRejectsWrongDataCount) {
  const ol::GridDims dims{48, 14};
  const std::vector<int> pilots = {2, 11};
  const auto alloc = ol::full_allocation(14, pilots);
  EXPECT_THROW(ol::build_grid(dims, pilots, 2, 0, alloc, std::vector<ol::cplx>(10)),
               std::invalid_argument);
}
