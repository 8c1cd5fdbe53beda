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
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "overlink/bcjr.hpp"
#include "overlink/channel.hpp"
#include "overlink/config.hpp"
#include "overlink/convcode.hpp"
#include "overlink/counters.hpp"
#include "overlink/demap.hpp"
#include "overlink/estimation.hpp"
#include "overlink/exhaustive.hpp"
#include "overlink/grid.hpp"
#include "overlink/interleaver.hpp"
#include "overlink/qam.hpp"
#include "overlink/rng.hpp"
#include "overlink/sic.hpp"
#include "overlink/sphere.hpp"

namespace overlink {

/// Aggregated Monte Carlo metrics for one operating point: one detector at
/// one SNR with one MCS.  Fields up to master_seed are the serialized CSV
/// columns; the trailing fields are diagnostics for tests and tooling.
struct MetricsRecord {
  double snr_db = 0.0;
  int n_users = 0;
  int n_rx = 0;
  double speed_kmh = 0.0;
  Detector detector = Detector::kSphere;
  int modulation = 4;
  Rate code_rate;
  int n_drops = 0;
  std::vector<double> bler_user;  // genie block comparison, per user
  double goodput_se = 0.0;        // delivered info bits per grid resource
  double overhead_fraction = 0.0;
  double mults_per_re = 0.0;   // complex mults per detected data RE
  double ratio_vs_sic = 0.0;   // vs a soft MMSE-SIC pass over the same slots
  double truncation_rate = 0.0;  // fraction of detection runs cut by budget
  std::uint64_t master_seed = 0;

  // Not serialized.
  double goodput_se_stderr = 0.0;
  std::vector<double> bler_per_iteration;  // idd: [iter * n_users + u]
};

/// Per-drop estimation diagnostics emitted under dump_channel.
struct ChannelDumpRow {
  double snr_db = 0.0;
  int drop = 0;
  int user = 0;
  double sigma2_hat = 0.0;
  double mse_true = 0.0;
};

/// Outcome of one simulated slot.
struct DropResult {
  std::vector<std::uint8_t> block_ok;       // per user
  std::vector<std::uint8_t> block_ok_iter;  // idd: [iter * n_users + u]
  double info_bits_ok = 0.0;
  ComplexityCounters counters;  // configured detector
  ComplexityCounters sic_ref;   // MMSE-SIC reference on the same slot
  std::vector<double> est_sigma2_hat;  // dump_channel: per user
  std::vector<double> est_mse_true;
};

/// Link-level Monte Carlo engine for one validated scenario.
///
/// Every random draw is keyed by (master seed, purpose label, drop index)
/// and nothing else, so a drop index names one channel + noise + payload
/// realization.  Detectors, MCS choices, worker counts and SNR points all
/// see the same realizations at the same drop index, which makes their
/// comparisons paired and every run bit-reproducible.
class LinkSimulator {
 public:
  explicit LinkSimulator(const ValidatedConfig& v)
      : v_(v),
        dims_{v.cfg.n_subcarriers, v.cfg.n_symbols},
        pdp_(tdla_pdp(v.cfg.delay_spread_ns * 1e-9)),
        table_(pdp_, v.cfg.n_subcarriers, v.cfg.scs_hz),
        con_(&Constellation::get(v.cfg.mcs.modulation)) {
    const SimConfig& cfg = v_.cfg;
    const int K = cfg.n_users;
    const int cells = dims_.cells();
    budget_ = cfg.sphere_max_nodes;

    power_.assign(static_cast<std::size_t>(K), 1.0);
    if (cfg.detector == Detector::kNoma2Sic) {
      // Two-user superposed transmission: user 0 is the stronger one.  The
      // split preserves the sum power of the equal-power schemes so the
      // baselines compare at the same total transmit power.
      power_[0] = 2.0 * cfg.noma_alpha;
      power_[1] = 2.0 * (1.0 - cfg.noma_alpha);
    }

    const bool oma = cfg.detector == Detector::kOma;
    alloc_.reserve(static_cast<std::size_t>(K));
    for (int u = 0; u < K; ++u) {
      alloc_.push_back(oma ? oma_allocation(cfg.n_symbols, cfg.pilot_symbols, K, u)
                           : full_allocation(cfg.n_symbols, cfg.pilot_symbols));
      data_cells_.push_back(data_cell_indices(dims_, alloc_.back()));
      cb_.push_back(code_block_dims(
          static_cast<int>(data_cells_.back().size()) * con_->bps, cfg.mcs.code_rate));
      perm_.push_back(interleaver_permutation(static_cast<std::size_t>(cb_.back().n_coded)));
      std::vector<int> pos(static_cast<std::size_t>(cells), -1);
      for (std::size_t i = 0; i < data_cells_.back().size(); ++i) {
        pos[static_cast<std::size_t>(data_cells_.back()[i])] = static_cast<int>(i);
      }
      stream_pos_.push_back(std::move(pos));
    }
    all_data_cells_ = data_cell_indices(
        dims_, full_allocation(cfg.n_symbols, cfg.pilot_symbols));
    if (oma) {
      owner_.assign(static_cast<std::size_t>(cells), -1);
      for (int u = 0; u < K; ++u) {
        for (int cell : data_cells_[static_cast<std::size_t>(u)]) {
          owner_[static_cast<std::size_t>(cell)] = u;
        }
      }
    }
  }

  const ValidatedConfig& validated() const { return v_; }

  /// Simulates one slot at one SNR.  Pure function of (config, snr, drop).
  DropResult run_drop(double snr_db, int drop_index) const {
    SlotState st;
    DropResult out;
    build_slot(snr_db, drop_index, &st, &out);

    const SimConfig& cfg = v_.cfg;
    const int K = cfg.n_users;
    out.block_ok.assign(static_cast<std::size_t>(K), 0);

    std::vector<std::vector<double>> post(static_cast<std::size_t>(K));
    for (int u = 0; u < K; ++u) {
      post[static_cast<std::size_t>(u)].assign(
          static_cast<std::size_t>(cb_[static_cast<std::size_t>(u)].n_coded), 0.0);
    }

    if (cfg.detector == Detector::kIdd) {
      const int n_it = cfg.idd_iterations;
      const double clip = cfg.llr_clip;
      out.block_ok_iter.assign(static_cast<std::size_t>(n_it) * K, 0);
      std::vector<std::vector<double>> prior(static_cast<std::size_t>(K));
      for (int u = 0; u < K; ++u) {
        prior[static_cast<std::size_t>(u)].assign(post[static_cast<std::size_t>(u)].size(), 0.0);
      }
      for (int it = 0; it < n_it; ++it) {
        detect_slot(st, it ? &prior : nullptr, &post, &out.counters);
        for (int u = 0; u < K; ++u) {
          auto& pu = post[static_cast<std::size_t>(u)];
          auto& qu = prior[static_cast<std::size_t>(u)];
          // The detector hands on its extrinsic, posterior minus the prior
          // it was fed, clipped at the module boundary.  Clipping the
          // posterior instead would erase the channel evidence wherever a
          // saturated prior agrees with it.
          std::vector<double> ext = pu;
          if (it) {
            for (std::size_t i = 0; i < ext.size(); ++i) ext[i] -= qu[i];
          }
          for (double& x : ext) x = std::clamp(x, -clip, clip);
          BcjrResult res;
          const bool ok = decode_user(u, ext, st.tx_bits[static_cast<std::size_t>(u)], &res);
          out.block_ok_iter[static_cast<std::size_t>(it) * K + u] = ok ? 1 : 0;
          if (it + 1 == n_it) {
            out.block_ok[static_cast<std::size_t>(u)] = ok ? 1 : 0;
            if (ok) out.info_bits_ok += cb_[static_cast<std::size_t>(u)].n_info;
          } else {
            std::vector<double> fed =
                rerate_match(res.coded_extrinsic, cfg.mcs.code_rate);
            for (double& x : fed) x = std::clamp(x, -clip, clip);
            qu = interleave(fed, perm_[static_cast<std::size_t>(u)]);
          }
        }
      }
    } else {
      const double clip = cfg.llr_clip;
      detect_slot(st, nullptr, &post, &out.counters);
      for (int u = 0; u < K; ++u) {
        for (double& x : post[static_cast<std::size_t>(u)]) {
          x = std::clamp(x, -clip, clip);
        }
        BcjrResult res;
        const bool ok = decode_user(u, post[static_cast<std::size_t>(u)],
                                    st.tx_bits[static_cast<std::size_t>(u)], &res);
        out.block_ok[static_cast<std::size_t>(u)] = ok ? 1 : 0;
        if (ok) out.info_bits_ok += cb_[static_cast<std::size_t>(u)].n_info;
      }
    }

    run_sic_reference(st, &out.sic_ref);
    return out;
  }

  /// Runs n_drops independent slots and reduces them in drop order.  The
  /// reduction order is fixed, so the result does not depend on the worker
  /// count or on scheduling.
  MetricsRecord run_point(double snr_db,
                          std::vector<ChannelDumpRow>* dump = nullptr) const {
    const SimConfig& cfg = v_.cfg;
    const int n = cfg.n_drops;
    const int K = cfg.n_users;
    std::vector<DropResult> res(static_cast<std::size_t>(n));

    const int workers = worker_count();
    if (workers <= 1) {
      for (int i = 0; i < n; ++i) res[static_cast<std::size_t>(i)] = run_drop(snr_db, i);
    } else {
      std::atomic<int> next{0};
      auto work = [&]() {
        for (;;) {
          const int i = next.fetch_add(1, std::memory_order_relaxed);
          if (i >= n) return;
          res[static_cast<std::size_t>(i)] = run_drop(snr_db, i);
        }
      };
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(workers));
      for (int w = 0; w < workers; ++w) pool.emplace_back(work);
      for (auto& t : pool) t.join();
    }

    MetricsRecord rec;
    rec.snr_db = snr_db;
    rec.n_users = K;
    rec.n_rx = cfg.n_rx;
    rec.speed_kmh = cfg.speed_kmh;
    rec.detector = cfg.detector;
    rec.modulation = cfg.mcs.modulation;
    rec.code_rate = cfg.mcs.code_rate;
    rec.n_drops = n;
    rec.overhead_fraction = v_.overhead_fraction;
    rec.master_seed = cfg.master_seed;

    std::vector<std::int64_t> err(static_cast<std::size_t>(K), 0);
    std::vector<std::int64_t> err_iter;
    if (cfg.detector == Detector::kIdd) {
      err_iter.assign(static_cast<std::size_t>(cfg.idd_iterations) * K, 0);
    }
    const double cells = static_cast<double>(dims_.cells());
    double gsum = 0.0, gsq = 0.0;
    ComplexityCounters tot, ref;
    for (int i = 0; i < n; ++i) {
      const DropResult& d = res[static_cast<std::size_t>(i)];
      for (int u = 0; u < K; ++u) {
        if (!d.block_ok[static_cast<std::size_t>(u)]) ++err[static_cast<std::size_t>(u)];
      }
      for (std::size_t j = 0; j < err_iter.size(); ++j) {
        if (!d.block_ok_iter[j]) ++err_iter[j];
      }
      const double g = d.info_bits_ok / cells;
      gsum += g;
      gsq += g * g;
      tot += d.counters;
      ref += d.sic_ref;
      if (dump && cfg.dump_channel) {
        for (int u = 0; u < K; ++u) {
          dump->push_back({snr_db, i, u,
                           d.est_sigma2_hat[static_cast<std::size_t>(u)],
                           d.est_mse_true[static_cast<std::size_t>(u)]});
        }
      }
    }

    rec.bler_user.resize(static_cast<std::size_t>(K));
    for (int u = 0; u < K; ++u) {
      rec.bler_user[static_cast<std::size_t>(u)] =
          static_cast<double>(err[static_cast<std::size_t>(u)]) / n;
    }
    rec.bler_per_iteration.resize(err_iter.size());
    for (std::size_t j = 0; j < err_iter.size(); ++j) {
      rec.bler_per_iteration[j] = static_cast<double>(err_iter[j]) / n;
    }
    rec.goodput_se = gsum / n;
    if (n > 1) {
      const double var = std::max(0.0, (gsq - gsum * gsum / n) / (n - 1));
      rec.goodput_se_stderr = std::sqrt(var / n);
    }
    const double res_total = static_cast<double>(n) * static_cast<double>(all_data_cells_.size());
    rec.mults_per_re = tot.complex_mults() / res_total;
    rec.ratio_vs_sic =
        ref.complex_mults() > 0.0 ? tot.complex_mults() / ref.complex_mults() : 0.0;
    rec.truncation_rate =
        tot.detector_runs ? static_cast<double>(tot.truncated) / tot.detector_runs : 0.0;
    return rec;
  }

 private:
  struct SlotState {
    double sigma2 = 0.0;
    std::vector<std::vector<std::uint8_t>> tx_bits;  // per user
    std::vector<cplx> rx;                            // [r * cells + cell]
    std::vector<UserChannelEstimate> est;            // per user
    std::vector<double> eff_noise;                   // practical CSI only
  };

  // Seed index packing; drop indices stay far below 2^44.
  static std::uint64_t seed_index(int tag, int drop) {
    return (static_cast<std::uint64_t>(tag) << 44) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(drop));
  }

  int worker_count() const {
    if (v_.cfg.workers > 0) return v_.cfg.workers;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
  }

  void build_slot(double snr_db, int drop, SlotState* st, DropResult* out) const {
    const SimConfig& cfg = v_.cfg;
    const int K = cfg.n_users;
    const int R = cfg.n_rx;
    const int cells = dims_.cells();
    st->sigma2 = 1.0 / db_to_linear(snr_db);
    st->tx_bits.resize(static_cast<std::size_t>(K));
    st->rx.assign(static_cast<std::size_t>(R) * cells, cplx(0, 0));
    st->est.resize(static_cast<std::size_t>(K));

    std::vector<std::vector<cplx>> truth(static_cast<std::size_t>(K));
    for (int u = 0; u < K; ++u) {
      const CodeBlockDims& cb = cb_[static_cast<std::size_t>(u)];
      Rng bits_rng(derive_seed(cfg.master_seed, "drop/payload", seed_index(u, drop)));
      std::vector<std::uint8_t>& bits = st->tx_bits[static_cast<std::size_t>(u)];
      bits.resize(static_cast<std::size_t>(cb.n_info));
      for (auto& b : bits) b = static_cast<std::uint8_t>(bits_rng.next_u64() & 1);

      const std::vector<std::uint8_t> coded = encode_block(bits, cfg.mcs.code_rate);
      const std::vector<std::uint8_t> tx_stream =
          interleave(coded, perm_[static_cast<std::size_t>(u)]);
      const std::vector<cplx> syms = map_qam(tx_stream, cfg.mcs.modulation);
      const UserGrid grid = build_grid(dims_, cfg.pilot_symbols, K, u,
                                       alloc_[static_cast<std::size_t>(u)], syms);

      const double amp = std::sqrt(power_[static_cast<std::size_t>(u)]);
      std::vector<cplx>& tr = truth[static_cast<std::size_t>(u)];
      tr.resize(static_cast<std::size_t>(R) * cells);
      for (int r = 0; r < R; ++r) {
        const FadingProcess fade = generate_fading(
            pdp_, v_.doppler_hz, cfg.n_symbols, v_.symbol_duration_s,
            derive_seed(cfg.master_seed, "drop/fading", seed_index(u * kMaxRx + r, drop)));
        const std::vector<cplx> h = freq_response(fade, table_);
        cplx* dst = st->rx.data() + static_cast<std::size_t>(r) * cells;
        cplx* eff = tr.data() + static_cast<std::size_t>(r) * cells;
        for (int i = 0; i < cells; ++i) {
          eff[i] = amp * h[static_cast<std::size_t>(i)];
          dst[i] += grid.cells[static_cast<std::size_t>(i)] * eff[i];
        }
      }
    }

    const double sigma = std::sqrt(st->sigma2);
    for (int r = 0; r < R; ++r) {
      Rng noise_rng(derive_seed(cfg.master_seed, "drop/noise", seed_index(r, drop)));
      cplx* dst = st->rx.data() + static_cast<std::size_t>(r) * cells;
      for (int i = 0; i < cells; ++i) dst[i] += sigma * noise_rng.cgaussian();
    }

    if (cfg.csi == CsiMode::kGenie) {
      for (int u = 0; u < K; ++u) {
        UserChannelEstimate& e = st->est[static_cast<std::size_t>(u)];
        e.dims = dims_;
        e.n_rx = R;
        e.h = std::move(truth[static_cast<std::size_t>(u)]);
        e.sigma2_hat = st->sigma2;
        e.mse_true = 0.0;
      }
    } else {
      double shat = 0.0;
      for (int u = 0; u < K; ++u) {
        st->est[static_cast<std::size_t>(u)] = estimate_user_channel(
            st->rx, R, dims_, cfg.pilot_symbols, u, K);
        shat += st->est[static_cast<std::size_t>(u)].sigma2_hat;
      }
      shat /= K;
      st->eff_noise = effective_noise_grid(st->est, dims_, cfg.pilot_symbols, shat);
      if (cfg.dump_channel) {
        for (int u = 0; u < K; ++u) {
          st->est[static_cast<std::size_t>(u)].mse_true = estimate_mse(
              st->est[static_cast<std::size_t>(u)].h, truth[static_cast<std::size_t>(u)]);
        }
      }
    }

    if (cfg.dump_channel) {
      out->est_sigma2_hat.resize(static_cast<std::size_t>(K));
      out->est_mse_true.resize(static_cast<std::size_t>(K));
      for (int u = 0; u < K; ++u) {
        out->est_sigma2_hat[static_cast<std::size_t>(u)] =
            st->est[static_cast<std::size_t>(u)].sigma2_hat;
        out->est_mse_true[static_cast<std::size_t>(u)] =
            st->est[static_cast<std::size_t>(u)].mse_true;
      }
    }
  }

  /// One detection pass over every data RE.  Writes raw per-bit posteriors
  /// into post (coded-stream order, per user); the caller clips whatever it
  /// hands on.  Priors, when given, are clipped coded-stream LLRs fed to
  /// the tree search.
  void detect_slot(const SlotState& st,
                   const std::vector<std::vector<double>>* priors,
                   std::vector<std::vector<double>>* post,
                   ComplexityCounters* counters) const {
    const SimConfig& cfg = v_.cfg;
    const Constellation& c = *con_;
    const int bps = c.bps;
    const int K = cfg.n_users;
    const int R = cfg.n_rx;
    const int cells = dims_.cells();
    const bool practical = cfg.csi == CsiMode::kPractical;

    SphereDetector sphere;
    cplx yv[kMaxRx];
    cplx hm[kMaxRx * kMaxUsers];
    double llr[kMaxUsers * 6];
    double pri[kMaxUsers * 6];

    for (int cell : all_data_cells_) {
      const double s2 = practical ? st.eff_noise[static_cast<std::size_t>(cell)] : st.sigma2;
      for (int r = 0; r < R; ++r) {
        yv[r] = st.rx[static_cast<std::size_t>(r) * cells + cell];
      }

      if (cfg.detector == Detector::kOma) {
        const int u = owner_[static_cast<std::size_t>(cell)];
        const UserChannelEstimate& e = st.est[static_cast<std::size_t>(u)];
        for (int r = 0; r < R; ++r) hm[r] = e.h[static_cast<std::size_t>(r) * cells + cell];
        single_user_demap(yv, hm, R, c, s2, llr, counters);
        if (counters) {
          counters->re_detected++;
          counters->detector_runs++;
        }
        const int pos = stream_pos_[static_cast<std::size_t>(u)][static_cast<std::size_t>(cell)];
        double* dst = (*post)[static_cast<std::size_t>(u)].data() +
                      static_cast<std::size_t>(pos) * bps;
        for (int b = 0; b < bps; ++b) dst[b] = llr[b];
        continue;
      }

      for (int u = 0; u < K; ++u) {
        const UserChannelEstimate& e = st.est[static_cast<std::size_t>(u)];
        for (int r = 0; r < R; ++r) {
          hm[u * R + r] = e.h[static_cast<std::size_t>(r) * cells + cell];
        }
      }
      // All superposed allocations share the full data grid, so every user
      // maps this cell to the same stream position.
      const int pos = stream_pos_[0][static_cast<std::size_t>(cell)];

      switch (cfg.detector) {
        case Detector::kMmseSic:
          mmse_sic_detect(yv, hm, R, K, c, s2, SicOptions{}, llr, counters);
          break;
        case Detector::kNoma2Sic:
          noma2_sic_detect(yv, hm, R, c, s2, /*strong_user=*/0, llr, counters);
          break;
        case Detector::kExhaustive:
          exhaustive_maxlog(yv, hm, R, K, c, s2, JointDetectOptions{}, llr, counters);
          break;
        case Detector::kSphere:
        case Detector::kIdd: {
          const double* pp = nullptr;
          if (priors) {
            for (int u = 0; u < K; ++u) {
              const double* src = (*priors)[static_cast<std::size_t>(u)].data() +
                                  static_cast<std::size_t>(pos) * bps;
              for (int b = 0; b < bps; ++b) pri[u * bps + b] = src[b];
            }
            pp = pri;
          }
          sphere.detect(yv, hm, R, K, c, s2, pp, budget_, llr, counters);
          break;
        }
        default:
          throw std::logic_error("detect_slot: unhandled detector");
      }

      for (int u = 0; u < K; ++u) {
        double* dst = (*post)[static_cast<std::size_t>(u)].data() +
                      static_cast<std::size_t>(pos) * bps;
        for (int b = 0; b < bps; ++b) dst[b] = llr[u * bps + b];
      }
    }
  }

  /// Complexity reference: one soft MMSE-SIC pass over the same received
  /// slot.  Orthogonal allocations degenerate to a single-user stage per RE.
  void run_sic_reference(const SlotState& st, ComplexityCounters* counters) const {
    const SimConfig& cfg = v_.cfg;
    const Constellation& c = *con_;
    const int K = cfg.n_users;
    const int R = cfg.n_rx;
    const int cells = dims_.cells();
    const bool practical = cfg.csi == CsiMode::kPractical;
    const bool oma = cfg.detector == Detector::kOma;

    cplx yv[kMaxRx];
    cplx hm[kMaxRx * kMaxUsers];
    double llr[kMaxUsers * 6];

    for (int cell : all_data_cells_) {
      const double s2 = practical ? st.eff_noise[static_cast<std::size_t>(cell)] : st.sigma2;
      for (int r = 0; r < R; ++r) {
        yv[r] = st.rx[static_cast<std::size_t>(r) * cells + cell];
      }
      int active = K;
      if (oma) {
        const int u = owner_[static_cast<std::size_t>(cell)];
        const UserChannelEstimate& e = st.est[static_cast<std::size_t>(u)];
        for (int r = 0; r < R; ++r) hm[r] = e.h[static_cast<std::size_t>(r) * cells + cell];
        active = 1;
      } else {
        for (int u = 0; u < K; ++u) {
          const UserChannelEstimate& e = st.est[static_cast<std::size_t>(u)];
          for (int r = 0; r < R; ++r) {
            hm[u * R + r] = e.h[static_cast<std::size_t>(r) * cells + cell];
          }
        }
      }
      mmse_sic_detect(yv, hm, R, active, c, s2, SicOptions{}, llr, counters);
    }
  }

  bool decode_user(int u, const std::vector<double>& stream,
                   const std::vector<std::uint8_t>& tx, BcjrResult* out) const {
    const std::vector<double> d = deinterleave(stream, perm_[static_cast<std::size_t>(u)]);
    const std::vector<double> mother =
        derate_match(d, v_.cfg.mcs.code_rate, cb_[static_cast<std::size_t>(u)].n_mother);
    *out = bcjr_decode(mother, cb_[static_cast<std::size_t>(u)].n_info);
    return out->info_bits == tx;
  }

  ValidatedConfig v_;
  GridDims dims_;
  PowerDelayProfile pdp_;
  FreqResponseTable table_;
  const Constellation* con_ = nullptr;
  std::uint64_t budget_ = 0;
  std::vector<double> power_;
  std::vector<Allocation> alloc_;
  std::vector<std::vector<int>> data_cells_;  // per user, stream order
  std::vector<CodeBlockDims> cb_;
  std::vector<std::vector<std::uint32_t>> perm_;
  std::vector<std::vector<int>> stream_pos_;  // per user: cell -> symbol index
  std::vector<int> all_data_cells_;           // scan order
  std::vector<int> owner_;                    // orthogonal split only
};

// ---------------------------------------------------------------------------
// Sweeps.
// ---------------------------------------------------------------------------

/// Cartesian sweep over detectors, user counts, speeds and SNRs.  The MCS
/// lists form a per-point adaptation set: each point is simulated once per
/// candidate MCS and reports the candidate with the highest goodput (ideal
/// link adaptation with hindsight).  Seeds depend only on the drop index,
/// so every candidate sees identical channels and payload prefixes.
///
/// Combinations a detector cannot support (the two-user superposition
/// scheme away from K = 2, an exhaustive search past its size cap) are
/// skipped with a note to log.
inline std::vector<MetricsRecord> run_sweep(const SimConfig& base,
                                            std::ostream* log = nullptr) {
  const std::vector<Detector> dets =
      base.detector_list.empty() ? std::vector<Detector>{base.detector}
                                 : base.detector_list;
  const std::vector<int> ues =
      base.ues_list.empty() ? std::vector<int>{base.n_users} : base.ues_list;
  const std::vector<double> speeds = base.speed_kmh_list.empty()
                                         ? std::vector<double>{base.speed_kmh}
                                         : base.speed_kmh_list;

  std::vector<MetricsRecord> out;
  for (Detector det : dets) {
    for (int k : ues) {
      for (double speed : speeds) {
        std::vector<MetricsRecord> best(base.snr_db_list.size());
        std::vector<bool> have(base.snr_db_list.size(), false);
        for (int mod : base.mcs_modulations) {
          for (const Rate& rate : base.mcs_rates) {
            SimConfig cfg = base;
            cfg.detector = det;
            cfg.n_users = k;
            cfg.speed_kmh = speed;
            cfg.mcs.modulation = mod;
            cfg.mcs.code_rate = rate;
            ValidatedConfig v;
            try {
              v = validate(cfg);
            } catch (const ConfigError& e) {
              if (log) {
                *log << "# skip " << to_string(det) << " K=" << k << " mcs=" << mod
                     << "," << to_string(rate) << ": " << e.what() << "\n";
              }
              continue;
            }
            const LinkSimulator sim(v);
            for (std::size_t si = 0; si < base.snr_db_list.size(); ++si) {
              MetricsRecord rec = sim.run_point(base.snr_db_list[si]);
              if (!have[si] || rec.goodput_se > best[si].goodput_se) {
                best[si] = std::move(rec);
                have[si] = true;
              }
            }
          }
        }
        for (std::size_t si = 0; si < best.size(); ++si) {
          if (have[si]) out.push_back(std::move(best[si]));
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV serialization.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace detail

/// Fixed-column CSV.  Mixed user counts pad the per-user BLER columns up to
/// the widest row; absent entries stay empty.  Formatting is locale-free and
/// deterministic, so equal records serialize to identical bytes.
inline void write_metrics_csv(std::ostream& out,
                              const std::vector<MetricsRecord>& recs) {
  int k_max = 0;
  for (const MetricsRecord& r : recs) k_max = std::max(k_max, r.n_users);

  out << "snr_db,n_users,n_rx,speed_kmh,detector,modulation,code_rate,n_drops";
  for (int k = 0; k < k_max; ++k) out << ",bler_user_" << k;
  out << ",goodput_se,overhead_fraction,mults_per_re,ratio_vs_sic,"
         "truncation_rate,master_seed\n";

  for (const MetricsRecord& r : recs) {
    out << detail::fmt_double(r.snr_db) << ',' << r.n_users << ',' << r.n_rx
        << ',' << detail::fmt_double(r.speed_kmh) << ',' << to_string(r.detector)
        << ',' << r.modulation << ',' << to_string(r.code_rate) << ','
        << r.n_drops;
    for (int k = 0; k < k_max; ++k) {
      out << ',';
      if (k < r.n_users) out << detail::fmt_double(r.bler_user[static_cast<std::size_t>(k)]);
    }
    out << ',' << detail::fmt_double(r.goodput_se) << ','
        << detail::fmt_double(r.overhead_fraction) << ','
        << detail::fmt_double(r.mults_per_re) << ','
        << detail::fmt_double(r.ratio_vs_sic) << ','
        << detail::fmt_double(r.truncation_rate) << ',' << r.master_seed << "\n";
  }
}

inline void write_channel_dump_csv(std::ostream& out,
                                   const std::vector<ChannelDumpRow>& rows) {
  out << "snr_db,drop,user,sigma2_hat,mse_true\n";
  for (const ChannelDumpRow& r : rows) {
    out << detail::fmt_double(r.snr_db) << ',' << r.drop << ',' << r.user << ','
        << detail::fmt_double(r.sigma2_hat) << ','
        << detail::fmt_double(r.mse_true) << "\n";
  }
}

}  // namespace overlink
