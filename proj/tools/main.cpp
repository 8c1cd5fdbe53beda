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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "overlink/capacity.hpp"
#include "overlink/checks.hpp"
#include "overlink/config.hpp"
#include "overlink/manifest.hpp"
#include "overlink/simulator.hpp"

namespace {

using namespace overlink;

// Exit codes: 0 success, 2 configuration/usage error, 1 runtime failure.
constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

/// List items are numbers or inclusive "a..b" ranges with unit step.
std::vector<double> expand_double_list(const std::string& key,
                                       const std::string& text) {
  std::vector<double> out;
  for (const std::string& item : detail::split_list(text)) {
    const auto dots = item.find("..", 1);
    if (dots == std::string::npos) {
      out.push_back(detail::parse_double(key, item));
      continue;
    }
    const double a = detail::parse_double(key, item.substr(0, dots));
    const double b = detail::parse_double(key, item.substr(dots + 2));
    if (b < a) throw ConfigError(key + ": descending range '" + item + "'");
    for (double v = a; v <= b + 1e-9; v += 1.0) out.push_back(v);
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::vector<int> expand_int_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  for (double v : expand_double_list(key, text)) out.push_back(static_cast<int>(v));
  return out;
}

struct CommonOpts {
  std::string config;
  std::string out = "out";
  std::string snr, ues, speeds, dets;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  int drops = 0;
  int workers = 0;
  bool dump_channel = false;

  CLI::Option* opt_seed = nullptr;
  CLI::Option* opt_drops = nullptr;
  CLI::Option* opt_workers = nullptr;
};

void add_common_options(CLI::App* sub, CommonOpts* o) {
  sub->add_option("--config", o->config, "flat key=value configuration file");
  sub->add_option("--out", o->out, "output directory (default: out)");
  o->opt_seed = sub->add_option("--seed", o->seed, "master seed");
  o->opt_drops = sub->add_option("--drops", o->drops, "Monte Carlo drops per point");
  sub->add_option("--snr", o->snr, "SNR list in dB; items are numbers or a..b ranges");
  sub->add_option("--ues", o->ues, "user count list");
  sub->add_option("--speed-kmh", o->speeds, "terminal speed list");
  sub->add_option("--detector", o->dets, "detector list");
  o->opt_workers = sub->add_option("--workers", o->workers,
                                   "worker threads; 0 uses every core");
  sub->add_flag("--dump-channel", o->dump_channel,
                "write per-drop channel estimation diagnostics");
  sub->add_option("--set", o->sets, "extra KEY=VALUE configuration override")
      ->type_name("KEY=VALUE");
}

/// Config file first, then overrides, most specific last.
SimConfig build_config(const CommonOpts& o) {
  SimConfig cfg;
  if (!o.config.empty()) load_config_file(cfg, o.config);
  for (const std::string& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    }
    apply_config_kv(cfg, detail::trim(kv.substr(0, eq)),
                    detail::trim(kv.substr(eq + 1)));
  }
  if (o.opt_seed->count()) cfg.master_seed = o.seed;
  if (o.opt_drops->count()) cfg.n_drops = o.drops;
  if (o.opt_workers->count()) cfg.workers = o.workers;
  if (!o.snr.empty()) cfg.snr_db_list = expand_double_list("--snr", o.snr);
  if (!o.ues.empty()) cfg.ues_list = expand_int_list("--ues", o.ues);
  if (!o.speeds.empty()) {
    cfg.speed_kmh_list = expand_double_list("--speed-kmh", o.speeds);
  }
  if (!o.dets.empty()) {
    cfg.detector_list.clear();
    for (const std::string& d : detail::split_list(o.dets)) {
      cfg.detector_list.push_back(detector_from_string(d));
    }
  }
  if (o.dump_channel) cfg.dump_channel = true;
  return cfg;
}

std::string command_line(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

std::string start_manifest(const std::string& out_dir, const SimConfig& cfg,
                           const std::string& command) {
  std::filesystem::create_directories(out_dir);
  const std::string path = out_dir + "/manifest.txt";
  write_run_manifest(path, RunManifest{command, cfg});
  return path;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

int run_capacity(const CommonOpts& o, std::uint64_t draws,
                 const std::string& command) {
  SimConfig cfg = build_config(o);
  const std::vector<int> ues =
      cfg.ues_list.empty() ? std::vector<int>{cfg.n_users} : cfg.ues_list;
  const std::string manifest = start_manifest(o.out, cfg, command);

  std::ostringstream csv;
  csv << "snr_db,n_users,capacity_se,capacity_stderr,n_draws,master_seed\n";
  for (int k : ues) {
    if (k < 1) throw ConfigError("--ues: user count must be >= 1");
    for (double snr : cfg.snr_db_list) {
      const ErgodicCapacity c =
          ergodic_sum_capacity(snr, k, draws, cfg.master_seed);
      csv << detail::fmt_double(snr) << ',' << k << ','
          << detail::fmt_double(c.mean) << ',' << detail::fmt_double(c.stderr_)
          << ',' << c.n_draws << ',' << cfg.master_seed << "\n";
    }
  }
  const std::string path = o.out + "/capacity.csv";
  write_file(path, csv.str());
  append_manifest_note(manifest, "draws", std::to_string(draws));
  append_manifest_note(manifest, "output", path);
  append_manifest_note(manifest, "finished", manifest_timestamp());
  std::cout << "wrote " << path << "\n";
  return kExitOk;
}

/// One row per (detector, K, speed, SNR) at the configured MCS.  Unlike
/// sweep there is no per-point MCS adaptation.
int run_link(const CommonOpts& o, const std::string& command) {
  SimConfig cfg = build_config(o);
  const std::string manifest = start_manifest(o.out, cfg, command);

  const std::vector<Detector> dets =
      cfg.detector_list.empty() ? std::vector<Detector>{cfg.detector}
                                : cfg.detector_list;
  const std::vector<int> ues =
      cfg.ues_list.empty() ? std::vector<int>{cfg.n_users} : cfg.ues_list;
  const std::vector<double> speeds = cfg.speed_kmh_list.empty()
                                         ? std::vector<double>{cfg.speed_kmh}
                                         : cfg.speed_kmh_list;

  std::vector<MetricsRecord> records;
  std::ostringstream dump;
  dump << "detector,n_users,speed_kmh,snr_db,drop,user,sigma2_hat,mse_true\n";
  for (Detector det : dets) {
    for (int k : ues) {
      for (double speed : speeds) {
        SimConfig point = cfg;
        point.detector = det;
        point.n_users = k;
        point.speed_kmh = speed;
        ValidatedConfig v;
        try {
          v = validate(point);
        } catch (const ConfigError& e) {
          std::cerr << "skip " << to_string(det) << " K=" << k << ": "
                    << e.what() << "\n";
          continue;
        }
        const LinkSimulator sim(v);
        for (double snr : cfg.snr_db_list) {
          std::vector<ChannelDumpRow> rows;
          records.push_back(
              sim.run_point(snr, cfg.dump_channel ? &rows : nullptr));
          for (const ChannelDumpRow& r : rows) {
            dump << to_string(det) << ',' << k << ','
                 << detail::fmt_double(speed) << ','
                 << detail::fmt_double(r.snr_db) << ',' << r.drop << ','
                 << r.user << ',' << detail::fmt_double(r.sigma2_hat) << ','
                 << detail::fmt_double(r.mse_true) << "\n";
          }
        }
      }
    }
  }
  if (records.empty()) {
    throw ConfigError("link: no valid (detector, users, speed) combination");
  }

  std::ostringstream csv;
  write_metrics_csv(csv, records);
  const std::string path = o.out + "/link.csv";
  write_file(path, csv.str());
  append_manifest_note(manifest, "output", path);
  if (cfg.dump_channel) {
    const std::string dpath = o.out + "/channel_dump.csv";
    write_file(dpath, dump.str());
    append_manifest_note(manifest, "output", dpath);
  }
  append_manifest_note(manifest, "finished", manifest_timestamp());
  std::cout << "wrote " << path << " (" << records.size() << " rows)\n";
  return kExitOk;
}

int run_sweep_cmd(const CommonOpts& o, const std::string& command) {
  const SimConfig cfg = build_config(o);
  const std::string manifest = start_manifest(o.out, cfg, command);

  const std::vector<MetricsRecord> records = run_sweep(cfg, &std::cerr);
  if (records.empty()) throw ConfigError("sweep: no valid combination");

  std::ostringstream csv;
  write_metrics_csv(csv, records);
  const std::string path = o.out + "/sweep.csv";
  write_file(path, csv.str());
  append_manifest_note(manifest, "output", path);
  append_manifest_note(manifest, "finished", manifest_timestamp());
  std::cout << "wrote " << path << " (" << records.size() << " rows)\n";
  return kExitOk;
}

int run_selftest_cmd() {
  bool all_pass = true;
  for (const CheckResult& r : run_selftest()) {
    std::cout << r.summary() << "\n";
    all_pass = all_pass && r.pass;
  }
  std::cout << (all_pass ? "selftest PASS" : "selftest FAIL") << "\n";
  return all_pass ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"link-level simulator for superposed multi-user uplink"};
  app.require_subcommand(1);

  CommonOpts cap_opts, link_opts, sweep_opts;
  std::uint64_t draws = 100000;

  CLI::App* cap = app.add_subcommand(
      "capacity", "ergodic sum-capacity reference over Rayleigh fading");
  add_common_options(cap, &cap_opts);
  cap->add_option("--draws", draws, "Monte Carlo channel draws per point");

  CLI::App* link = app.add_subcommand(
      "link", "Monte Carlo link runs at the configured MCS");
  add_common_options(link, &link_opts);

  CLI::App* sweep = app.add_subcommand(
      "sweep", "link runs with per-point selection of the best MCS");
  add_common_options(sweep, &sweep_opts);

  CLI::App* self = app.add_subcommand(
      "selftest", "built-in detector and channel integrity checks");
  (void)self;

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    const std::string command = command_line(argc, argv);
    if (app.got_subcommand(cap)) return run_capacity(cap_opts, draws, command);
    if (app.got_subcommand(link)) return run_link(link_opts, command);
    if (app.got_subcommand(sweep)) return run_sweep_cmd(sweep_opts, command);
    return run_selftest_cmd();
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
