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
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "overlink/common.hpp"

namespace overlink {

/// Raised on any invalid or inconsistent configuration value.  The message
/// names the offending field and the value it carried.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Detector { kOma, kNoma2Sic, kMmseSic, kExhaustive, kSphere, kIdd };

enum class CsiMode { kGenie, kPractical };

inline std::string to_string(Detector d) {
  switch (d) {
    case Detector::kOma: return "oma";
    case Detector::kNoma2Sic: return "noma2_sic";
    case Detector::kMmseSic: return "mmse_sic";
    case Detector::kExhaustive: return "exhaustive";
    case Detector::kSphere: return "sphere";
    case Detector::kIdd: return "idd";
  }
  return "?";
}

inline Detector detector_from_string(std::string_view s) {
  if (s == "oma") return Detector::kOma;
  if (s == "noma2_sic") return Detector::kNoma2Sic;
  if (s == "mmse_sic") return Detector::kMmseSic;
  if (s == "exhaustive") return Detector::kExhaustive;
  if (s == "sphere") return Detector::kSphere;
  if (s == "idd") return Detector::kIdd;
  throw ConfigError("detector: unknown value '" + std::string(s) + "'");
}

inline std::string to_string(CsiMode m) {
  return m == CsiMode::kGenie ? "genie" : "practical";
}

inline CsiMode csi_from_string(std::string_view s) {
  if (s == "genie") return CsiMode::kGenie;
  if (s == "practical") return CsiMode::kPractical;
  throw ConfigError("csi: unknown value '" + std::string(s) + "'");
}

/// Code rate as an exact fraction; only the rates the rate matcher supports.
struct Rate {
  int num = 1;
  int den = 2;

  double value() const { return static_cast<double>(num) / den; }
  friend bool operator==(const Rate& a, const Rate& b) {
    return a.num == b.num && a.den == b.den;
  }
};

inline const std::vector<Rate>& supported_rates() {
  static const std::vector<Rate> rates = {{1, 4}, {1, 3}, {1, 2}, {2, 3}, {3, 4}};
  return rates;
}

inline std::string to_string(const Rate& r) {
  return std::to_string(r.num) + "/" + std::to_string(r.den);
}

inline Rate rate_from_string(std::string_view s) {
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) {
    throw ConfigError("code_rate: expected 'num/den', got '" + std::string(s) + "'");
  }
  Rate r;
  try {
    r.num = std::stoi(std::string(s.substr(0, slash)));
    r.den = std::stoi(std::string(s.substr(slash + 1)));
  } catch (const std::exception&) {
    throw ConfigError("code_rate: expected 'num/den', got '" + std::string(s) + "'");
  }
  for (const Rate& known : supported_rates()) {
    if (known == r) return r;
  }
  throw ConfigError("code_rate: unsupported rate '" + std::string(s) + "'");
}

struct McsConfig {
  int modulation = 4;  // constellation size: 4, 16 or 64
  Rate code_rate = {1, 2};

  int bits_per_symbol() const {
    return modulation == 4 ? 2 : (modulation == 16 ? 4 : 6);
  }
};

/// Code block geometry derived from the number of coded bits a resource
/// allocation can carry.  The convolutional mother code is rate 1/2 with six
/// tail bits, so n_mother = 2 * (n_info + 6); puncturing or repetition maps
/// the mother stream onto exactly n_coded transmitted bits.
struct CodeBlockDims {
  int n_coded = 0;
  int n_info = 0;
  int n_mother = 0;
};

inline CodeBlockDims code_block_dims(int n_coded_bits, const Rate& rate) {
  if (n_coded_bits <= 0) {
    throw ConfigError("code block: allocation carries no coded bits");
  }
  const long long scaled = static_cast<long long>(n_coded_bits) * rate.num;
  if (scaled % rate.den != 0) {
    throw ConfigError("code block: " + std::to_string(n_coded_bits) +
                      " coded bits incompatible with rate " + to_string(rate));
  }
  const long long in_bits = scaled / rate.den;  // n_info + 6 tail bits
  if (in_bits % rate.num != 0) {
    throw ConfigError("code block: input length " + std::to_string(in_bits) +
                      " not divisible by puncture period " + std::to_string(rate.num));
  }
  if (in_bits <= 6) {
    throw ConfigError("code block: allocation too small for tail bits");
  }
  CodeBlockDims dims;
  dims.n_coded = n_coded_bits;
  dims.n_info = static_cast<int>(in_bits) - 6;
  dims.n_mother = 2 * static_cast<int>(in_bits);
  return dims;
}

/// Full scenario description.  Field defaults give the headline operating
/// point: four single-antenna users over a one-antenna receiver, 48x14 grid
/// at 30 kHz subcarrier spacing, 2 GHz carrier, 100 ns delay spread.
struct SimConfig {
  double carrier_hz = 2.0e9;
  double scs_hz = 30.0e3;
  int n_subcarriers = 48;
  int n_symbols = 14;
  double delay_spread_ns = 100.0;

  int n_users = 4;
  int n_rx = 1;
  double speed_kmh = 5.0;

  std::vector<double> snr_db_list = {4.0};
  Detector detector = Detector::kSphere;
  McsConfig mcs;
  CsiMode csi = CsiMode::kPractical;

  int n_drops = 100;
  std::uint64_t master_seed = 1;

  int idd_iterations = 3;
  double llr_clip = 16.0;
  std::vector<int> pilot_symbols = {2, 11};

  double noma_alpha = 0.8;       // power fraction of the stronger user, 2-user superposition
  std::uint64_t sphere_max_nodes = 0;  // per-RE node budget; 0 = unbounded
  int workers = 0;               // 0 = one thread per hardware core
  bool dump_channel = false;

  // Sweep axes; empty lists fall back to the scalar fields above.
  std::vector<int> ues_list;
  std::vector<double> speed_kmh_list;
  std::vector<Detector> detector_list;
  std::vector<int> mcs_modulations = {4};
  std::vector<Rate> mcs_rates = {{1, 4}, {1, 3}, {1, 2}, {2, 3}, {3, 4}};
};

/// A SimConfig that passed validation, plus quantities derived from it.
struct ValidatedConfig {
  SimConfig cfg;
  double doppler_hz = 0.0;
  double symbol_duration_s = 0.0;
  double slot_duration_s = 0.0;
  double overhead_fraction = 0.0;
  int n_data_symbols = 0;
};

namespace detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace detail

/// Checks every field and cross-field constraint.  Throws ConfigError naming
/// the offending field; never mutates its argument.  Idempotent: validating
/// the embedded config of a ValidatedConfig succeeds with equal results.
inline ValidatedConfig validate(const SimConfig& cfg) {
  using detail::require;

  require(cfg.carrier_hz > 0, "carrier_hz: must be positive, got " +
                                  std::to_string(cfg.carrier_hz));
  require(cfg.scs_hz > 0,
          "scs_hz: must be positive, got " + std::to_string(cfg.scs_hz));
  require(cfg.n_subcarriers >= 1, "n_subcarriers: must be >= 1, got " +
                                      std::to_string(cfg.n_subcarriers));
  require(cfg.n_symbols >= 1,
          "n_symbols: must be >= 1, got " + std::to_string(cfg.n_symbols));
  require(cfg.delay_spread_ns >= 0, "delay_spread_ns: must be >= 0, got " +
                                        std::to_string(cfg.delay_spread_ns));
  require(cfg.n_users >= 1 && cfg.n_users <= 6,
          "n_users: must be in [1, 6], got " + std::to_string(cfg.n_users));
  require(cfg.n_rx >= 1, "n_rx: must be >= 1, got " + std::to_string(cfg.n_rx));
  require(cfg.n_subcarriers >= cfg.n_users,
          "n_subcarriers: need at least one pilot subcarrier per user");
  require(cfg.speed_kmh >= 0,
          "speed_kmh: must be >= 0, got " + std::to_string(cfg.speed_kmh));
  require(!cfg.snr_db_list.empty(), "snr_db_list: must not be empty");
  require(cfg.n_drops >= 1,
          "n_drops: must be >= 1, got " + std::to_string(cfg.n_drops));
  require(cfg.idd_iterations >= 1, "idd_iterations: must be >= 1, got " +
                                       std::to_string(cfg.idd_iterations));
  require(cfg.llr_clip > 0,
          "llr_clip: must be positive, got " + std::to_string(cfg.llr_clip));

  require(cfg.mcs.modulation == 4 || cfg.mcs.modulation == 16 ||
              cfg.mcs.modulation == 64,
          "modulation: must be 4, 16 or 64, got " +
              std::to_string(cfg.mcs.modulation));
  {
    bool known = false;
    for (const Rate& r : supported_rates()) known |= (r == cfg.mcs.code_rate);
    require(known, "code_rate: unsupported rate " + to_string(cfg.mcs.code_rate));
  }

  require(!cfg.pilot_symbols.empty(), "pilot_symbols: must not be empty");
  {
    std::vector<int> p = cfg.pilot_symbols;
    for (int idx : p) {
      require(idx >= 0 && idx < cfg.n_symbols,
              "pilot_symbols: index " + std::to_string(idx) +
                  " outside [0, " + std::to_string(cfg.n_symbols) + ")");
    }
    std::sort(p.begin(), p.end());
    require(std::adjacent_find(p.begin(), p.end()) == p.end(),
            "pilot_symbols: duplicate index");
    require(static_cast<int>(p.size()) < cfg.n_symbols,
            "pilot_symbols: no data symbols left");
  }

  if (cfg.detector == Detector::kNoma2Sic) {
    require(cfg.n_users == 2,
            "detector: noma2_sic requires n_users = 2, got " +
                std::to_string(cfg.n_users));
    require(cfg.noma_alpha > 0.5 && cfg.noma_alpha < 1.0,
            "noma_alpha: must lie in (0.5, 1), got " +
                std::to_string(cfg.noma_alpha));
  }
  if (cfg.detector == Detector::kExhaustive) {
    double combos = 1.0;
    for (int k = 0; k < cfg.n_users; ++k) combos *= cfg.mcs.modulation;
    require(combos <= 65536.0,
            "detector: exhaustive search space M^K exceeds 65536");
  }

  // The configured MCS must tile the data allocation exactly, both for the
  // joint full-grid allocation and for the per-user slices an orthogonal
  // split produces.
  const int n_data_symbols =
      cfg.n_symbols - static_cast<int>(cfg.pilot_symbols.size());
  const int bps = cfg.mcs.bits_per_symbol();
  if (cfg.detector == Detector::kOma) {
    for (int u = 0; u < cfg.n_users; ++u) {
      int own = 0;
      for (int d = 0; d < n_data_symbols; ++d) {
        if (d % cfg.n_users == u) ++own;
      }
      code_block_dims(own * cfg.n_subcarriers * bps, cfg.mcs.code_rate);
    }
  } else {
    code_block_dims(n_data_symbols * cfg.n_subcarriers * bps, cfg.mcs.code_rate);
  }

  ValidatedConfig v;
  v.cfg = cfg;
  v.doppler_hz = cfg.speed_kmh / 3.6 * cfg.carrier_hz / kSpeedOfLight;
  v.symbol_duration_s = 1.0 / cfg.scs_hz;
  v.slot_duration_s = cfg.n_symbols / cfg.scs_hz;
  v.overhead_fraction =
      static_cast<double>(cfg.pilot_symbols.size()) / cfg.n_symbols;
  v.n_data_symbols = n_data_symbols;
  return v;
}

// ---------------------------------------------------------------------------
// Flat key=value configuration files.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

inline double parse_double(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + s + "'");
  }
}

inline long long parse_int(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + s + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an unsigned integer, got '" + s + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + s + "'");
}

}  // namespace detail

/// Applies one key=value pair to a config.  Unknown keys are errors: a typo
/// in a config file must not silently fall back to a default.
inline void apply_config_kv(SimConfig& cfg, const std::string& key,
                            const std::string& value) {
  using namespace detail;
  if (key == "carrier_hz") {
    cfg.carrier_hz = parse_double(key, value);
  } else if (key == "scs_hz") {
    cfg.scs_hz = parse_double(key, value);
  } else if (key == "n_subcarriers") {
    cfg.n_subcarriers = static_cast<int>(parse_int(key, value));
  } else if (key == "n_symbols") {
    cfg.n_symbols = static_cast<int>(parse_int(key, value));
  } else if (key == "delay_spread_ns") {
    cfg.delay_spread_ns = parse_double(key, value);
  } else if (key == "n_users") {
    cfg.n_users = static_cast<int>(parse_int(key, value));
  } else if (key == "n_rx") {
    cfg.n_rx = static_cast<int>(parse_int(key, value));
  } else if (key == "speed_kmh") {
    cfg.speed_kmh = parse_double(key, value);
  } else if (key == "snr_db_list") {
    cfg.snr_db_list.clear();
    for (const auto& item : split_list(value)) {
      cfg.snr_db_list.push_back(parse_double(key, item));
    }
  } else if (key == "detector") {
    cfg.detector = detector_from_string(value);
  } else if (key == "modulation") {
    cfg.mcs.modulation = static_cast<int>(parse_int(key, value));
  } else if (key == "code_rate") {
    cfg.mcs.code_rate = rate_from_string(value);
  } else if (key == "csi") {
    cfg.csi = csi_from_string(value);
  } else if (key == "n_drops") {
    cfg.n_drops = static_cast<int>(parse_int(key, value));
  } else if (key == "master_seed") {
    cfg.master_seed = parse_u64(key, value);
  } else if (key == "idd_iterations") {
    cfg.idd_iterations = static_cast<int>(parse_int(key, value));
  } else if (key == "llr_clip") {
    cfg.llr_clip = parse_double(key, value);
  } else if (key == "pilot_symbols") {
    cfg.pilot_symbols.clear();
    for (const auto& item : split_list(value)) {
      cfg.pilot_symbols.push_back(static_cast<int>(parse_int(key, item)));
    }
  } else if (key == "noma_alpha") {
    cfg.noma_alpha = parse_double(key, value);
  } else if (key == "sphere_max_nodes") {
    cfg.sphere_max_nodes = parse_u64(key, value);
  } else if (key == "workers") {
    cfg.workers = static_cast<int>(parse_int(key, value));
  } else if (key == "dump_channel") {
    cfg.dump_channel = parse_bool(key, value);
  } else if (key == "ues_list") {
    cfg.ues_list.clear();
    for (const auto& item : split_list(value)) {
      cfg.ues_list.push_back(static_cast<int>(parse_int(key, item)));
    }
  } else if (key == "speed_kmh_list") {
    cfg.speed_kmh_list.clear();
    for (const auto& item : split_list(value)) {
      cfg.speed_kmh_list.push_back(parse_double(key, item));
    }
  } else if (key == "detector_list") {
    cfg.detector_list.clear();
    for (const auto& item : split_list(value)) {
      cfg.detector_list.push_back(detector_from_string(item));
    }
  } else if (key == "mcs_modulations") {
    cfg.mcs_modulations.clear();
    for (const auto& item : split_list(value)) {
      cfg.mcs_modulations.push_back(static_cast<int>(parse_int(key, item)));
    }
  } else if (key == "mcs_rates") {
    cfg.mcs_rates.clear();
    for (const auto& item : split_list(value)) {
      cfg.mcs_rates.push_back(rate_from_string(item));
    }
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

/// Reads a flat key=value file ('#' starts a comment) into cfg.
inline void load_config_file(SimConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    }
    apply_config_kv(cfg, detail::trim(t.substr(0, eq)),
                    detail::trim(t.substr(eq + 1)));
  }
}

/// Serializes every field in a fixed order, suitable for run manifests and
/// for reloading with load_config_file.
inline std::string serialize_config(const SimConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "carrier_hz = " << cfg.carrier_hz << "\n";
  out << "scs_hz = " << cfg.scs_hz << "\n";
  out << "n_subcarriers = " << cfg.n_subcarriers << "\n";
  out << "n_symbols = " << cfg.n_symbols << "\n";
  out << "delay_spread_ns = " << cfg.delay_spread_ns << "\n";
  out << "n_users = " << cfg.n_users << "\n";
  out << "n_rx = " << cfg.n_rx << "\n";
  out << "speed_kmh = " << cfg.speed_kmh << "\n";
  out << "snr_db_list = ";
  for (std::size_t i = 0; i < cfg.snr_db_list.size(); ++i) {
    out << (i ? "," : "") << cfg.snr_db_list[i];
  }
  out << "\n";
  out << "detector = " << to_string(cfg.detector) << "\n";
  out << "modulation = " << cfg.mcs.modulation << "\n";
  out << "code_rate = " << to_string(cfg.mcs.code_rate) << "\n";
  out << "csi = " << to_string(cfg.csi) << "\n";
  out << "n_drops = " << cfg.n_drops << "\n";
  out << "master_seed = " << cfg.master_seed << "\n";
  out << "idd_iterations = " << cfg.idd_iterations << "\n";
  out << "llr_clip = " << cfg.llr_clip << "\n";
  out << "pilot_symbols = ";
  for (std::size_t i = 0; i < cfg.pilot_symbols.size(); ++i) {
    out << (i ? "," : "") << cfg.pilot_symbols[i];
  }
  out << "\n";
  out << "noma_alpha = " << cfg.noma_alpha << "\n";
  out << "sphere_max_nodes = " << cfg.sphere_max_nodes << "\n";
  out << "workers = " << cfg.workers << "\n";
  out << "dump_channel = " << (cfg.dump_channel ? "true" : "false") << "\n";
  if (!cfg.ues_list.empty()) {
    out << "ues_list = ";
    for (std::size_t i = 0; i < cfg.ues_list.size(); ++i) {
      out << (i ? "," : "") << cfg.ues_list[i];
    }
    out << "\n";
  }
  if (!cfg.speed_kmh_list.empty()) {
    out << "speed_kmh_list = ";
    for (std::size_t i = 0; i < cfg.speed_kmh_list.size(); ++i) {
      out << (i ? "," : "") << cfg.speed_kmh_list[i];
    }
    out << "\n";
  }
  if (!cfg.detector_list.empty()) {
    out << "detector_list = ";
    for (std::size_t i = 0; i < cfg.detector_list.size(); ++i) {
      out << (i ? "," : "") << to_string(cfg.detector_list[i]);
    }
    out << "\n";
  }
  out << "mcs_modulations = ";
  for (std::size_t i = 0; i < cfg.mcs_modulations.size(); ++i) {
    out << (i ? "," : "") << cfg.mcs_modulations[i];
  }
  out << "\n";
  out << "mcs_rates = ";
  for (std::size_t i = 0; i < cfg.mcs_rates.size(); ++i) {
    out << (i ? "," : "") << to_string(cfg.mcs_rates[i]);
  }
  out << "\n";
  return out.str();
}

}  // namespace overlink
