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

#include <ctime>
#include <fstream>
#include <stdexcept>
#include <string>

#include "overlink/common.hpp"
#include "overlink/config.hpp"

namespace overlink {

/// Reproducibility record written before any result file.  The body is the
/// full serialized configuration (master seed included, verbatim); metadata
/// lines are '#' comments, so the manifest itself reloads through
/// load_config_file and replays the run.
struct RunManifest {
  std::string command;  // the invocation being recorded
  SimConfig cfg;
};

inline std::string manifest_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
#if defined(_WIN32)
  gmtime_s(&tm_utc, &now);
#else
  gmtime_r(&now, &tm_utc);
#endif
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

inline void write_run_manifest(const std::string& path, const RunManifest& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest '" + path + "'");
  out << "# run manifest\n";
  out << "# version = " << kVersion << "\n";
  if (!m.command.empty()) out << "# command = " << m.command << "\n";
  out << "# started = " << manifest_timestamp() << "\n";
  out << serialize_config(m.cfg);
  if (!out) throw std::runtime_error("failed writing manifest '" + path + "'");
}

/// Appends one '# key = value' metadata line (output paths, finish time).
inline void append_manifest_note(const std::string& path, const std::string& key,
                                 const std::string& value) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot append to manifest '" + path + "'");
  out << "# " << key << " = " << value << "\n";
}

}  // namespace overlink
