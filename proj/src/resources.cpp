// Copyright 2026 The safeguard-bench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sgbench/resources.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>

#include "sgbench/pcap.hpp"
#include "sgbench/profiles.hpp"

#ifndef SGBENCH_DATA_DIR
#define SGBENCH_DATA_DIR "data"
#endif

namespace sgbench {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

std::vector<std::string> load_lines(const std::filesystem::path& path, std::string_view what) {
  std::ifstream in(path);
  if (!in) throw BenchError(ErrorCode::ResourceMissing, std::string(what) + " not found: " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::string> load_wordlist(const std::filesystem::path& path) { return load_lines(path, "wordlist"); }

std::vector<std::string> load_blocklist(const std::filesystem::path& path) {
  auto v = load_lines(path, "blocklist");
  for (auto& s : v) s = lower(s);
  return v;
}

PiiProfile load_pii_profile(const std::filesystem::path& path) {
  PiiProfile p;
  for (const auto& line : load_lines(path, "PII profile")) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "name") p.name = value;
    else if (key == "email") p.email = value;
    else if (key == "password") p.password = value;
  }
  if (p.empty()) throw BenchError(ErrorCode::ResourceMissing, "PII profile has no tokens: " + path.string());
  return p;
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("SGBENCH_DATA_DIR"); env && *env) return env;
  return SGBENCH_DATA_DIR;
}

ThreatResources ThreatResources::bundled(const std::filesystem::path& data_dir) {
  ThreatResources r;
  r.wordlist = load_wordlist(data_dir / "weak_passwords.txt");
  r.blocklist = load_blocklist(data_dir / "blocklist.txt");
  r.pii = load_pii_profile(data_dir / "pii_profile.txt");
  return r;
}

const Trace& ThreatResources::template_trace(const std::string& spec, std::uint64_t seed) {
  if (auto it = templates.find(spec); it != templates.end()) return it->second;
  Trace t;
  if (spec.rfind("builtin:", 0) == 0) {
    auto rest = spec.substr(8);
    Duration duration = std::chrono::seconds(600);
    if (const auto colon = rest.find(':'); colon != std::string::npos) {
      duration = from_seconds(std::stod(rest.substr(colon + 1)));
      rest = rest.substr(0, colon);
    }
    try {
      t = make_template(builtin_profile(rest), duration, seed);
    } catch (const BenchError&) {
      throw BenchError(ErrorCode::ResourceMissing, "unknown builtin template '" + rest + "'");
    }
  } else {
    if (!std::filesystem::exists(spec)) throw BenchError(ErrorCode::ResourceMissing, "template not found: " + spec);
    t = read_trace(spec, CapturePoint::IotBridge);
  }
  return templates.emplace(spec, std::move(t)).first->second;
}

}  // namespace sgbench
