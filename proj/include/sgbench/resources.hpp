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

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sgbench/packet.hpp"

namespace sgbench {

/// Account identity whose tokens must never cross the network in the clear.
struct PiiProfile {
  std::string name;
  std::string email;
  std::string password;

  bool empty() const { return name.empty() && email.empty() && password.empty(); }
};

/// Non-empty, non-comment lines with surrounding whitespace removed.
/// Throws RESOURCE_MISSING when the file cannot be opened.
std::vector<std::string> load_lines(const std::filesystem::path& path, std::string_view what);
std::vector<std::string> load_wordlist(const std::filesystem::path& path);
/// Hostnames or dotted-quad addresses, lowercased.
std::vector<std::string> load_blocklist(const std::filesystem::path& path);
/// `key = value` lines with keys name, email, password.
PiiProfile load_pii_profile(const std::filesystem::path& path);

/// Directory holding the bundled data files. SGBENCH_DATA_DIR overrides the
/// location baked in at build time.
std::filesystem::path default_data_dir();

/// Everything the application-layer and replay generators read from disk.
struct ThreatResources {
  std::vector<std::string> wordlist;
  std::vector<std::string> blocklist;
  PiiProfile pii;
  /// Template spec ("builtin:google-home" or a pcap path) -> trace.
  std::map<std::string, Trace> templates;

  /// Bundled wordlist, blocklist and PII profile from `data_dir`.
  static ThreatResources bundled(const std::filesystem::path& data_dir = default_data_dir());
  /// Resolves and caches a template spec. Builtin specs take an optional
  /// duration suffix in seconds ("builtin:camera-upload:120").
  const Trace& template_trace(const std::string& spec, std::uint64_t seed = 7);
};

}  // namespace sgbench
