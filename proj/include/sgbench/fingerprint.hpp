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
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sgbench/net_types.hpp"

namespace sgbench {

/// What a safeguard has learned about a device from its LAN chatter.
struct ObservedFacts {
  MacAddress mac;
  std::optional<std::string> dhcp_hostname;
  std::optional<std::vector<std::uint8_t>> dhcp_options;
  std::optional<std::string> dhcp_vendor_class;
  std::set<std::string> mdns_services;
  std::optional<std::string> upnp_device_type;
};

enum class PatternKind : std::uint8_t { Oui, DhcpHostname, DhcpOptions, DhcpVendor, Mdns, Upnp };

std::string_view to_string(PatternKind kind);
PatternKind parse_pattern_kind(std::string_view text);

struct FingerprintEntry {
  PatternKind kind = PatternKind::Oui;
  /// OUI "aa:bb:cc"; hostname/vendor/upnp globs with * and ?; option list
  /// "1;3;6;15"; exact mDNS service name.
  std::string pattern;
  std::string label;
  double weight = 1.0;
};

/// Case-insensitive glob with `*` and `?`.
bool glob_match(std::string_view pattern, std::string_view text);

class FingerprintDb {
 public:
  /// Rejects non-positive weights and a second label for the same pattern.
  void add(FingerprintEntry entry);
  const std::vector<FingerprintEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  bool matches(const FingerprintEntry& e, const ObservedFacts& facts) const;
  /// Label with the largest summed weight over matching entries; ties go to
  /// the lexicographically smallest label. Nullopt when nothing matches.
  std::optional<std::string> classify(const ObservedFacts& facts) const;

  /// `kind,pattern,label,weight` lines; `#` comments.
  static FingerprintDb parse(std::string_view text);
  static FingerprintDb load(const std::filesystem::path& path);

 private:
  std::vector<FingerprintEntry> entries_;
};

}  // namespace sgbench
