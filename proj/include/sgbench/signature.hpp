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

#include <set>
#include <string>
#include <vector>

#include "sgbench/packet.hpp"

namespace sgbench {

/// Snort-style rules over a capture file, written without reference to the
/// detector so a corpus can be validated on its own.
struct SignatureRules {
  Duration rate_window = std::chrono::seconds(10);
  int syn_rate = 200;
  int udp_rate = 100;
  int dns_rate = 200;
  int http_rate = 100;
  int frag_rate = 100;
  Duration sweep_window = std::chrono::seconds(60);
  int sweep_ports = 20;
  std::set<std::uint16_t> login_ports{21, 23};
  std::set<std::uint16_t> risky_services{21, 23, 2323, 4567, 5555, 7547};
  std::set<std::string> blocklist;

  static SignatureRules with_blocklist(const std::vector<std::string>& hosts);
};

struct RuleHit {
  std::string rule;
  Timestamp time{0};
  std::string detail;
};

/// Each rule reports at most once per (rule, source, destination).
std::vector<RuleHit> run_signature_rules(const Trace& trace, const SignatureRules& rules);

}  // namespace sgbench
