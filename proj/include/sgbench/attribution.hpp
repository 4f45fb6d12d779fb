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

#include <map>
#include <string>
#include <vector>

#include "sgbench/packet.hpp"

namespace sgbench {

/// One NAT translation as it existed during [first_used, last_used].
struct NatBinding {
  FiveTuple lan;
  FiveTuple wan;
  Timestamp first_used{0};
  Timestamp last_used{0};
};

/// Ground-truth NAT history exported by the harness.
using NatLog = std::vector<NatBinding>;

struct AttributionResult {
  Trace safeguard_only;
  Trace device_via_gateway;
};

inline constexpr Duration kDefaultMatchWindow = std::chrono::seconds(2);

/// Splits the gateway capture into safeguard-originated traffic and device
/// traffic that crossed the safeguard. Each bridge packet is mapped through
/// the NAT log and claims at most one gateway packet with the same flow,
/// payload length and a timestamp within `match_window`.
AttributionResult attribute_safeguard_traffic(const Trace& gateway, const Trace& bridge, const NatLog& nat,
                                              Duration match_window = kDefaultMatchWindow,
                                              const AddressPlan& plan = {});

enum class Party : std::uint8_t { First, Support, Third, Unclassified };

std::string_view to_string(Party party);
Party parse_party(std::string_view text);

struct DestinationRecord {
  std::string key;
  std::uint64_t bytes_total = 0;
  Timestamp first_seen{0};
  Timestamp last_seen{0};
  Party party = Party::Unclassified;
};

/// One record per contacted destination (hostname when resolvable, else IP),
/// counting outbound bytes only. DNS lookups themselves are not destinations.
std::vector<DestinationRecord> summarize_destinations(const Trace& safeguard_only,
                                                      const std::map<Ipv4Address, std::string>& dns,
                                                      const AddressPlan& plan = {});

/// key,party,bytes_total,first_seen,last_seen
std::string destinations_csv(const std::vector<DestinationRecord>& records);

}  // namespace sgbench
