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
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sgbench/adapter.hpp"
#include "sgbench/harness.hpp"
#include "sgbench/resources.hpp"

namespace sgbench {

enum class ThreatOrigin : std::uint8_t { IotDevice, Internet };

std::string_view to_string(ThreatOrigin origin);
ThreatOrigin parse_threat_origin(std::string_view text);

/// One row of the threat table turned into something runnable. `params` holds
/// kind-specific settings as text; missing ones fall back to the defaults of
/// `default_params(kind)`.
struct ThreatScenario {
  std::string name;
  ThreatKind kind = ThreatKind::SynFlood;
  ThreatOrigin origin = ThreatOrigin::IotDevice;
  std::vector<std::string> targets;
  std::map<std::string, std::string> params;
  std::uint64_t seed = 1;
  /// Ground-truth label stamped on every generated packet (never on the wire).
  std::uint32_t tag = 1;

  bool has(const std::string& key) const;
  std::string text(const std::string& key) const;
  double number(const std::string& key) const;
  std::set<std::uint16_t> ports(const std::string& key) const;
  Duration duration() const { return from_seconds(number("duration")); }

  /// Throws MISSING_PARAM / INVALID_ARGUMENT when the scenario cannot run.
  void validate() const;
};

/// Defaults: floods 1000 pps for 60 s, 1000-port scans, 30 s power cycling
/// for an hour, 200 FTP sessions, and so on.
const std::map<std::string, std::string>& default_params(ThreatKind kind);
/// Floods and scans; every other kind is launched from the IoT bridge.
bool allows_internet_origin(ThreatKind kind);

enum class FloodClass : std::uint8_t { Syn, Udp, Dns, Http, Ipfrag };
enum class ScanClass : std::uint8_t { Port, Os };

/// Everything needed to run a scenario on a harness.
struct ThreatPlan {
  ThreatScenario scenario;
  Timestamp start{0};
  /// Time of the last generated packet or event.
  Timestamp end{0};
  std::vector<TimedPacket> lan_side;
  std::vector<TimedPacket> gateway_side;
  std::vector<DeviceEvent> events;
  std::map<std::string, std::set<std::uint16_t>> open_ports;
  /// Gateway-side attacks reach the target through the safeguard's DMZ rule.
  std::optional<std::string> port_forward;
  /// Tag of benign traffic injected after a flood (quarantine check only).
  std::uint32_t benign_tag = 0;

  std::size_t packet_count() const { return lan_side.size() + gateway_side.size(); }
};

/// Tag used for follow-up benign traffic of a scenario tagged `tag`.
constexpr std::uint32_t benign_tag_of(std::uint32_t tag) { return tag | 0x80000000u; }
constexpr bool is_benign_followup(std::uint32_t tag) { return (tag & 0x80000000u) != 0; }

std::vector<TimedPacket> gen_flood(FloodClass cls, const ThreatScenario& s, const Harness& h, Timestamp start);
std::vector<TimedPacket> gen_scan(ScanClass cls, const ThreatScenario& s, const Harness& h, Timestamp start);
std::vector<DeviceEvent> gen_power_cycle(const ThreatScenario& s, const Harness& h, Timestamp start);
std::vector<TimedPacket> gen_trace_swap(const Trace& tmpl, const DeviceDescriptor& as_device, const ThreatScenario& s,
                                        Timestamp start);
std::vector<TimedPacket> gen_upload_burst(const Trace& camera_template, const ThreatScenario& s, const Harness& h,
                                          Timestamp start);
std::vector<TimedPacket> gen_app_layer(ThreatKind kind, const ThreatScenario& s, const Harness& h,
                                       const ThreatResources& res, Timestamp start);
void configure_open_ports(Harness& h, const std::string& device_id, std::set<std::uint16_t> ports);

/// Builds the full plan for any kind.
ThreatPlan plan_threat(const ThreatScenario& s, const Harness& h, ThreatResources& res, Timestamp start);
/// Applies responder configuration, schedules events and injects packets.
void apply_plan(Harness& h, const ThreatPlan& plan);

/// Flood and scan probe-diversity packets: NULL, FIN|PSH|URG, SYN|FIN,
/// SYN|ECE|CWR and ICMP echo with a non-zero code.
bool is_probe_diversity(const PacketRecord& p);

}  // namespace sgbench
