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

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sgbench/packet.hpp"

namespace sgbench {

/// The 17 detectable threats, in the order of the threat table.
enum class ThreatKind : std::uint8_t {
  AnomOnOff,
  AnomTraffic,
  AnomUpload,
  OpenPort,
  WeakPassword,
  Quarantine,
  SynFlood,
  UdpFlood,
  DnsFlood,
  HttpFlood,
  IpfragFlood,
  PortScan,
  OsScan,
  MaliciousDest,
  PiiExposure,
  Unencrypted,
  Doh,
};

inline constexpr std::array<ThreatKind, 17> kAllThreatKinds = {
    ThreatKind::AnomOnOff,   ThreatKind::AnomTraffic, ThreatKind::AnomUpload,    ThreatKind::OpenPort,
    ThreatKind::WeakPassword, ThreatKind::Quarantine, ThreatKind::SynFlood,      ThreatKind::UdpFlood,
    ThreatKind::DnsFlood,    ThreatKind::HttpFlood,   ThreatKind::IpfragFlood,   ThreatKind::PortScan,
    ThreatKind::OsScan,      ThreatKind::MaliciousDest, ThreatKind::PiiExposure, ThreatKind::Unencrypted,
    ThreatKind::Doh,
};

std::string_view to_string(ThreatKind kind);
ThreatKind parse_threat_kind(std::string_view text);
/// Human-readable row label ("SYN Flooding").
std::string_view display_name(ThreatKind kind);
/// Open port, weak password, quarantine, floods, scans, malicious destinations.
bool is_security_threat(ThreatKind kind);

/// Alert kinds are the threat kinds plus the open-port finding and a generic
/// catch-all that only ever appears as a false positive.
enum class AlertKind : std::uint8_t {
  Threat,
  OpenPortFinding,
  Generic,
};

struct Alert {
  Timestamp time{0};
  AlertKind category = AlertKind::Threat;
  /// Meaningful when category == Threat.
  ThreatKind threat = ThreatKind::SynFlood;
  std::vector<std::string> device_ids;
  std::string detail;

  /// The threat this alert reports, with open-port findings mapped to OPEN_PORT.
  std::optional<ThreatKind> reported_threat() const;
  std::string kind_name() const;
  bool operator==(const Alert&) const = default;
};

enum class Direction : std::uint8_t {
  LanToWan,
  WanToLan,
  /// IoT-LAN traffic that terminates at the safeguard or another LAN host
  /// (DHCP, mDNS, SSDP, replies to the safeguard's own probes).
  LanLocal,
};

/// Inline verdict for one packet. Rewrite replaces the packet with `packets`.
struct ForwardDecision {
  enum class Verdict : std::uint8_t { Forward, Drop, Rewrite };
  Verdict verdict = Verdict::Forward;
  std::vector<PacketRecord> packets;

  static ForwardDecision forward() { return {}; }
  static ForwardDecision drop() { return {Verdict::Drop, {}}; }
  static ForwardDecision rewrite(std::vector<PacketRecord> packets);
};

struct AdapterDevice {
  std::string id;
  MacAddress mac;
};

/// Packets a safeguard originates itself. WAN packets leave through the
/// gateway; LAN packets go onto the IoT-LAN (active probes).
struct Emission {
  bool to_wan = true;
  PacketRecord packet;
};

inline constexpr std::string_view kUnknownLabel = "UNKNOWN";

/// Contract every safeguard-under-test implements. One harness drives an
/// adapter sequentially; calls are never concurrent.
class SafeguardAdapter {
 public:
  virtual ~SafeguardAdapter() = default;

  virtual std::string name() const = 0;
  /// Threat kinds the product claims to handle; unclaimed kinds report NotClaimed.
  virtual std::set<ThreatKind> claims() const = 0;
  /// Called once by the harness before any traffic.
  virtual void attach(const std::vector<AdapterDevice>& devices, const AddressPlan& plan) = 0;

  virtual ForwardDecision process(const PacketRecord& packet, Direction direction) = 0;
  /// Alerts with time >= since, in emission order.
  virtual std::vector<Alert> poll_alerts(Timestamp since) const = 0;
  /// Device id -> label, or kUnknownLabel.
  virtual std::map<std::string, std::string> identify_devices() const = 0;

  /// Called at every harness tick; returns packets the safeguard sends itself.
  virtual std::vector<Emission> on_tick(Timestamp now) = 0;
  /// Clears sliding-window state between experiment iterations. Learned
  /// baselines survive.
  virtual void begin_iteration() {}
  /// Factory reset: forget everything learned and all alerts.
  virtual void reset() = 0;
  virtual void set_quarantine(const std::string& device_id, bool on) = 0;
};

}  // namespace sgbench
