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

#include "sgbench/adapter.hpp"

#include <algorithm>

namespace sgbench {

namespace {

struct KindNames {
  ThreatKind kind;
  std::string_view id;
  std::string_view display;
};

constexpr std::array<KindNames, 17> kNames = {{
    {ThreatKind::AnomOnOff, "ANOM_ONOFF", "Anomalous ON/OFF"},
    {ThreatKind::AnomTraffic, "ANOM_TRAFFIC", "Anomalous Traffic"},
    {ThreatKind::AnomUpload, "ANOM_UPLOAD", "Anomalous Upload"},
    {ThreatKind::OpenPort, "OPEN_PORT", "Open Port"},
    {ThreatKind::WeakPassword, "WEAK_PASSWORD", "Weak Password"},
    {ThreatKind::Quarantine, "QUARANTINE", "Device Quarantine"},
    {ThreatKind::SynFlood, "SYN_FLOOD", "SYN Flooding"},
    {ThreatKind::UdpFlood, "UDP_FLOOD", "UDP Flooding"},
    {ThreatKind::DnsFlood, "DNS_FLOOD", "DNS Flooding"},
    {ThreatKind::HttpFlood, "HTTP_FLOOD", "HTTP Flooding"},
    {ThreatKind::IpfragFlood, "IPFRAG_FLOOD", "IP Fragmented Flooding"},
    {ThreatKind::PortScan, "PORT_SCAN", "Port Scanning"},
    {ThreatKind::OsScan, "OS_SCAN", "OS Scanning"},
    {ThreatKind::MaliciousDest, "MALICIOUS_DEST", "Malicious Destinations"},
    {ThreatKind::PiiExposure, "PII_EXPOSURE", "PII Exposure"},
    {ThreatKind::Unencrypted, "UNENCRYPTED", "Unencrypted Traffic"},
    {ThreatKind::Doh, "DOH", "DoH"},
}};

}  // namespace

std::string_view to_string(ThreatKind kind) { return kNames[static_cast<std::size_t>(kind)].id; }

std::string_view display_name(ThreatKind kind) { return kNames[static_cast<std::size_t>(kind)].display; }

ThreatKind parse_threat_kind(std::string_view text) {
  std::string t(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::toupper(c); });
  for (const auto& n : kNames) {
    if (n.id == t) return n.kind;
  }
  throw BenchError(ErrorCode::InvalidArgument, "unknown threat kind '" + std::string(text) + "'");
}

bool is_security_threat(ThreatKind kind) {
  switch (kind) {
    case ThreatKind::AnomOnOff:
    case ThreatKind::AnomTraffic:
    case ThreatKind::AnomUpload:
    case ThreatKind::PiiExposure:
    case ThreatKind::Unencrypted:
    case ThreatKind::Doh:
      return false;
    default:
      return true;
  }
}

std::optional<ThreatKind> Alert::reported_threat() const {
  switch (category) {
    case AlertKind::Threat: return threat;
    case AlertKind::OpenPortFinding: return ThreatKind::OpenPort;
    case AlertKind::Generic: return std::nullopt;
  }
  return std::nullopt;
}

std::string Alert::kind_name() const {
  switch (category) {
    case AlertKind::Threat: return std::string(to_string(threat));
    case AlertKind::OpenPortFinding: return "OPEN_PORT_FINDING";
    case AlertKind::Generic: return "GENERIC";
  }
  return "GENERIC";
}

ForwardDecision ForwardDecision::rewrite(std::vector<PacketRecord> packets) {
  if (packets.empty()) throw BenchError(ErrorCode::InvalidArgument, "rewrite verdict needs packets");
  return {Verdict::Rewrite, std::move(packets)};
}

}  // namespace sgbench
