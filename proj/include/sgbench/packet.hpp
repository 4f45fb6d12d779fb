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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgbench/net_types.hpp"

namespace sgbench {

enum class CapturePoint : std::uint8_t { Gateway, IotBridge };

std::string_view to_string(CapturePoint point);

struct TcpInfo {
  std::uint32_t seq = 0;
  std::uint32_t ack = 0;
  std::uint8_t flags = 0;
  std::uint16_t window = 65535;
  /// Raw option bytes; length must be a multiple of 4 (at most 40).
  std::vector<std::uint8_t> options;

  bool has(std::uint8_t flag) const { return (flags & flag) == flag; }
  bool operator==(const TcpInfo&) const = default;
};

struct IcmpInfo {
  std::uint8_t type = 0;
  std::uint8_t code = 0;
  /// Rest-of-header word (identifier/sequence for echo, unused for errors).
  std::uint32_t rest = 0;

  bool operator==(const IcmpInfo&) const = default;
};

namespace icmp_type {
inline constexpr std::uint8_t kEchoReply = 0;
inline constexpr std::uint8_t kUnreachable = 3;
inline constexpr std::uint8_t kEchoRequest = 8;
inline constexpr std::uint8_t kPortUnreachableCode = 3;
}  // namespace icmp_type

/// One Ethernet/IPv4 frame as seen at a capture point. For non-IPv4 ethertypes
/// only the L2 fields and payload are meaningful.
struct PacketRecord {
  Timestamp timestamp{0};
  CapturePoint capture_point = CapturePoint::IotBridge;
  MacAddress src_mac;
  MacAddress dst_mac;
  std::uint16_t ethertype = kEtherTypeIpv4;

  Ipv4Address src_ip;
  Ipv4Address dst_ip;
  std::uint8_t ip_protocol = 0;
  std::uint16_t ip_id = 0;
  std::uint8_t ttl = 64;
  bool dont_fragment = false;
  bool more_fragments = false;
  /// In 8-byte units.
  std::uint16_t frag_offset = 0;

  std::optional<std::uint16_t> src_port;
  std::optional<std::uint16_t> dst_port;
  std::optional<TcpInfo> tcp;
  std::optional<IcmpInfo> icmp;

  std::vector<std::uint8_t> payload;
  std::uint32_t wire_len = 0;

  bool is_ipv4() const { return ethertype == kEtherTypeIpv4; }
  bool is_tcp() const { return ip_protocol == ip_proto::kTcp && tcp.has_value(); }
  bool is_udp() const { return ip_protocol == ip_proto::kUdp && src_port.has_value(); }
  bool is_icmp() const { return ip_protocol == ip_proto::kIcmp && icmp.has_value(); }
  bool is_fragment() const { return more_fragments || frag_offset != 0; }
  /// Length of the L2..L4 headers this record serializes to.
  std::uint32_t header_length() const;
  std::string_view payload_view() const {
    return {reinterpret_cast<const char*>(payload.data()), payload.size()};
  }

  bool operator==(const PacketRecord&) const = default;
};

/// Transport-level flow identity. Ports are zero for protocols without them;
/// ICMP echo uses the identifier in both port slots.
struct FiveTuple {
  std::uint8_t protocol = 0;
  Ipv4Address src_ip;
  std::uint16_t src_port = 0;
  Ipv4Address dst_ip;
  std::uint16_t dst_port = 0;

  FiveTuple reversed() const { return {protocol, dst_ip, dst_port, src_ip, src_port}; }
  std::string to_string() const;
  auto operator<=>(const FiveTuple&) const = default;
};

FiveTuple flow_of(const PacketRecord& p);

struct FiveTupleHash {
  std::size_t operator()(const FiveTuple& t) const noexcept;
};

/// Who produced a packet, as known to the harness. Never serialized.
struct GroundTruth {
  enum class Origin : std::uint8_t { Device, Safeguard, Internet, Harness };
  Origin origin = Origin::Harness;
  /// Device id when origin is Device; empty otherwise.
  std::string device_id;
  /// Scenario tag (0 = benign/background).
  std::uint32_t scenario_tag = 0;

  bool operator==(const GroundTruth&) const = default;
};

struct TraceMetadata {
  CapturePoint capture_point = CapturePoint::IotBridge;
  Timestamp start{0};
  Timestamp end{0};
  std::string link_id;
};

struct Trace {
  std::vector<PacketRecord> packets;
  TraceMetadata metadata;
  /// Parallel to packets when produced by the harness; empty when read from disk.
  std::vector<GroundTruth> truth;

  std::size_t size() const { return packets.size(); }
  bool empty() const { return packets.empty(); }
  std::uint64_t total_bytes() const;
  bool is_ordered() const;
};

// Packet construction helpers. All set wire_len to max(60, header + payload).

struct Endpoint {
  MacAddress mac;
  Ipv4Address ip;
  std::uint16_t port = 0;
};

PacketRecord make_tcp(Timestamp t, const Endpoint& src, const Endpoint& dst, std::uint8_t flags,
                      std::uint32_t seq, std::uint32_t ack, std::span<const std::uint8_t> payload = {});
PacketRecord make_udp(Timestamp t, const Endpoint& src, const Endpoint& dst,
                      std::span<const std::uint8_t> payload = {});
PacketRecord make_icmp(Timestamp t, const Endpoint& src, const Endpoint& dst, std::uint8_t type,
                       std::uint8_t code, std::uint32_t rest, std::span<const std::uint8_t> payload = {});
/// Recomputes wire_len from the current headers and payload.
void finalize_length(PacketRecord& p);

std::vector<std::uint8_t> to_bytes(std::string_view text);

/// Shannon entropy of the byte distribution, in bits per byte.
double byte_entropy(std::span<const std::uint8_t> data);

}  // namespace sgbench
