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

#include "sgbench/packet.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace sgbench {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedFile: return "MALFORMED_FILE";
    case ErrorCode::UnsupportedLinktype: return "UNSUPPORTED_LINKTYPE";
    case ErrorCode::IoError: return "IO_ERROR";
    case ErrorCode::ClockSkew: return "CLOCK_SKEW";
    case ErrorCode::DuplicateMac: return "DUPLICATE_MAC";
    case ErrorCode::UnknownDevice: return "UNKNOWN_DEVICE";
    case ErrorCode::DeviceConnected: return "DEVICE_CONNECTED";
    case ErrorCode::DeviceDisconnected: return "DEVICE_DISCONNECTED";
    case ErrorCode::PoolExhausted: return "POOL_EXHAUSTED";
    case ErrorCode::TimeInPast: return "TIME_IN_PAST";
    case ErrorCode::MissingParam: return "MISSING_PARAM";
    case ErrorCode::TargetDisconnected: return "TARGET_DISCONNECTED";
    case ErrorCode::EmptyTemplate: return "EMPTY_TEMPLATE";
    case ErrorCode::NoTargets: return "NO_TARGETS";
    case ErrorCode::ResourceMissing: return "RESOURCE_MISSING";
    case ErrorCode::NotLearned: return "NOT_LEARNED";
    case ErrorCode::InsufficientData: return "INSUFFICIENT_DATA";
    case ErrorCode::NegativeTs: return "NEGATIVE_TS";
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::ManifestError: return "MANIFEST_ERROR";
    case ErrorCode::AdapterFault: return "ADAPTER_FAULT";
  }
  return "UNKNOWN";
}

MacAddress MacAddress::parse(std::string_view text) {
  MacAddress mac;
  unsigned v[6];
  std::string s(text);
  if (std::sscanf(s.c_str(), "%x:%x:%x:%x:%x:%x", &v[0], &v[1], &v[2], &v[3], &v[4], &v[5]) != 6) {
    throw BenchError(ErrorCode::InvalidArgument, "bad MAC address '" + s + "'");
  }
  for (int i = 0; i < 6; ++i) {
    if (v[i] > 0xff) throw BenchError(ErrorCode::InvalidArgument, "bad MAC address '" + s + "'");
    mac.bytes[i] = static_cast<std::uint8_t>(v[i]);
  }
  return mac;
}

std::string MacAddress::to_string() const {
  char buf[18];
  std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", bytes[0], bytes[1], bytes[2],
                bytes[3], bytes[4], bytes[5]);
  return buf;
}

std::string MacAddress::oui() const { return to_string().substr(0, 8); }

Ipv4Address Ipv4Address::parse(std::string_view text) {
  unsigned a, b, c, d;
  char tail;
  std::string s(text);
  if (std::sscanf(s.c_str(), "%u.%u.%u.%u%c", &a, &b, &c, &d, &tail) != 4 || a > 255 || b > 255 ||
      c > 255 || d > 255) {
    throw BenchError(ErrorCode::InvalidArgument, "bad IPv4 address '" + s + "'");
  }
  return Ipv4Address(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b),
                     static_cast<std::uint8_t>(c), static_cast<std::uint8_t>(d));
}

std::string Ipv4Address::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", value >> 24, (value >> 16) & 0xff, (value >> 8) & 0xff,
                value & 0xff);
  return buf;
}

std::string_view to_string(CapturePoint point) {
  return point == CapturePoint::Gateway ? "GATEWAY" : "IOT_BRIDGE";
}

std::uint32_t PacketRecord::header_length() const {
  std::uint32_t len = 14;
  if (!is_ipv4()) return len;
  len += 20;
  if (frag_offset != 0) return len;
  if (ip_protocol == ip_proto::kTcp && tcp) {
    len += 20 + static_cast<std::uint32_t>(tcp->options.size());
  } else if (ip_protocol == ip_proto::kUdp && src_port) {
    len += 8;
  } else if (ip_protocol == ip_proto::kIcmp && icmp) {
    len += 8;
  }
  return len;
}

std::string FiveTuple::to_string() const {
  return std::to_string(protocol) + " " + src_ip.to_string() + ":" + std::to_string(src_port) + " > " +
         dst_ip.to_string() + ":" + std::to_string(dst_port);
}

FiveTuple flow_of(const PacketRecord& p) {
  FiveTuple t{p.ip_protocol, p.src_ip, p.src_port.value_or(0), p.dst_ip, p.dst_port.value_or(0)};
  if (p.icmp && (p.icmp->type == icmp_type::kEchoRequest || p.icmp->type == icmp_type::kEchoReply)) {
    const auto id = static_cast<std::uint16_t>(p.icmp->rest >> 16);
    t.src_port = id;
    t.dst_port = id;
  }
  return t;
}

std::size_t FiveTupleHash::operator()(const FiveTuple& t) const noexcept {
  std::uint64_t h = t.protocol;
  h = h * 0x9e3779b97f4a7c15ULL ^ t.src_ip.value;
  h = h * 0x9e3779b97f4a7c15ULL ^ t.dst_ip.value;
  h = h * 0x9e3779b97f4a7c15ULL ^ ((std::uint64_t{t.src_port} << 16) | t.dst_port);
  return static_cast<std::size_t>(h ^ (h >> 29));
}

std::uint64_t Trace::total_bytes() const {
  std::uint64_t sum = 0;
  for (const auto& p : packets) sum += p.wire_len;
  return sum;
}

bool Trace::is_ordered() const {
  return std::is_sorted(packets.begin(), packets.end(),
                        [](const PacketRecord& a, const PacketRecord& b) { return a.timestamp < b.timestamp; });
}

void finalize_length(PacketRecord& p) {
  p.wire_len = std::max<std::uint32_t>(60, p.header_length() + static_cast<std::uint32_t>(p.payload.size()));
}

namespace {

PacketRecord base_packet(Timestamp t, const Endpoint& src, const Endpoint& dst, std::uint8_t proto) {
  PacketRecord p;
  p.timestamp = t;
  p.src_mac = src.mac;
  p.dst_mac = dst.mac;
  p.src_ip = src.ip;
  p.dst_ip = dst.ip;
  p.ip_protocol = proto;
  return p;
}

}  // namespace

PacketRecord make_tcp(Timestamp t, const Endpoint& src, const Endpoint& dst, std::uint8_t flags,
                      std::uint32_t seq, std::uint32_t ack, std::span<const std::uint8_t> payload) {
  auto p = base_packet(t, src, dst, ip_proto::kTcp);
  p.src_port = src.port;
  p.dst_port = dst.port;
  p.tcp = TcpInfo{seq, ack, flags, 65535, {}};
  p.dont_fragment = true;
  p.payload.assign(payload.begin(), payload.end());
  finalize_length(p);
  return p;
}

PacketRecord make_udp(Timestamp t, const Endpoint& src, const Endpoint& dst,
                      std::span<const std::uint8_t> payload) {
  auto p = base_packet(t, src, dst, ip_proto::kUdp);
  p.src_port = src.port;
  p.dst_port = dst.port;
  p.payload.assign(payload.begin(), payload.end());
  finalize_length(p);
  return p;
}

PacketRecord make_icmp(Timestamp t, const Endpoint& src, const Endpoint& dst, std::uint8_t type,
                       std::uint8_t code, std::uint32_t rest, std::span<const std::uint8_t> payload) {
  auto p = base_packet(t, src, dst, ip_proto::kIcmp);
  p.icmp = IcmpInfo{type, code, rest};
  p.payload.assign(payload.begin(), payload.end());
  finalize_length(p);
  return p;
}

std::vector<std::uint8_t> to_bytes(std::string_view text) { return {text.begin(), text.end()}; }

double byte_entropy(std::span<const std::uint8_t> data) {
  if (data.empty()) return 0.0;
  std::array<std::size_t, 256> counts{};
  for (auto b : data) ++counts[b];
  double h = 0.0;
  const double n = static_cast<double>(data.size());
  for (auto c : counts) {
    if (c == 0) continue;
    const double q = static_cast<double>(c) / n;
    h -= q * std::log2(q);
  }
  return h;
}

}  // namespace sgbench
