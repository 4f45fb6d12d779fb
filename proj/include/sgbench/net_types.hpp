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
#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sgbench {

/// Virtual time since the harness epoch. Microsecond resolution matches pcap.
using Timestamp = std::chrono::microseconds;
using Duration = std::chrono::microseconds;

constexpr Timestamp from_seconds(double s) {
  return Timestamp{static_cast<std::int64_t>(s * 1e6 + (s >= 0 ? 0.5 : -0.5))};
}
constexpr double to_seconds(Duration d) { return static_cast<double>(d.count()) / 1e6; }

enum class ErrorCode {
  MalformedFile,
  UnsupportedLinktype,
  IoError,
  ClockSkew,
  DuplicateMac,
  UnknownDevice,
  DeviceConnected,
  DeviceDisconnected,
  PoolExhausted,
  TimeInPast,
  MissingParam,
  TargetDisconnected,
  EmptyTemplate,
  NoTargets,
  ResourceMissing,
  NotLearned,
  InsufficientData,
  NegativeTs,
  InvalidArgument,
  ManifestError,
  AdapterFault,
};

std::string_view to_string(ErrorCode code);

/// Every recoverable failure in the library carries one of the codes above.
class BenchError : public std::runtime_error {
 public:
  BenchError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct MacAddress {
  std::array<std::uint8_t, 6> bytes{};

  static MacAddress parse(std::string_view text);
  static constexpr MacAddress broadcast() { return MacAddress{{0xff, 0xff, 0xff, 0xff, 0xff, 0xff}}; }
  std::string to_string() const;
  /// "aa:bb:cc"
  std::string oui() const;
  bool is_multicast() const { return (bytes[0] & 0x01) != 0; }

  auto operator<=>(const MacAddress&) const = default;
};

struct Ipv4Address {
  std::uint32_t value = 0;

  constexpr Ipv4Address() = default;
  constexpr explicit Ipv4Address(std::uint32_t v) : value(v) {}
  constexpr Ipv4Address(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d)
      : value((std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) | (std::uint32_t{c} << 8) | d) {}

  static Ipv4Address parse(std::string_view text);
  std::string to_string() const;
  constexpr bool in_subnet(Ipv4Address net, int prefix) const {
    const std::uint32_t mask = prefix == 0 ? 0 : ~std::uint32_t{0} << (32 - prefix);
    return (value & mask) == (net.value & mask);
  }
  constexpr bool is_multicast() const { return (value >> 28) == 0xe; }
  constexpr bool is_broadcast() const { return value == 0xffffffffu; }

  auto operator<=>(const Ipv4Address&) const = default;
};

namespace ip_proto {
inline constexpr std::uint8_t kIcmp = 1;
inline constexpr std::uint8_t kTcp = 6;
inline constexpr std::uint8_t kUdp = 17;
}  // namespace ip_proto

namespace tcp_flag {
inline constexpr std::uint8_t kFin = 0x01;
inline constexpr std::uint8_t kSyn = 0x02;
inline constexpr std::uint8_t kRst = 0x04;
inline constexpr std::uint8_t kPsh = 0x08;
inline constexpr std::uint8_t kAck = 0x10;
inline constexpr std::uint8_t kUrg = 0x20;
inline constexpr std::uint8_t kEce = 0x40;
inline constexpr std::uint8_t kCwr = 0x80;
}  // namespace tcp_flag

inline constexpr std::uint16_t kEtherTypeIpv4 = 0x0800;

/// Fixed addressing of the simulated testbed. Devices live on the IoT-LAN behind
/// the safeguard's NAT; the safeguard's WAN side sits on the gateway LAN.
struct AddressPlan {
  Ipv4Address iot_lan_net{10, 0, 0, 0};
  int iot_lan_prefix = 24;
  Ipv4Address safeguard_lan_ip{10, 0, 0, 1};
  Ipv4Address pool_first{10, 0, 0, 100};
  Ipv4Address pool_last{10, 0, 0, 250};
  Ipv4Address lan_net{192, 168, 1, 0};
  int lan_prefix = 24;
  Ipv4Address gateway_lan_ip{192, 168, 1, 1};
  Ipv4Address safeguard_wan_ip{192, 168, 1, 2};
  MacAddress safeguard_lan_mac{{0x02, 0x53, 0x47, 0x00, 0x00, 0x01}};
  MacAddress safeguard_wan_mac{{0x02, 0x53, 0x47, 0x00, 0x00, 0x02}};
  MacAddress gateway_mac{{0x02, 0x47, 0x57, 0x00, 0x00, 0x01}};

  bool on_iot_lan(Ipv4Address a) const { return a.in_subnet(iot_lan_net, iot_lan_prefix); }
  bool on_lan(Ipv4Address a) const { return a.in_subnet(lan_net, lan_prefix); }
};

}  // namespace sgbench
