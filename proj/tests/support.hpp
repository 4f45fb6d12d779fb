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

// Small builders shared by the test binaries.

#include <random>
#include <string>
#include <vector>

#include "sgbench/harness.hpp"
#include "sgbench/packet.hpp"
#include "sgbench/pcap.hpp"

namespace sgbench::test {

inline Endpoint ep(Ipv4Address ip, std::uint16_t port, std::uint8_t mac_tail = 0x10) {
  return Endpoint{MacAddress{{0x02, 0x00, 0x00, 0x00, 0x00, mac_tail}}, ip, port};
}

inline Trace trace_of(std::vector<PacketRecord> packets, CapturePoint point = CapturePoint::Gateway) {
  Trace t;
  for (auto& p : packets) p.capture_point = point;
  t.packets = std::move(packets);
  t.metadata.capture_point = point;
  if (!t.packets.empty()) {
    t.metadata.start = t.packets.front().timestamp;
    t.metadata.end = t.packets.back().timestamp;
  }
  return t;
}

inline DeviceDescriptor device(const std::string& id, std::uint8_t mac_tail, const std::string& profile = "plug",
                               DeviceCategory category = DeviceCategory::HomeAutomation) {
  DeviceDescriptor d;
  d.id = id;
  d.mac = MacAddress{{0x02, 0x11, 0x22, 0x33, 0x44, mac_tail}};
  d.category = category;
  d.true_label = "Label " + id;
  d.profile = profile;
  return d;
}

inline std::vector<std::uint8_t> random_payload(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng());
  return out;
}

/// Number of packets at a capture point satisfying `pred`.
template <typename Pred>
std::size_t count_if(const Trace& t, Pred pred) {
  std::size_t n = 0;
  for (const auto& p : t.packets) n += pred(p) ? 1 : 0;
  return n;
}

inline std::vector<std::uint8_t> from_hex(std::string_view hex) {
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(std::stoi(std::string(hex.substr(i, 2)), nullptr, 16)));
  }
  return out;
}

}  // namespace sgbench::test
