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
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "sgbench/packet.hpp"

namespace sgbench {

/// Deterministic name -> address mapping and per-host service behavior of the
/// simulated Internet. Addresses come from the 198.18.0.0/15 benchmarking block
/// and depend only on the hostname.
class InternetModel {
 public:
  struct HostBehavior {
    std::set<std::uint16_t> tcp_open;
    std::set<std::uint16_t> udp_silent;  // open UDP ports that never answer (QUIC-like)
    bool dns_server = false;
    bool doh_server = false;
    bool ntp_server = true;
  };

  static constexpr Ipv4Address kResolver{198, 51, 100, 53};
  static constexpr Ipv4Address kDohResolver{198, 51, 100, 54};
  static constexpr Ipv4Address kVictimA{203, 0, 113, 10};
  static constexpr Ipv4Address kVictimB{203, 0, 113, 11};
  static constexpr Ipv4Address kAttacker{203, 0, 113, 66};
  static constexpr std::string_view kResolverName = "resolver.sim.example";
  static constexpr std::string_view kDohResolverName = "doh.resolver.example";
  static constexpr std::string_view kVictimAName = "victim-a.example";
  static constexpr std::string_view kVictimBName = "victim-b.example";

  static Ipv4Address address_of(std::string_view hostname);
  static HostBehavior behavior_of(Ipv4Address address);
  static bool is_victim(Ipv4Address address) { return address == kVictimA || address == kVictimB; }
};

/// Server-side initial sequence number; shared by responders and generators
/// so scripted client ACKs line up with simulated servers.
std::uint32_t server_isn(const FiveTuple& client_flow);

/// DoH framing: opaque, ciphertext-like wrapping of a DNS message over TCP/443.
std::vector<std::uint8_t> doh_wrap(std::span<const std::uint8_t> dns_message, std::uint64_t nonce);
std::optional<std::vector<std::uint8_t>> doh_unwrap(std::span<const std::uint8_t> payload);

/// Fills `out` with uniformly random bytes.
void random_bytes(std::mt19937_64& rng, std::vector<std::uint8_t>& out, std::size_t n);
/// Uniform integer in [lo, hi] independent of the standard library's distributions.
std::uint64_t uniform_int(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi);
double uniform_real(std::mt19937_64& rng);
std::uint64_t stable_hash(std::string_view text);

enum class DeviceCategory : std::uint8_t { Camera, HomeAutomation, Hub, Speaker, Video };

std::string_view to_string(DeviceCategory c);
DeviceCategory parse_category(std::string_view text);

/// One kind of conversation a device has with the cloud.
struct FlowSpec {
  std::string host;
  std::uint8_t protocol = ip_proto::kTcp;
  std::uint16_t port = 443;
  std::uint32_t payload_min = 80;
  std::uint32_t payload_max = 600;
  int packets_min = 2;
  int packets_max = 6;
  /// Relative pick weight.
  int weight = 1;
};

/// Benign traffic model of a device family.
struct BehaviorProfile {
  std::string name;
  std::string first_party_host;
  std::vector<FlowSpec> flows;
  Duration mean_interval = std::chrono::seconds(120);
  /// Fixed gap between packets inside a burst.
  Duration packet_gap = std::chrono::milliseconds(20);
};

/// Built-in profiles: echo-spot, google-home, camera, plug, hub, speaker, tv.
const BehaviorProfile& builtin_profile(std::string_view name);
std::vector<std::string> builtin_profile_names();

/// Device-side state needed to synthesize bursts.
struct BurstContext {
  Endpoint self;
  MacAddress gateway_mac;
  std::uint16_t next_port = 49152;
  std::uint16_t next_dns_id = 1;
  std::map<std::string, Timestamp> dns_cache;
};

/// Outbound packets of one activity burst starting at `start`: DNS lookup when
/// the cached answer is stale, then the flow itself.
std::vector<PacketRecord> generate_burst(const BehaviorProfile& profile, BurstContext& ctx, Timestamp start,
                                         std::mt19937_64& rng);
/// Burst along a specific flow.
std::vector<PacketRecord> generate_flow_burst(const FlowSpec& flow, BurstContext& ctx, Timestamp start,
                                              Duration gap, std::mt19937_64& rng);

/// Five TCP packets to the first-party host, preceded by its DNS lookup.
std::vector<PacketRecord> generate_boot_burst(const BehaviorProfile& profile, BurstContext& ctx, Timestamp start,
                                              std::mt19937_64& rng);

/// Device-side outbound template of `duration` virtual seconds, as captured at
/// the IoT bridge for a stand-in device. Used for replay scenarios.
Trace make_template(const BehaviorProfile& profile, Duration duration, std::uint64_t seed,
                    Duration mean_interval_override = Duration::zero());

/// Stand-in identity template traces are recorded under.
Endpoint template_endpoint();

}  // namespace sgbench
