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
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "sgbench/adapter.hpp"
#include "sgbench/attribution.hpp"
#include "sgbench/packet.hpp"
#include "sgbench/profiles.hpp"

namespace sgbench {

struct FingerprintFacts {
  std::optional<std::string> dhcp_hostname;
  /// Ordered DHCP parameter-request list (option 55).
  std::optional<std::vector<std::uint8_t>> dhcp_options;
  std::optional<std::string> dhcp_vendor_class;
  std::vector<std::string> mdns_services;
  std::optional<std::string> upnp_device_type;
};

struct DeviceDescriptor {
  std::string id;
  MacAddress mac;
  std::optional<Ipv4Address> assigned_ip;
  DeviceCategory category = DeviceCategory::HomeAutomation;
  std::string true_label;
  FingerprintFacts facts;
  std::set<std::uint16_t> open_ports;
  bool connected = false;
  /// Name of the benign behavior profile driving background traffic.
  std::string profile = "plug";
};

enum class InjectionPoint : std::uint8_t { GatewaySide, IotLanSide };

struct TimedPacket {
  PacketRecord packet;
  std::uint32_t scenario_tag = 0;
};

struct DeviceEvent {
  Timestamp time{0};
  std::string device_id;
  bool connect = true;
};

struct HarnessOptions {
  AddressPlan plan;
  /// Added per forwarding hop when non-zero.
  Duration hop_latency{0};
  Duration tick_interval = std::chrono::seconds(1);
  bool record_captures = true;
  /// Devices emit profile-driven traffic while connected.
  bool background_traffic = false;
  /// Devices contact their first-party host right after DHCP.
  bool boot_burst = true;
  /// Gaps between background bursts are scaled by this factor.
  double background_interval_scale = 1.0;
};

struct HarnessStats {
  std::uint64_t events = 0;
  std::uint64_t bridge_packets = 0;
  std::uint64_t gateway_packets = 0;
  std::uint64_t dropped = 0;
  std::uint64_t adapter_faults = 0;
};

/// Virtual-time simulation of gateway <-> safeguard <-> IoT bridge <-> devices.
/// Single-threaded: events run in (time, insertion order).
class Harness {
 public:
  Harness(std::vector<DeviceDescriptor> devices, std::unique_ptr<SafeguardAdapter> adapter, std::uint64_t seed,
          HarnessOptions options = {});
  Harness(const Harness&) = delete;
  Harness& operator=(const Harness&) = delete;
  Harness(Harness&&) = default;
  Harness& operator=(Harness&&) = default;

  Ipv4Address connect_device(const std::string& id);
  void disconnect_device(const std::string& id);
  void schedule(const DeviceEvent& event);

  void inject(InjectionPoint point, std::vector<TimedPacket> packets);
  void inject(InjectionPoint point, const std::vector<PacketRecord>& packets, std::uint32_t scenario_tag = 0);

  /// Processes everything due up to now + dt; returns the number of events handled.
  std::size_t advance_clock(Duration dt);
  std::size_t run_until(Timestamp t);

  /// Packets observed at `point` with t0 <= timestamp < t1.
  Trace capture(CapturePoint point, Timestamp t0, Timestamp t1) const;
  Trace capture_all(CapturePoint point) const;
  void clear_captures();
  void set_record_captures(bool on);

  /// Every NAT binding used so far, including active ones.
  NatLog nat_log() const;
  std::size_t active_nat_entries() const { return nat_.size(); }
  /// Active bindings must be a bijection between LAN and WAN tuples.
  bool nat_is_bijective() const;

  void set_open_ports(const std::string& id, std::set<std::uint16_t> ports);
  /// Unsolicited inbound traffic to the safeguard's WAN address goes to this device.
  void set_port_forward(std::optional<std::string> device_id);

  Timestamp now() const { return clock_; }
  std::uint64_t seed() const { return seed_; }
  const HarnessOptions& options() const { return options_; }
  const HarnessStats& stats() const { return stats_; }
  const std::vector<DeviceDescriptor>& devices() const { return devices_; }
  const DeviceDescriptor& device(const std::string& id) const;
  const DeviceDescriptor* device_by_mac(const MacAddress& mac) const;
  const DeviceDescriptor* device_by_ip(Ipv4Address ip) const;
  Endpoint endpoint_of(const std::string& id, std::uint16_t port = 0) const;
  SafeguardAdapter& adapter() { return *adapter_; }
  const SafeguardAdapter& adapter() const { return *adapter_; }
  /// Swaps the safeguard under test; the new adapter is attached immediately.
  void replace_adapter(std::unique_ptr<SafeguardAdapter> adapter);

 private:
  enum class Stage : std::uint8_t { LanIngress, LanEgress, WanIngress, WanEgress };

  struct PacketEvent {
    Stage stage;
    PacketRecord packet;
    GroundTruth truth;
  };
  struct ActivityEvent {
    std::size_t device;
    std::uint64_t generation;
  };
  struct Event {
    Timestamp time;
    std::uint64_t seq;
    std::variant<PacketEvent, DeviceEvent, ActivityEvent> body;
  };
  struct EventOrder {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };

  struct NatEntry {
    FiveTuple wan;
    Timestamp first_used;
    Timestamp last_used;
  };

  struct DeviceState {
    BurstContext ctx;
    std::mt19937_64 rng;
    std::uint64_t generation = 0;
  };

  void push(Timestamp t, std::variant<PacketEvent, DeviceEvent, ActivityEvent> body);
  void push_packet(Stage stage, PacketRecord packet, GroundTruth truth);
  void dispatch(Event& ev);
  void handle_packet(PacketEvent& ev);
  void handle_device_event(const DeviceEvent& ev);
  void handle_activity(const ActivityEvent& ev);
  void tick(Timestamp t);

  void lan_ingress(PacketRecord& p, const GroundTruth& truth);
  void lan_egress(PacketRecord& p, const GroundTruth& truth);
  void wan_ingress(PacketRecord& p, const GroundTruth& truth);
  void wan_egress(PacketRecord& p, const GroundTruth& truth);
  void forward(Stage stage, PacketRecord p, const GroundTruth& truth);

  void record(CapturePoint point, const PacketRecord& p, const GroundTruth& truth);
  ForwardDecision call_adapter(const PacketRecord& p, Direction dir);

  bool translate_outbound(PacketRecord& p);
  bool translate_inbound(PacketRecord& p);
  FiveTuple allocate_wan(const FiveTuple& lan);
  void expire_nat(Timestamp now);

  void respond_internet(const PacketRecord& p, const GroundTruth& truth);
  void respond_device(std::size_t device, const PacketRecord& p, const GroundTruth& truth);
  void connect_at(std::size_t device, Timestamp t);
  void schedule_activity(std::size_t device, Timestamp after);
  std::size_t index_of(const std::string& id) const;

  std::vector<DeviceDescriptor> devices_;
  std::vector<DeviceState> device_state_;
  std::unique_ptr<SafeguardAdapter> adapter_;
  std::uint64_t seed_;
  HarnessOptions options_;
  HarnessStats stats_;
  Timestamp clock_{0};
  Timestamp next_tick_{0};
  std::uint64_t seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;

  std::map<MacAddress, Ipv4Address> leases_;
  std::unordered_map<std::uint32_t, std::size_t> ip_to_device_;
  std::optional<std::size_t> port_forward_;

  std::unordered_map<FiveTuple, NatEntry, FiveTupleHash> nat_;
  std::unordered_map<FiveTuple, FiveTuple, FiveTupleHash> nat_reverse_;
  NatLog nat_history_;

  std::vector<PacketRecord> gateway_capture_;
  std::vector<GroundTruth> gateway_truth_;
  std::vector<PacketRecord> bridge_capture_;
  std::vector<GroundTruth> bridge_truth_;
  std::uint64_t response_nonce_ = 0;
};

/// Validates MAC uniqueness and builds a harness with every device disconnected.
Harness build_topology(std::vector<DeviceDescriptor> devices, std::unique_ptr<SafeguardAdapter> adapter,
                       std::uint64_t seed, HarnessOptions options = {});

/// Copies an outbound template as if `as_device` had sent it: source MAC/IP are
/// rewritten, gaps are kept, and the first packet lands on `time_base`.
std::vector<TimedPacket> spoof_replay(const Trace& tmpl, const DeviceDescriptor& as_device, Timestamp time_base,
                                      std::uint32_t scenario_tag = 0);

/// DHCP message helpers shared with the fingerprinting code.
namespace dhcp {
inline constexpr std::uint8_t kDiscover = 1;
inline constexpr std::uint8_t kOffer = 2;
inline constexpr std::uint8_t kRequest = 3;
inline constexpr std::uint8_t kAck = 5;

struct Message {
  std::uint8_t op = 1;
  std::uint32_t xid = 0;
  Ipv4Address yiaddr;
  MacAddress chaddr;
  std::uint8_t type = kDiscover;
  std::optional<std::string> hostname;
  std::optional<std::vector<std::uint8_t>> parameter_list;
  std::optional<std::string> vendor_class;
  std::optional<Ipv4Address> requested_ip;
  std::optional<Ipv4Address> server_id;
};

std::vector<std::uint8_t> encode(const Message& m);
std::optional<Message> decode(std::span<const std::uint8_t> bytes);
}  // namespace dhcp

/// SSDP NOTIFY announcement carrying the UPnP device type.
std::vector<std::uint8_t> ssdp_notify(std::string_view device_type, std::string_view uuid);
std::optional<std::string> ssdp_device_type(std::string_view payload);

}  // namespace sgbench
