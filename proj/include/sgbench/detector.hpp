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

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sgbench/adapter.hpp"
#include "sgbench/anomaly.hpp"
#include "sgbench/fingerprint.hpp"
#include "sgbench/ini.hpp"
#include "sgbench/resources.hpp"

namespace sgbench {

/// Every threshold of the reference detector in one place.
struct DetectorConfig {
  // Volumetric rules, evaluated per (source, destination) over a sliding window.
  Duration volumetric_window = std::chrono::seconds(10);
  int syn_half_open = 500;
  int http_gets = 300;
  int dns_queries = 500;
  double dns_unique_ratio = 0.9;
  int frag_incomplete = 200;
  /// ICMP port-unreachable per window, to or from one device...
  int icmp_unreachable = 100;
  /// ...held for this long before a UDP flood is reported.
  Duration udp_sustain = std::chrono::seconds(600);

  Duration scan_window = std::chrono::seconds(60);
  int scan_ports = 5;
  int scan_diversity = 3;

  /// Minimum gap between two alerts of one kind about the same subject.
  Duration alert_cooldown = std::chrono::seconds(600);

  // Active open-port scan.
  enum class PortScanMode : std::uint8_t { OnConnect, Weekly, Off };
  PortScanMode port_scan_mode = PortScanMode::OnConnect;
  std::vector<std::uint16_t> watchlist = {21, 22, 23, 80, 443, 554, 1883, 8080};
  Duration port_scan_delay = std::chrono::seconds(5);
  Duration port_probe_gap = std::chrono::milliseconds(500);
  Duration port_scan_period = std::chrono::hours(24 * 7);

  // Payload inspection.
  double entropy_threshold = 6.0;
  std::set<std::uint16_t> plaintext_ports = {21, 23, 25, 80, 110, 143, 1883, 8080};
  std::set<std::uint16_t> tls_ports = {443, 853, 993, 995, 5223, 5228, 8443, 8883};
  std::set<std::uint16_t> infrastructure_ports = {53, 67, 68, 123, 1900, 5353};
  Duration unencrypted_dedupe = std::chrono::hours(1);
  Duration blocklist_dedupe = std::chrono::hours(1);
  std::vector<std::string> wordlist;
  std::vector<std::string> blocklist;
  PiiProfile pii;

  bool doh_enabled = false;
  Ipv4Address doh_resolver{198, 51, 100, 54};

  bool auto_quarantine = false;

  // Behavioral baseline.
  Duration learning_window = std::chrono::hours(24 * 30);
  Duration anomaly_window = std::chrono::seconds(60);
  AnomalyWeights weights;
  double anomaly_threshold = 0.6;
  double upload_z = 5.0;
  int onoff_cycles = 5;
  Duration onoff_window = std::chrono::seconds(600);

  std::set<ThreatKind> claims{kAllThreatKinds.begin(), kAllThreatKinds.end()};
  FingerprintDb fingerprints;

  /// Applies `key = value` overrides (durations in seconds, lists
  /// comma-separated). Unknown keys throw MANIFEST_ERROR.
  void apply(const ini::Section& section, const std::filesystem::path& base_dir = {});
  /// Keys `apply` accepts, for diagnostics.
  static std::vector<std::string> keys();
};

/// Adapter that forwards everything and reports nothing.
class NullAdapter : public SafeguardAdapter {
 public:
  explicit NullAdapter(std::string name = "null", std::set<ThreatKind> claims = {kAllThreatKinds.begin(), kAllThreatKinds.end()})
      : name_(std::move(name)), claims_(std::move(claims)) {}
  std::string name() const override { return name_; }
  std::set<ThreatKind> claims() const override { return claims_; }
  void attach(const std::vector<AdapterDevice>& devices, const AddressPlan&) override { devices_ = devices; }
  ForwardDecision process(const PacketRecord&, Direction) override { return ForwardDecision::forward(); }
  std::vector<Alert> poll_alerts(Timestamp) const override { return {}; }
  std::map<std::string, std::string> identify_devices() const override;
  std::vector<Emission> on_tick(Timestamp) override { return {}; }
  void reset() override {}
  void set_quarantine(const std::string&, bool) override {}

 private:
  std::string name_;
  std::set<ThreatKind> claims_;
  std::vector<AdapterDevice> devices_;
};

/// Signature, threshold and baseline detector used as the upper reference.
class ReferenceDetector : public SafeguardAdapter {
 public:
  explicit ReferenceDetector(DetectorConfig config, std::string name = "reference");

  std::string name() const override { return name_; }
  std::set<ThreatKind> claims() const override { return config_.claims; }
  void attach(const std::vector<AdapterDevice>& devices, const AddressPlan& plan) override;
  ForwardDecision process(const PacketRecord& packet, Direction direction) override;
  std::vector<Alert> poll_alerts(Timestamp since) const override;
  std::map<std::string, std::string> identify_devices() const override;
  std::vector<Emission> on_tick(Timestamp now) override;
  void begin_iteration() override;
  void reset() override;
  void set_quarantine(const std::string& device_id, bool on) override;

  /// Queues an active probe of the watchlist against a connected device.
  void request_port_scan(const std::string& device_id, Timestamp at);
  /// Anomaly baseline of a device, if one exists yet.
  const DeviceBaseline* baseline(const std::string& device_id) const;
  /// Scores of every closed window after learning, for diagnostics.
  struct ScoredWindow {
    std::string device_id;
    Timestamp end{0};
    AnomalyScore score;
  };
  const std::vector<ScoredWindow>& scored_windows() const { return scored_; }
  bool quarantined(const std::string& device_id) const;
  const DetectorConfig& config() const { return config_; }
  std::uint64_t malformed() const { return malformed_; }

 private:
  /// Sliding count of items that may be cancelled before they expire
  /// (half-open SYNs, incomplete fragment groups).
  template <typename Key, typename Hash>
  struct PendingWindow {
    std::deque<std::pair<Timestamp, Key>> items;
    std::unordered_map<Key, int, Hash> open;
    int count = 0;
    void add(Timestamp t, const Key& k) {
      items.emplace_back(t, k);
      ++open[k];
      ++count;
    }
    void complete(const Key& k) {
      auto it = open.find(k);
      if (it == open.end()) return;
      count -= it->second;
      open.erase(it);
    }
    void expire(Timestamp cutoff) {
      while (!items.empty() && items.front().first < cutoff) {
        auto it = open.find(items.front().second);
        if (it != open.end()) {
          --count;
          if (--it->second == 0) open.erase(it);
        }
        items.pop_front();
      }
    }
  };

  struct FragKey {
    std::uint32_t src, dst;
    std::uint16_t id;
    std::uint8_t proto;
    bool operator==(const FragKey&) const = default;
  };
  struct FragKeyHash {
    std::size_t operator()(const FragKey& k) const noexcept {
      return (static_cast<std::size_t>(k.src) * 1000003u) ^ (static_cast<std::size_t>(k.dst) << 7) ^
             (static_cast<std::size_t>(k.id) << 3) ^ k.proto;
    }
  };

  struct PairState {
    // Half-open connections per destination port.
    std::unordered_map<std::uint16_t, PendingWindow<FiveTuple, FiveTupleHash>> syn;
    PendingWindow<FragKey, FragKeyHash> frag;
    std::deque<Timestamp> gets;
    std::deque<std::pair<Timestamp, std::string>> dns;
    std::unordered_map<std::string, int> dns_labels;
    // Scan tracking.
    std::deque<std::pair<Timestamp, std::uint16_t>> probes;
    std::unordered_map<std::uint16_t, int> probe_ports;
    std::deque<Timestamp> diversity;
  };

  struct DeviceState {
    std::string id;
    MacAddress mac;
    std::optional<Ipv4Address> ip;
    ObservedFacts facts;
    bool associated = false;
    std::deque<Timestamp> reassociations;
    std::deque<Timestamp> icmp;
    std::optional<Timestamp> icmp_sustained_since;
    // Anomaly accounting.
    std::optional<DeviceBaseline> baseline;
    Timestamp window_start{0};
    WindowStats window;
    bool window_open = false;
    bool quarantined_manual = false;
    bool quarantined_auto = false;
  };

  struct PendingDoh {
    std::size_t device;
    Ipv4Address resolver;
    std::uint16_t device_port;
    Ipv4Address device_ip;
  };

  struct ProbeJob {
    Timestamp at;
    std::size_t device;
    std::uint16_t port;
  };

  std::optional<std::size_t> device_by_mac(const MacAddress& mac) const;
  std::optional<std::size_t> device_by_ip(Ipv4Address ip) const;
  /// The IoT device a packet belongs to, from the LAN-side view.
  std::optional<std::size_t> subject_of(const PacketRecord& p, Direction dir) const;
  std::vector<std::string> devices_of(Ipv4Address a, Ipv4Address b) const;

  void emit(ThreatKind kind, Timestamp t, std::vector<std::string> devices, std::string detail,
            const std::string& subject, Duration dedupe);
  void emit_finding(Timestamp t, std::size_t device, std::uint16_t port);

  void observe_local(const PacketRecord& p);
  void observe_dhcp(const PacketRecord& p);
  void check_volumetric(const PacketRecord& p);
  void check_icmp(const PacketRecord& p, Direction dir);
  void update_icmp(DeviceState& d, Timestamp now);
  void check_scan(const PacketRecord& p);
  void inspect_payload(const PacketRecord& p, std::size_t device);
  void match_destination(const PacketRecord& p, std::size_t device);
  void learn_dns(const PacketRecord& p);
  void account_anomaly(const PacketRecord& p, std::size_t device);
  void roll_window(DeviceState& d, Timestamp now);
  void schedule_scan(std::size_t device, Timestamp at);
  std::optional<ForwardDecision> handle_doh(const PacketRecord& p, Direction dir, std::optional<std::size_t> device);
  void clear_windows();

  std::string name_;
  DetectorConfig config_;
  AddressPlan plan_;
  std::vector<DeviceState> devices_;
  std::unordered_map<std::uint32_t, std::size_t> ip_index_;
  std::unordered_set<std::string> wordlist_;
  std::unordered_set<std::string> blocklist_;
  std::string pii_name_lower_;
  std::string pii_email_lower_;

  std::vector<Alert> alerts_;
  std::map<std::pair<ThreatKind, std::string>, Timestamp> last_alert_;
  std::set<std::pair<std::size_t, std::uint16_t>> findings_;
  std::unordered_map<std::uint64_t, PairState> pairs_;
  std::unordered_map<std::uint32_t, std::string> dns_names_;
  std::map<std::uint16_t, PendingDoh> doh_pending_;
  std::uint16_t doh_next_port_ = 20000;
  std::uint64_t doh_nonce_ = 0;
  std::deque<ProbeJob> probe_queue_;
  std::uint16_t probe_port_ = 61000;
  Timestamp next_periodic_scan_{0};
  Timestamp last_tick_{0};
  std::vector<ScoredWindow> scored_;
  std::uint64_t malformed_ = 0;
};

/// Decorator that adds a cloud back-end conversation to another adapter:
/// periodic heartbeats and/or uploads proportional to device traffic.
struct CloudProfile {
  std::string name;
  std::vector<std::string> hosts;
  /// Zero disables heartbeats.
  Duration heartbeat_period = std::chrono::seconds(300);
  std::uint32_t heartbeat_bytes = 512;
  /// Fraction of forwarded device bytes re-uploaded to hosts.front().
  double mirror_fraction = 0.0;
  /// Minimum gap between two uploads of mirrored bytes.
  Duration mirror_period = std::chrono::seconds(10);
};

/// One destination, a fixed heartbeat every 5 minutes.
CloudProfile fsecure_like_profile();
/// Ten destinations (vendor, CDN, analytics), heartbeats every 2 minutes.
CloudProfile avira_like_profile();

class CloudTelemetryAdapter : public SafeguardAdapter {
 public:
  CloudTelemetryAdapter(std::unique_ptr<SafeguardAdapter> inner, CloudProfile profile, std::uint64_t seed = 1);

  std::string name() const override { return profile_.name; }
  std::set<ThreatKind> claims() const override { return inner_->claims(); }
  void attach(const std::vector<AdapterDevice>& devices, const AddressPlan& plan) override;
  ForwardDecision process(const PacketRecord& packet, Direction direction) override;
  std::vector<Alert> poll_alerts(Timestamp since) const override { return inner_->poll_alerts(since); }
  std::map<std::string, std::string> identify_devices() const override { return inner_->identify_devices(); }
  std::vector<Emission> on_tick(Timestamp now) override;
  void begin_iteration() override { inner_->begin_iteration(); }
  void reset() override;
  void set_quarantine(const std::string& id, bool on) override { inner_->set_quarantine(id, on); }

  SafeguardAdapter& inner() { return *inner_; }

 private:
  PacketRecord cloud_packet(Timestamp t, const std::string& host, std::uint32_t bytes);

  std::unique_ptr<SafeguardAdapter> inner_;
  CloudProfile profile_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  AddressPlan plan_;
  std::optional<Timestamp> next_heartbeat_;
  Timestamp next_lookup_{0};
  Timestamp next_mirror_{0};
  std::size_t next_host_ = 0;
  std::uint64_t mirror_backlog_ = 0;
  std::uint16_t port_ = 30000;
  std::uint16_t dns_id_ = 1;
};

/// Builds an adapter by name: "null", "reference", "fsecure-like",
/// "avira-like" (the last two wrap a null adapter). Throws MANIFEST_ERROR
/// for unknown names.
std::unique_ptr<SafeguardAdapter> make_adapter(const std::string& type, const DetectorConfig& config,
                                               const std::string& name = {}, std::uint64_t seed = 1);

}  // namespace sgbench
