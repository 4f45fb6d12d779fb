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
#include <set>
#include <string>
#include <utility>

#include "sgbench/packet.hpp"

namespace sgbench {

/// (IP protocol, server port) bucket of the protocol histogram.
using ProtoKey = std::pair<std::uint8_t, std::uint16_t>;
using ProtoHistogram = std::map<ProtoKey, std::uint64_t>;

ProtoKey proto_key(const PacketRecord& outbound);

/// Outbound activity of one device within one scoring window.
struct WindowStats {
  std::uint64_t bytes = 0;
  std::uint64_t packets = 0;
  std::map<Ipv4Address, std::uint64_t> dest_bytes;
  ProtoHistogram protocols;

  void add(const PacketRecord& outbound);
  bool empty() const { return packets == 0; }
};

/// Jensen-Shannon divergence of two histograms in bits (range [0, 1]).
double jensen_shannon(const ProtoHistogram& a, const ProtoHistogram& b);

/// Learned per-device behavior. Byte-rate statistics cover every window of the
/// learning period, idle ones included.
class DeviceBaseline {
 public:
  DeviceBaseline() = default;
  DeviceBaseline(std::string device_id, Duration learning_window, Timestamp first_seen);

  void learn(const WindowStats& w);
  /// Adds `n` windows with no traffic.
  void learn_idle(std::uint64_t n);
  /// Freezes the baseline once `window_end` reaches first_seen + learning_window.
  bool maybe_freeze(Timestamp window_end);

  const std::string& device_id() const { return device_id_; }
  bool learned() const { return learned_; }
  Duration learning_window() const { return learning_window_; }
  Timestamp first_seen() const { return first_seen_; }
  const std::set<Ipv4Address>& destinations() const { return destinations_; }
  const ProtoHistogram& protocols() const { return protocols_; }
  std::uint64_t histogram_mass() const;
  std::uint64_t windows() const { return n_; }
  double mean() const { return mean_; }
  /// Population standard deviation.
  double stddev() const;

 private:
  std::string device_id_;
  Duration learning_window_{0};
  Timestamp first_seen_{0};
  bool learned_ = false;
  std::set<Ipv4Address> destinations_;
  ProtoHistogram protocols_;
  std::uint64_t n_ = 0;
  double mean_ = 0;
  double m2_ = 0;
};

struct AnomalyWeights {
  double new_destination = 0.4;
  double divergence = 0.3;
  double rate = 0.3;
};

struct AnomalyScore {
  double new_destination = 0;
  double divergence = 0;
  /// Non-negative byte-rate z-score (before squashing).
  double z = 0;
  double score = 0;
};

/// Throws NOT_LEARNED if the baseline is still learning.
AnomalyScore score_anomaly(const DeviceBaseline& baseline, const WindowStats& window,
                           const AnomalyWeights& weights = {});

}  // namespace sgbench
