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

#include "sgbench/anomaly.hpp"

#include <algorithm>
#include <cmath>

namespace sgbench {

ProtoKey proto_key(const PacketRecord& p) { return {p.ip_protocol, p.dst_port.value_or(0)}; }

void WindowStats::add(const PacketRecord& p) {
  bytes += p.wire_len;
  ++packets;
  dest_bytes[p.dst_ip] += p.wire_len;
  ++protocols[proto_key(p)];
}

double jensen_shannon(const ProtoHistogram& a, const ProtoHistogram& b) {
  double na = 0, nb = 0;
  for (const auto& [_, c] : a) na += static_cast<double>(c);
  for (const auto& [_, c] : b) nb += static_cast<double>(c);
  if (na == 0 || nb == 0) return na == nb ? 0.0 : 1.0;
  std::map<ProtoKey, std::pair<double, double>> joint;
  for (const auto& [k, c] : a) joint[k].first = static_cast<double>(c) / na;
  for (const auto& [k, c] : b) joint[k].second = static_cast<double>(c) / nb;
  double js = 0;
  for (const auto& [_, pq] : joint) {
    const auto [p, q] = pq;
    const double m = 0.5 * (p + q);
    if (p > 0) js += 0.5 * p * std::log2(p / m);
    if (q > 0) js += 0.5 * q * std::log2(q / m);
  }
  return std::clamp(js, 0.0, 1.0);
}

DeviceBaseline::DeviceBaseline(std::string device_id, Duration learning_window, Timestamp first_seen)
    : device_id_(std::move(device_id)), learning_window_(learning_window), first_seen_(first_seen) {}

void DeviceBaseline::learn(const WindowStats& w) {
  if (learned_) return;
  for (const auto& [ip, _] : w.dest_bytes) destinations_.insert(ip);
  for (const auto& [k, c] : w.protocols) protocols_[k] += c;
  ++n_;
  const double x = static_cast<double>(w.bytes);
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void DeviceBaseline::learn_idle(std::uint64_t n) {
  if (learned_ || n == 0) return;
  // Chan et al. merge of n zero-valued samples.
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(n);
  const double delta = 0.0 - mean_;
  const double total = na + nb;
  m2_ += delta * delta * na * nb / total;
  mean_ += delta * nb / total;
  n_ += n;
}

bool DeviceBaseline::maybe_freeze(Timestamp window_end) {
  if (!learned_ && window_end - first_seen_ >= learning_window_) learned_ = true;
  return learned_;
}

std::uint64_t DeviceBaseline::histogram_mass() const {
  std::uint64_t m = 0;
  for (const auto& [_, c] : protocols_) m += c;
  return m;
}

double DeviceBaseline::stddev() const { return n_ == 0 ? 0.0 : std::sqrt(std::max(0.0, m2_ / static_cast<double>(n_))); }

AnomalyScore score_anomaly(const DeviceBaseline& baseline, const WindowStats& window, const AnomalyWeights& weights) {
  if (!baseline.learned()) {
    throw BenchError(ErrorCode::NotLearned, "baseline of " + baseline.device_id() + " is still learning");
  }
  AnomalyScore s;
  if (window.bytes > 0) {
    std::uint64_t fresh = 0;
    for (const auto& [ip, b] : window.dest_bytes) {
      if (!baseline.destinations().contains(ip)) fresh += b;
    }
    s.new_destination = static_cast<double>(fresh) / static_cast<double>(window.bytes);
  }
  s.divergence = window.empty() ? 0.0 : jensen_shannon(window.protocols, baseline.protocols());
  const double sd = baseline.stddev();
  const double diff = static_cast<double>(window.bytes) - baseline.mean();
  if (sd > 1e-9) {
    s.z = std::max(0.0, diff / sd);
  } else {
    s.z = diff > 0 ? 1e9 : 0.0;
  }
  s.score = weights.new_destination * s.new_destination + weights.divergence * s.divergence +
            weights.rate * (s.z / (1.0 + s.z));
  return s;
}

}  // namespace sgbench
