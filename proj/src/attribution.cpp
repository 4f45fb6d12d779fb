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

#include "sgbench/attribution.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_map>

namespace sgbench {

namespace {

struct MatchKey {
  FiveTuple flow;
  std::size_t payload_len = 0;
  bool operator==(const MatchKey&) const = default;
};

struct MatchKeyHash {
  std::size_t operator()(const MatchKey& k) const noexcept {
    return FiveTupleHash{}(k.flow) ^ (k.payload_len * 0x9e3779b97f4a7c15ULL);
  }
};

class NatIndex {
 public:
  explicit NatIndex(const NatLog& log) {
    for (std::size_t i = 0; i < log.size(); ++i) {
      by_lan_[log[i].lan].push_back(i);
      by_lan_reply_[log[i].lan.reversed()].push_back(i);
    }
    log_ = &log;
  }

  /// Gateway-side flow for a bridge packet, if the packet crosses the NAT.
  std::optional<FiveTuple> translate(const PacketRecord& p, const AddressPlan& plan) const {
    const auto flow = flow_of(p);
    if (auto b = lookup(by_lan_, flow, p.timestamp)) return b->wan;
    if (auto b = lookup(by_lan_reply_, flow, p.timestamp)) return b->wan.reversed();
    // Port-less fragments are address-translated only.
    if (p.frag_offset != 0 && plan.on_iot_lan(p.src_ip) && !plan.on_iot_lan(p.dst_ip)) {
      auto t = flow;
      t.src_ip = plan.safeguard_wan_ip;
      return t;
    }
    if (p.frag_offset != 0 && plan.on_iot_lan(p.dst_ip) && !plan.on_iot_lan(p.src_ip)) {
      auto t = flow;
      t.dst_ip = plan.safeguard_wan_ip;
      return t;
    }
    return std::nullopt;
  }

 private:
  using Index = std::unordered_map<FiveTuple, std::vector<std::size_t>, FiveTupleHash>;

  const NatBinding* lookup(const Index& idx, const FiveTuple& flow, Timestamp t) const {
    auto it = idx.find(flow);
    if (it == idx.end()) return nullptr;
    const NatBinding* best = nullptr;
    for (auto i : it->second) {
      const auto& b = (*log_)[i];
      if (t >= b.first_used && t <= b.last_used) return &b;
      best = &b;
    }
    return best;
  }

  Index by_lan_;
  Index by_lan_reply_;
  const NatLog* log_ = nullptr;
};

}  // namespace

AttributionResult attribute_safeguard_traffic(const Trace& gateway, const Trace& bridge, const NatLog& nat,
                                              Duration match_window, const AddressPlan& plan) {
  if (!gateway.empty() && !bridge.empty()) {
    const auto g0 = gateway.packets.front().timestamp;
    const auto g1 = gateway.packets.back().timestamp;
    const auto b0 = bridge.packets.front().timestamp;
    const auto b1 = bridge.packets.back().timestamp;
    if (g1 + match_window < b0 || b1 + match_window < g0) {
      throw BenchError(ErrorCode::ClockSkew, "gateway and bridge captures do not overlap in time");
    }
  }

  std::unordered_map<MatchKey, std::deque<std::size_t>, MatchKeyHash> pending;
  for (std::size_t i = 0; i < gateway.packets.size(); ++i) {
    const auto& g = gateway.packets[i];
    pending[MatchKey{flow_of(g), g.payload.size()}].push_back(i);
  }

  std::vector<bool> matched(gateway.packets.size(), false);
  const NatIndex index(nat);
  for (const auto& b : bridge.packets) {
    if (!b.is_ipv4()) continue;
    const auto wan = index.translate(b, plan);
    if (!wan) continue;
    auto it = pending.find(MatchKey{*wan, b.payload.size()});
    if (it == pending.end()) continue;
    auto& queue = it->second;
    // Gateway candidates are in time order; drop ones too old to ever match.
    while (!queue.empty() && gateway.packets[queue.front()].timestamp + match_window < b.timestamp) {
      queue.pop_front();
    }
    if (!queue.empty() && gateway.packets[queue.front()].timestamp <= b.timestamp + match_window) {
      matched[queue.front()] = true;
      queue.pop_front();
    }
  }

  AttributionResult out;
  out.safeguard_only.metadata = gateway.metadata;
  out.device_via_gateway.metadata = gateway.metadata;
  const bool has_truth = gateway.truth.size() == gateway.packets.size();
  for (std::size_t i = 0; i < gateway.packets.size(); ++i) {
    auto& dst = matched[i] ? out.device_via_gateway : out.safeguard_only;
    dst.packets.push_back(gateway.packets[i]);
    if (has_truth) dst.truth.push_back(gateway.truth[i]);
  }
  return out;
}

std::string_view to_string(Party party) {
  switch (party) {
    case Party::First: return "FIRST";
    case Party::Support: return "SUPPORT";
    case Party::Third: return "THIRD";
    case Party::Unclassified: return "UNCLASSIFIED";
  }
  return "UNCLASSIFIED";
}

Party parse_party(std::string_view text) {
  std::string t(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::toupper(c); });
  if (t == "FIRST") return Party::First;
  if (t == "SUPPORT") return Party::Support;
  if (t == "THIRD") return Party::Third;
  if (t == "UNCLASSIFIED") return Party::Unclassified;
  throw BenchError(ErrorCode::InvalidArgument, "unknown party class '" + t + "'");
}

std::vector<DestinationRecord> summarize_destinations(const Trace& safeguard_only,
                                                      const std::map<Ipv4Address, std::string>& dns,
                                                      const AddressPlan& plan) {
  std::map<std::string, DestinationRecord> by_key;
  for (const auto& p : safeguard_only.packets) {
    if (!p.is_ipv4() || p.src_ip != plan.safeguard_wan_ip) continue;
    if (p.dst_port == 53) continue;
    auto it = dns.find(p.dst_ip);
    const std::string key = it != dns.end() ? it->second : p.dst_ip.to_string();
    auto [rec, inserted] = by_key.try_emplace(key);
    if (inserted) {
      rec->second.key = key;
      rec->second.first_seen = p.timestamp;
    }
    rec->second.bytes_total += p.wire_len;
    rec->second.last_seen = p.timestamp;
  }
  std::vector<DestinationRecord> out;
  out.reserve(by_key.size());
  for (auto& [_, rec] : by_key) out.push_back(std::move(rec));
  return out;
}

std::string destinations_csv(const std::vector<DestinationRecord>& records) {
  std::ostringstream os;
  os << "key,party,bytes_total,first_seen,last_seen\n";
  for (const auto& r : records) {
    os << r.key << ',' << to_string(r.party) << ',' << r.bytes_total << ',' << to_seconds(r.first_seen) << ','
       << to_seconds(r.last_seen) << '\n';
  }
  return os.str();
}

}  // namespace sgbench
