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

#include "sgbench/profiles.hpp"

#include <algorithm>
#include <stdexcept>

#include "sgbench/dns.hpp"

namespace sgbench {

std::uint64_t stable_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Ipv4Address InternetModel::address_of(std::string_view hostname) {
  if (hostname == kResolverName) return kResolver;
  if (hostname == kDohResolverName) return kDohResolver;
  if (hostname == kVictimAName) return kVictimA;
  if (hostname == kVictimBName) return kVictimB;
  constexpr std::uint32_t base = (198u << 24) | (18u << 16);
  const auto h = stable_hash(hostname);
  return Ipv4Address(base + 1 + static_cast<std::uint32_t>(h % 131070));
}

InternetModel::HostBehavior InternetModel::behavior_of(Ipv4Address address) {
  HostBehavior b;
  if (address == kResolver) {
    b.dns_server = true;
    return b;
  }
  if (address == kDohResolver) {
    b.doh_server = true;
    b.tcp_open = {443};
    return b;
  }
  if (is_victim(address)) {
    b.tcp_open = {21, 80, 443};
    b.dns_server = address == kVictimB;
    b.ntp_server = false;
    return b;
  }
  b.tcp_open = {21, 22, 80, 443, 554, 1883, 5222, 5228, 8009, 8080, 8443, 8883};
  b.udp_silent = {443, 3478, 10000};
  return b;
}

std::uint32_t server_isn(const FiveTuple& client_flow) {
  // The client address is left out: it changes when the flow crosses the NAT.
  FiveTuple key = client_flow;
  key.src_ip = Ipv4Address{};
  return static_cast<std::uint32_t>(FiveTupleHash{}(key) * 2654435761u);
}

namespace {
constexpr std::uint8_t kDohMagic[4] = {0x17, 0x03, 0x03, 0xd0};
}

std::vector<std::uint8_t> doh_wrap(std::span<const std::uint8_t> dns_message, std::uint64_t nonce) {
  std::vector<std::uint8_t> out(kDohMagic, kDohMagic + 4);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(nonce >> (8 * i)));
  out.push_back(static_cast<std::uint8_t>(dns_message.size() >> 8));
  out.push_back(static_cast<std::uint8_t>(dns_message.size()));
  std::mt19937_64 ks(nonce);
  for (std::size_t i = 0; i < dns_message.size(); ++i) {
    out.push_back(static_cast<std::uint8_t>(dns_message[i] ^ static_cast<std::uint8_t>(ks())));
  }
  return out;
}

std::optional<std::vector<std::uint8_t>> doh_unwrap(std::span<const std::uint8_t> payload) {
  if (payload.size() < 14 || !std::equal(kDohMagic, kDohMagic + 4, payload.begin())) return std::nullopt;
  std::uint64_t nonce = 0;
  for (int i = 0; i < 8; ++i) nonce |= std::uint64_t{payload[4 + i]} << (8 * i);
  const std::size_t len = (std::size_t{payload[12]} << 8) | payload[13];
  if (payload.size() != 14 + len) return std::nullopt;
  std::mt19937_64 ks(nonce);
  std::vector<std::uint8_t> out(len);
  for (std::size_t i = 0; i < len; ++i) out[i] = static_cast<std::uint8_t>(payload[14 + i] ^ static_cast<std::uint8_t>(ks()));
  return out;
}

void random_bytes(std::mt19937_64& rng, std::vector<std::uint8_t>& out, std::size_t n) {
  out.resize(n);
  std::size_t i = 0;
  while (i < n) {
    auto v = rng();
    for (int k = 0; k < 8 && i < n; ++k, ++i) {
      out[i] = static_cast<std::uint8_t>(v);
      v >>= 8;
    }
  }
}

std::uint64_t uniform_int(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  if (hi <= lo) return lo;
  const std::uint64_t span = hi - lo + 1;
  return lo + (span == 0 ? rng() : rng() % span);
}

double uniform_real(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::string_view to_string(DeviceCategory c) {
  switch (c) {
    case DeviceCategory::Camera: return "CAMERA";
    case DeviceCategory::HomeAutomation: return "HOME_AUTOMATION";
    case DeviceCategory::Hub: return "HUB";
    case DeviceCategory::Speaker: return "SPEAKER";
    case DeviceCategory::Video: return "VIDEO";
  }
  return "CAMERA";
}

DeviceCategory parse_category(std::string_view text) {
  for (auto c : {DeviceCategory::Camera, DeviceCategory::HomeAutomation, DeviceCategory::Hub,
                 DeviceCategory::Speaker, DeviceCategory::Video}) {
    if (to_string(c) == text) return c;
  }
  throw BenchError(ErrorCode::InvalidArgument, "unknown device category '" + std::string(text) + "'");
}

namespace {

FlowSpec tcp(std::string host, std::uint16_t port, std::uint32_t pmin, std::uint32_t pmax, int nmin, int nmax,
             int weight) {
  return {std::move(host), ip_proto::kTcp, port, pmin, pmax, nmin, nmax, weight};
}
FlowSpec udp(std::string host, std::uint16_t port, std::uint32_t pmin, std::uint32_t pmax, int nmin, int nmax,
             int weight) {
  return {std::move(host), ip_proto::kUdp, port, pmin, pmax, nmin, nmax, weight};
}

std::vector<BehaviorProfile> make_builtin_profiles() {
  using std::chrono::milliseconds;
  using std::chrono::seconds;
  std::vector<BehaviorProfile> v;
  v.push_back({"echo-spot", "avs.echo-cloud.example",
               {tcp("avs.echo-cloud.example", 443, 100, 900, 3, 8, 5),
                tcp("metrics.echo-cloud.example", 443, 200, 600, 2, 4, 2),
                udp("ntp.echo-cloud.example", 123, 48, 48, 1, 1, 1)},
               seconds(60), milliseconds(20)});
  v.push_back({"google-home", "clients.home-cloud.example",
               {udp("clients.home-cloud.example", 443, 1200, 1350, 6, 14, 5),
                tcp("mtalk.home-cloud.example", 5228, 60, 200, 2, 4, 2),
                udp("time.home-cloud.example", 123, 48, 48, 1, 1, 1)},
               seconds(20), milliseconds(15)});
  v.push_back({"camera", "hub.cam-cloud.example",
               {tcp("hub.cam-cloud.example", 443, 100, 300, 2, 4, 4),
                udp("ntp.cam-cloud.example", 123, 48, 48, 1, 1, 1)},
               seconds(90), milliseconds(20)});
  v.push_back({"camera-upload", "stream.cam-cloud.example",
               {tcp("stream.cam-cloud.example", 443, 1300, 1400, 30, 40, 1)},
               milliseconds(500), milliseconds(5)});
  v.push_back({"plug", "mqtt.plug-cloud.example",
               {tcp("mqtt.plug-cloud.example", 8883, 40, 160, 1, 3, 5),
                udp("ntp.plug-cloud.example", 123, 48, 48, 1, 1, 1)},
               seconds(150), milliseconds(30)});
  v.push_back({"hub", "api.hub-cloud.example",
               {tcp("api.hub-cloud.example", 443, 100, 500, 2, 6, 4),
                tcp("events.hub-cloud.example", 8883, 40, 120, 1, 3, 3),
                udp("ntp.hub-cloud.example", 123, 48, 48, 1, 1, 1)},
               seconds(100), milliseconds(20)});
  v.push_back({"speaker", "api.speaker-cloud.example",
               {tcp("api.speaker-cloud.example", 443, 100, 800, 3, 7, 4),
                udp("ntp.speaker-cloud.example", 123, 48, 48, 1, 1, 1)},
               seconds(80), milliseconds(20)});
  v.push_back({"tv", "api.tv-cloud.example",
               {tcp("api.tv-cloud.example", 443, 200, 900, 3, 9, 4),
                tcp("ads.tv-cloud.example", 443, 200, 600, 2, 5, 2),
                udp("ntp.tv-cloud.example", 123, 48, 48, 1, 1, 1)},
               seconds(70), milliseconds(20)});
  return v;
}

const std::vector<BehaviorProfile>& all_profiles() {
  static const std::vector<BehaviorProfile> profiles = make_builtin_profiles();
  return profiles;
}

Endpoint host_endpoint(const BurstContext& ctx, std::string_view host, std::uint16_t port) {
  return Endpoint{ctx.gateway_mac, InternetModel::address_of(host), port};
}

std::uint16_t next_port(BurstContext& ctx) {
  const auto p = ctx.next_port;
  ctx.next_port = ctx.next_port >= 65000 ? 49152 : static_cast<std::uint16_t>(ctx.next_port + 1);
  return p;
}

void maybe_lookup(const std::string& host, BurstContext& ctx, Timestamp& t, Duration gap,
                  std::vector<PacketRecord>& out) {
  auto it = ctx.dns_cache.find(host);
  if (it != ctx.dns_cache.end() && t < it->second) return;
  auto self = ctx.self;
  self.port = next_port(ctx);
  const auto q = dns::encode(dns::make_query(ctx.next_dns_id++, host));
  out.push_back(make_udp(t, self, Endpoint{ctx.gateway_mac, InternetModel::kResolver, 53}, q));
  ctx.dns_cache[host] = t + std::chrono::seconds(300);
  t += gap;
}

void tls_like_payload(std::mt19937_64& rng, std::vector<std::uint8_t>& buf, std::uint32_t len) {
  random_bytes(rng, buf, len);
  if (len >= 5) {
    buf[0] = 0x17;
    buf[1] = 0x03;
    buf[2] = 0x03;
    buf[3] = static_cast<std::uint8_t>((len - 5) >> 8);
    buf[4] = static_cast<std::uint8_t>(len - 5);
  }
}

std::vector<std::uint8_t> ntp_request(std::mt19937_64& rng) {
  std::vector<std::uint8_t> b(48, 0);
  b[0] = 0x23;
  const auto v = rng();
  for (int i = 0; i < 8; ++i) b[40 + i] = static_cast<std::uint8_t>(v >> (8 * i));
  return b;
}

}  // namespace

const BehaviorProfile& builtin_profile(std::string_view name) {
  for (const auto& p : all_profiles()) {
    if (p.name == name) return p;
  }
  throw BenchError(ErrorCode::InvalidArgument, "unknown behavior profile '" + std::string(name) + "'");
}

std::vector<std::string> builtin_profile_names() {
  std::vector<std::string> names;
  for (const auto& p : all_profiles()) names.push_back(p.name);
  return names;
}

std::vector<PacketRecord> generate_flow_burst(const FlowSpec& flow, BurstContext& ctx, Timestamp start,
                                              Duration gap, std::mt19937_64& rng) {
  std::vector<PacketRecord> out;
  Timestamp t = start;
  maybe_lookup(flow.host, ctx, t, gap, out);
  auto self = ctx.self;
  self.port = next_port(ctx);
  const auto server = host_endpoint(ctx, flow.host, flow.port);
  const int n = static_cast<int>(uniform_int(rng, static_cast<std::uint64_t>(flow.packets_min),
                                             static_cast<std::uint64_t>(flow.packets_max)));
  std::vector<std::uint8_t> buf;
  if (flow.protocol == ip_proto::kTcp) {
    const FiveTuple ft{ip_proto::kTcp, self.ip, self.port, server.ip, server.port};
    std::uint32_t seq = static_cast<std::uint32_t>(rng());
    const std::uint32_t ack = server_isn(ft) + 1;
    out.push_back(make_tcp(t, self, server, tcp_flag::kSyn, seq, 0));
    ++seq;
    t += gap;
    out.push_back(make_tcp(t, self, server, tcp_flag::kAck, seq, ack));
    for (int i = 0; i < n; ++i) {
      t += gap;
      const auto len = static_cast<std::uint32_t>(uniform_int(rng, flow.payload_min, flow.payload_max));
      tls_like_payload(rng, buf, len);
      out.push_back(make_tcp(t, self, server, tcp_flag::kPsh | tcp_flag::kAck, seq, ack, buf));
      seq += len;
    }
    t += gap;
    out.push_back(make_tcp(t, self, server, tcp_flag::kFin | tcp_flag::kAck, seq, ack));
  } else {
    for (int i = 0; i < n; ++i) {
      if (i > 0) t += gap;
      if (flow.port == 123) {
        buf = ntp_request(rng);
      } else {
        const auto len = static_cast<std::uint32_t>(uniform_int(rng, flow.payload_min, flow.payload_max));
        random_bytes(rng, buf, len);
      }
      out.push_back(make_udp(t, self, server, buf));
    }
  }
  return out;
}

std::vector<PacketRecord> generate_burst(const BehaviorProfile& profile, BurstContext& ctx, Timestamp start,
                                         std::mt19937_64& rng) {
  int total = 0;
  for (const auto& f : profile.flows) total += f.weight;
  auto pick = static_cast<int>(uniform_int(rng, 0, static_cast<std::uint64_t>(total - 1)));
  for (const auto& f : profile.flows) {
    if (pick < f.weight) return generate_flow_burst(f, ctx, start, profile.packet_gap, rng);
    pick -= f.weight;
  }
  return {};
}

std::vector<PacketRecord> generate_boot_burst(const BehaviorProfile& profile, BurstContext& ctx, Timestamp start,
                                              std::mt19937_64& rng) {
  // SYN, ACK, two data segments, FIN: five packets to the first-party host.
  FlowSpec boot{profile.first_party_host, ip_proto::kTcp, 443, 120, 400, 2, 2, 1};
  return generate_flow_burst(boot, ctx, start, std::chrono::milliseconds(100), rng);
}

Endpoint template_endpoint() {
  return Endpoint{MacAddress{{0x02, 0x54, 0x4d, 0x50, 0x4c, 0x01}}, Ipv4Address{10, 0, 0, 99}, 0};
}

Trace make_template(const BehaviorProfile& profile, Duration duration, std::uint64_t seed,
                    Duration mean_interval_override) {
  std::mt19937_64 rng(seed ^ stable_hash(profile.name));
  BurstContext ctx;
  ctx.self = template_endpoint();
  ctx.gateway_mac = AddressPlan{}.safeguard_lan_mac;
  const Duration mean = mean_interval_override > Duration::zero() ? mean_interval_override : profile.mean_interval;
  Trace trace;
  trace.metadata.capture_point = CapturePoint::IotBridge;
  trace.metadata.link_id = "template:" + profile.name;
  Timestamp t{0};
  while (t < duration) {
    auto burst = generate_burst(profile, ctx, t, rng);
    for (auto& p : burst) {
      if (p.timestamp >= duration) break;
      trace.packets.push_back(std::move(p));
    }
    const auto jitter = 0.5 + uniform_real(rng);
    t += Duration{static_cast<std::int64_t>(static_cast<double>(mean.count()) * jitter)};
  }
  std::stable_sort(trace.packets.begin(), trace.packets.end(),
                   [](const PacketRecord& a, const PacketRecord& b) { return a.timestamp < b.timestamp; });
  if (!trace.packets.empty()) trace.metadata.end = trace.packets.back().timestamp;
  return trace;
}

}  // namespace sgbench
