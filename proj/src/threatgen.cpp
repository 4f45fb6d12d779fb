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

#include "sgbench/threatgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sgbench/dns.hpp"

namespace sgbench {

using namespace std::chrono_literals;

namespace {

const Endpoint kBridgeScanner{MacAddress{{0x02, 0x1b, 0x00, 0x00, 0x00, 0x66}}, Ipv4Address{10, 0, 0, 66}, 0};

using Params = std::map<std::string, std::string>;

Params flood_defaults(std::string victim, std::string port) {
  return {{"rate", "1000"}, {"duration", "60"}, {"victim", std::move(victim)}, {"port", std::move(port)},
          {"size", "64"}, {"ports", "80,443"}};
}

std::map<ThreatKind, Params> make_defaults() {
  std::map<ThreatKind, Params> d;
  d[ThreatKind::AnomOnOff] = {{"period", "30"}, {"total", "3600"}, {"duration", "3600"}};
  d[ThreatKind::AnomTraffic] = {{"template", "builtin:google-home"}, {"duration", "600"}};
  d[ThreatKind::AnomUpload] = {{"template", "builtin:camera-upload"}, {"duration", "120"}};
  d[ThreatKind::OpenPort] = {{"ports", "23"}, {"downtime", "1"}, {"duration", "30"}};
  d[ThreatKind::WeakPassword] = {{"count", "0"}, {"interval", "0.5"}, {"victim", "a"}, {"user", "admin"},
                                 {"duration", "100"}};
  d[ThreatKind::Quarantine] = flood_defaults("a", "80");
  d[ThreatKind::Quarantine]["benign_delay"] = "5";
  d[ThreatKind::Quarantine]["benign_bursts"] = "3";
  d[ThreatKind::SynFlood] = flood_defaults("a", "80");
  d[ThreatKind::UdpFlood] = flood_defaults("a", "80");
  d[ThreatKind::DnsFlood] = flood_defaults("b", "53");
  d[ThreatKind::HttpFlood] = flood_defaults("a", "80");
  d[ThreatKind::IpfragFlood] = flood_defaults("a", "80");
  d[ThreatKind::PortScan] = {{"n_ports", "1000"}, {"rate", "100"}, {"duration", "10"}};
  d[ThreatKind::OsScan] = {{"n_ports", "1000"}, {"rate", "100"}, {"duration", "12"}};
  d[ThreatKind::MaliciousDest] = {{"interval", "0.05"}, {"limit", "0"}, {"duration", "50"}};
  d[ThreatKind::PiiExposure] = {{"count", "10"}, {"interval", "1"}, {"host", "telemetry.plain-vendor.example"},
                                {"duration", "10"}};
  d[ThreatKind::Unencrypted] = {{"count", "10"}, {"interval", "1"}, {"host", "status.plain-vendor.example"},
                                {"duration", "10"}};
  d[ThreatKind::Doh] = {{"count", "5"}, {"interval", "1"}, {"duration", "5"}};
  return d;
}

std::mt19937_64 scenario_rng(const ThreatScenario& s, std::string_view salt = {}) {
  return std::mt19937_64(s.seed ^ stable_hash(to_string(s.kind)) ^ stable_hash(salt));
}

Timestamp at(Timestamp start, std::size_t i, double rate) {
  return start + Duration{std::llround(static_cast<double>(i) * 1e6 / rate)};
}

Endpoint require_connected(const Harness& h, const std::string& id, ErrorCode code) {
  const auto& d = h.device(id);
  if (!d.connected || !d.assigned_ip) throw BenchError(code, id + " is not connected");
  return Endpoint{d.mac, *d.assigned_ip, 0};
}

Ipv4Address victim_address(const std::string& v) {
  if (v == "a") return InternetModel::kVictimA;
  if (v == "b") return InternetModel::kVictimB;
  return Ipv4Address::parse(v);
}

/// Source and destination of a volumetric attack on the wire where it is injected.
struct AttackPath {
  Endpoint src;
  Endpoint dst;
  bool gateway_side = false;
};

AttackPath flood_path(const ThreatScenario& s, const Harness& h) {
  const auto& plan = h.options().plan;
  if (s.targets.empty()) throw BenchError(ErrorCode::MissingParam, s.name + ": targets");
  if (s.origin == ThreatOrigin::Internet) {
    require_connected(h, s.targets.front(), ErrorCode::TargetDisconnected);
    return {Endpoint{plan.gateway_mac, InternetModel::kAttacker, 0},
            Endpoint{plan.safeguard_wan_mac, plan.safeguard_wan_ip, 0}, true};
  }
  auto src = require_connected(h, s.targets.front(), ErrorCode::DeviceDisconnected);
  return {src, Endpoint{plan.safeguard_lan_mac, victim_address(s.text("victim")), 0}, false};
}

std::string random_label(std::mt19937_64& rng, std::size_t n) {
  static constexpr char kAlpha[] = "abcdefghijklmnopqrstuvwxyz0123456789";
  std::string out(n, 'a');
  for (auto& c : out) c = kAlpha[uniform_int(rng, 0, 35)];
  return out;
}

std::uint16_t ephemeral(std::mt19937_64& rng) { return static_cast<std::uint16_t>(uniform_int(rng, 1024, 65535)); }

/// SYN, ACK, one PSH|ACK per payload, FIN|ACK.
Timestamp tcp_session(std::vector<PacketRecord>& out, Timestamp t, const Endpoint& client, const Endpoint& server,
                      std::mt19937_64& rng, const std::vector<std::string>& payloads, Duration gap) {
  const FiveTuple ft{ip_proto::kTcp, client.ip, client.port, server.ip, server.port};
  const std::uint32_t ack = server_isn(ft) + 1;
  std::uint32_t seq = static_cast<std::uint32_t>(rng());
  out.push_back(make_tcp(t, client, server, tcp_flag::kSyn, seq, 0));
  ++seq;
  t += gap;
  out.push_back(make_tcp(t, client, server, tcp_flag::kAck, seq, ack));
  for (const auto& text : payloads) {
    t += gap;
    out.push_back(make_tcp(t, client, server, tcp_flag::kPsh | tcp_flag::kAck, seq, ack, to_bytes(text)));
    seq += static_cast<std::uint32_t>(text.size());
  }
  t += gap;
  out.push_back(make_tcp(t, client, server, tcp_flag::kFin | tcp_flag::kAck, seq, ack));
  return t;
}

Timestamp dns_lookup(std::vector<PacketRecord>& out, Timestamp t, Endpoint self, const AddressPlan& plan,
                     const std::string& name, std::mt19937_64& rng) {
  self.port = ephemeral(rng);
  const auto q = dns::encode(dns::make_query(static_cast<std::uint16_t>(rng()), name));
  out.push_back(make_udp(t, self, Endpoint{plan.safeguard_lan_mac, InternetModel::kResolver, 53}, q));
  return t;
}

std::vector<TimedPacket> tagged(std::vector<PacketRecord> packets, std::uint32_t tag) {
  std::vector<TimedPacket> out;
  out.reserve(packets.size());
  for (auto& p : packets) out.push_back({std::move(p), tag});
  return out;
}

/// TCP options for the six sequence probes of an OS scan.
std::vector<std::vector<std::uint8_t>> seq_probe_options() {
  return {
      {0x03, 0x03, 0x0a, 0x01, 0x02, 0x04, 0x05, 0xb4, 0x08, 0x0a, 0xff, 0xff, 0xff, 0xff, 0x00, 0x00, 0x00, 0x00,
       0x04, 0x02, 0x01, 0x01, 0x01, 0x01},
      {0x02, 0x04, 0x05, 0x78, 0x03, 0x03, 0x00, 0x04, 0x02, 0x08, 0x0a, 0xff, 0xff, 0xff, 0xff, 0x00, 0x00, 0x00,
       0x00, 0x00},
      {0x08, 0x0a, 0xff, 0xff, 0xff, 0xff, 0x00, 0x00, 0x00, 0x00, 0x01, 0x01, 0x03, 0x03, 0x05, 0x01, 0x04, 0x02,
       0x01, 0x01},
      {0x04, 0x02, 0x08, 0x0a, 0xff, 0xff, 0xff, 0xff, 0x00, 0x00, 0x00, 0x00, 0x03, 0x03, 0x0a, 0x00},
      {0x02, 0x04, 0x02, 0x18, 0x04, 0x02, 0x08, 0x0a, 0xff, 0xff, 0xff, 0xff, 0x00, 0x00, 0x00, 0x00, 0x03, 0x03,
       0x0a, 0x00},
      {0x02, 0x04, 0x01, 0x09, 0x04, 0x02, 0x08, 0x0a, 0xff, 0xff, 0xff, 0xff, 0x00, 0x00, 0x00, 0x00},
  };
}

}  // namespace

std::string_view to_string(ThreatOrigin origin) {
  return origin == ThreatOrigin::Internet ? "INTERNET" : "IOT_DEVICE";
}

ThreatOrigin parse_threat_origin(std::string_view text) {
  if (text == "INTERNET") return ThreatOrigin::Internet;
  if (text == "IOT_DEVICE") return ThreatOrigin::IotDevice;
  throw BenchError(ErrorCode::InvalidArgument, "unknown threat origin '" + std::string(text) + "'");
}

const std::map<std::string, std::string>& default_params(ThreatKind kind) {
  static const auto table = make_defaults();
  return table.at(kind);
}

bool allows_internet_origin(ThreatKind kind) {
  switch (kind) {
    case ThreatKind::SynFlood:
    case ThreatKind::UdpFlood:
    case ThreatKind::DnsFlood:
    case ThreatKind::HttpFlood:
    case ThreatKind::IpfragFlood:
    case ThreatKind::PortScan:
    case ThreatKind::OsScan: return true;
    default: return false;
  }
}

bool ThreatScenario::has(const std::string& key) const {
  return params.contains(key) || default_params(kind).contains(key);
}

std::string ThreatScenario::text(const std::string& key) const {
  if (auto it = params.find(key); it != params.end()) {
    if (it->second.empty()) throw BenchError(ErrorCode::MissingParam, name + ": " + key);
    return it->second;
  }
  const auto& d = default_params(kind);
  if (auto it = d.find(key); it != d.end()) return it->second;
  throw BenchError(ErrorCode::MissingParam, name + ": " + key);
}

double ThreatScenario::number(const std::string& key) const {
  const auto v = text(key);
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || !std::isfinite(out)) {
    throw BenchError(ErrorCode::InvalidArgument, name + ": " + key + " is not a number: '" + v + "'");
  }
  return out;
}

std::set<std::uint16_t> ThreatScenario::ports(const std::string& key) const {
  std::set<std::uint16_t> out;
  const auto v = text(key);
  std::size_t pos = 0;
  while (pos <= v.size()) {
    auto comma = v.find(',', pos);
    if (comma == std::string::npos) comma = v.size();
    const auto item = v.substr(pos, comma - pos);
    if (!item.empty() && item != "none") {
      const int port = std::stoi(item);
      if (port < 1 || port > 65535) throw BenchError(ErrorCode::InvalidArgument, name + ": bad port " + item);
      out.insert(static_cast<std::uint16_t>(port));
    }
    pos = comma + 1;
  }
  return out;
}

void ThreatScenario::validate() const {
  if (origin == ThreatOrigin::Internet && !allows_internet_origin(kind)) {
    throw BenchError(ErrorCode::InvalidArgument, name + ": " + std::string(to_string(kind)) +
                                                     " is launched from the IoT bridge only");
  }
  for (const auto& [key, _] : default_params(kind)) text(key);
  if (number("duration") <= 0) throw BenchError(ErrorCode::InvalidArgument, name + ": duration must be > 0");
  for (const auto& key : {"rate", "interval", "period", "total"}) {
    if (has(key) && number(key) <= 0) {
      throw BenchError(ErrorCode::InvalidArgument, name + ": " + key + " must be > 0");
    }
  }
  if (kind == ThreatKind::AnomUpload) {
    if (targets.empty()) throw BenchError(ErrorCode::NoTargets, name + ": no target devices");
  } else if (targets.empty()) {
    throw BenchError(ErrorCode::MissingParam, name + ": targets");
  }
  if (kind == ThreatKind::AnomTraffic || kind == ThreatKind::AnomUpload) text("template");
}

bool is_probe_diversity(const PacketRecord& p) {
  if (p.is_icmp()) return p.icmp->type == icmp_type::kEchoRequest && p.icmp->code != 0;
  if (!p.is_tcp()) return false;
  const auto f = p.tcp->flags;
  using namespace tcp_flag;
  if (f == 0) return true;
  if ((f & (kFin | kPsh | kUrg)) == (kFin | kPsh | kUrg) && !(f & kSyn)) return true;
  if ((f & (kSyn | kFin)) == (kSyn | kFin)) return true;
  return (f & (kSyn | kEce | kCwr)) == (kSyn | kEce | kCwr);
}

// ------------------------------------------------------------------ floods

std::vector<TimedPacket> gen_flood(FloodClass cls, const ThreatScenario& s, const Harness& h, Timestamp start) {
  const double rate = s.number("rate");
  const double duration = s.number("duration");
  if (rate <= 0 || duration <= 0) throw BenchError(ErrorCode::InvalidArgument, s.name + ": rate and duration > 0");
  const auto path = flood_path(s, h);
  auto rng = scenario_rng(s, "flood");
  const auto n = static_cast<std::size_t>(std::llround(rate * duration));
  std::vector<PacketRecord> out;
  out.reserve(n);
  auto src = path.src;
  auto dst = path.dst;
  std::vector<std::uint8_t> buf;

  switch (cls) {
    case FloodClass::Syn: {
      dst.port = static_cast<std::uint16_t>(s.number("port"));
      for (std::size_t i = 0; i < n; ++i) {
        src.port = ephemeral(rng);
        out.push_back(make_tcp(at(start, i, rate), src, dst, tcp_flag::kSyn, static_cast<std::uint32_t>(rng()), 0));
      }
      break;
    }
    case FloodClass::Udp: {
      const auto ports_set = s.ports("ports");
      const std::vector<std::uint16_t> ports(ports_set.begin(), ports_set.end());
      if (ports.empty()) throw BenchError(ErrorCode::MissingParam, s.name + ": ports");
      const auto size = static_cast<std::size_t>(s.number("size"));
      for (std::size_t i = 0; i < n; ++i) {
        src.port = ephemeral(rng);
        dst.port = ports[i % ports.size()];
        random_bytes(rng, buf, size);
        out.push_back(make_udp(at(start, i, rate), src, dst, buf));
      }
      break;
    }
    case FloodClass::Dns: {
      dst.port = 53;
      const std::string zone = path.gateway_side ? "local" : std::string(InternetModel::kVictimBName);
      for (std::size_t i = 0; i < n; ++i) {
        src.port = ephemeral(rng);
        const auto q = dns::make_query(static_cast<std::uint16_t>(rng()), random_label(rng, 12) + "." + zone);
        out.push_back(make_udp(at(start, i, rate), src, dst, dns::encode(q)));
      }
      break;
    }
    case FloodClass::Http: {
      dst.port = static_cast<std::uint16_t>(s.number("port"));
      const std::string host = path.gateway_side ? dst.ip.to_string() : std::string(InternetModel::kVictimAName);
      // Four client packets per request: SYN, ACK, GET, FIN.
      std::vector<PacketRecord> session;
      for (std::size_t i = 0; i < n; i += 4) {
        src.port = ephemeral(rng);
        session.clear();
        const auto get = "GET /?" + random_label(rng, 8) + " HTTP/1.1\r\nHost: " + host +
                         "\r\nUser-Agent: Mozilla/5.0\r\nAccept: */*\r\n\r\n";
        tcp_session(session, at(start, i, rate), src, dst, rng, {get}, Duration{std::llround(1e6 / rate)});
        for (std::size_t k = 0; k < session.size() && i + k < n; ++k) out.push_back(std::move(session[k]));
      }
      break;
    }
    case FloodClass::Ipfrag: {
      dst.port = static_cast<std::uint16_t>(s.number("port"));
      // Head and middle fragment of a 4000-byte datagram; the tail never comes.
      for (std::size_t i = 0; i < n; i += 2) {
        src.port = ephemeral(rng);
        const auto id = static_cast<std::uint16_t>(rng());
        random_bytes(rng, buf, 1472);
        auto head = make_udp(at(start, i, rate), src, dst, buf);
        head.ip_id = id;
        head.more_fragments = true;
        head.dont_fragment = false;
        out.push_back(std::move(head));
        if (i + 1 >= n) break;
        random_bytes(rng, buf, 1480);
        auto mid = make_udp(at(start, i + 1, rate), src, dst, buf);
        mid.src_port.reset();
        mid.dst_port.reset();
        mid.ip_id = id;
        mid.more_fragments = true;
        mid.frag_offset = 185;
        finalize_length(mid);
        out.push_back(std::move(mid));
      }
      break;
    }
  }
  return tagged(std::move(out), s.tag);
}

// ------------------------------------------------------------------- scans

std::vector<TimedPacket> gen_scan(ScanClass cls, const ThreatScenario& s, const Harness& h, Timestamp start) {
  if (s.targets.empty()) throw BenchError(ErrorCode::MissingParam, s.name + ": targets");
  const auto target = require_connected(h, s.targets.front(), ErrorCode::TargetDisconnected);
  const auto& plan = h.options().plan;
  const auto n_ports = static_cast<std::size_t>(s.number("n_ports"));
  if (n_ports < 1 || n_ports > 65535) throw BenchError(ErrorCode::InvalidArgument, s.name + ": n_ports");
  const double rate = s.number("rate");
  auto rng = scenario_rng(s, "scan");

  Endpoint src;
  Endpoint dst;
  if (s.origin == ThreatOrigin::Internet) {
    src = Endpoint{plan.gateway_mac, InternetModel::kAttacker, 0};
    dst = Endpoint{plan.safeguard_wan_mac, plan.safeguard_wan_ip, 0};
  } else {
    src = kBridgeScanner;
    dst = target;
  }
  src.port = ephemeral(rng);

  // Partial Fisher-Yates over 1..65535.
  std::vector<std::uint16_t> pool(65535);
  std::iota(pool.begin(), pool.end(), std::uint16_t{1});
  for (std::size_t i = 0; i < n_ports; ++i) {
    const auto j = uniform_int(rng, i, pool.size() - 1);
    std::swap(pool[i], pool[j]);
  }

  std::vector<PacketRecord> out;
  for (std::size_t i = 0; i < n_ports; ++i) {
    dst.port = pool[i];
    out.push_back(make_tcp(at(start, i, rate), src, dst, tcp_flag::kSyn, static_cast<std::uint32_t>(rng()), 0));
  }
  if (cls == ScanClass::Os) {
    const auto& d = h.device(s.targets.front());
    const std::uint16_t open = d.open_ports.empty() ? 80 : *d.open_ports.begin();
    const std::uint16_t closed = 1;
    Timestamp t = at(start, n_ports, rate);
    auto probe = [&](std::uint16_t port, std::uint8_t flags, std::vector<std::uint8_t> opts = {}) {
      dst.port = port;
      auto p = make_tcp(t, src, dst, flags, static_cast<std::uint32_t>(rng()), 0);
      p.tcp->options = std::move(opts);
      finalize_length(p);
      out.push_back(std::move(p));
      t += 100ms;
    };
    for (auto& opts : seq_probe_options()) probe(open, tcp_flag::kSyn, opts);
    using namespace tcp_flag;
    probe(open, kSyn | kEce | kCwr, {0x03, 0x03, 0x0a, 0x01, 0x02, 0x04, 0x05, 0xb4, 0x04, 0x02, 0x01, 0x01});
    probe(open, 0);
    probe(open, kSyn | kFin | kUrg | kPsh);
    probe(open, kAck);
    probe(closed, kSyn);
    probe(closed, kAck);
    probe(closed, kFin | kPsh | kUrg);
    Endpoint isrc = src;
    Endpoint idst = dst;
    isrc.port = idst.port = 0;
    const auto echo_id = static_cast<std::uint32_t>(rng() & 0xffff) << 16;
    out.push_back(make_icmp(t, isrc, idst, icmp_type::kEchoRequest, 9, echo_id | 0x0127, std::vector<std::uint8_t>(120, 0)));
    t += 100ms;
    out.push_back(make_icmp(t, isrc, idst, icmp_type::kEchoRequest, 9, (echo_id + 0x10000) | 0x0128,
                            std::vector<std::uint8_t>(150, 0)));
    t += 100ms;
    Endpoint usrc = src;
    Endpoint udst = dst;
    udst.port = closed;
    out.push_back(make_udp(t, usrc, udst, std::vector<std::uint8_t>(300, 'C')));
  }
  return tagged(std::move(out), s.tag);
}

// ----------------------------------------------------------- power cycling

std::vector<DeviceEvent> gen_power_cycle(const ThreatScenario& s, const Harness& h, Timestamp start) {
  const auto period = from_seconds(s.number("period"));
  const auto total = from_seconds(s.number("total"));
  if (period <= Duration::zero() || total <= Duration::zero()) {
    throw BenchError(ErrorCode::InvalidArgument, s.name + ": period and total must be > 0");
  }
  for (const auto& id : s.targets) h.device(id);
  const auto cycles = total.count() / period.count();
  std::vector<DeviceEvent> events;
  for (std::int64_t k = 0; k < cycles; ++k) {
    const auto off = start + period * k;
    for (const auto& id : s.targets) {
      events.push_back({off, id, false});
      events.push_back({off + period / 2, id, true});
    }
  }
  std::stable_sort(events.begin(), events.end(), [](const DeviceEvent& a, const DeviceEvent& b) {
    return a.time != b.time ? a.time < b.time : a.device_id < b.device_id;
  });
  return events;
}

// ------------------------------------------------------------------ replay

std::vector<TimedPacket> gen_trace_swap(const Trace& tmpl, const DeviceDescriptor& as_device, const ThreatScenario& s,
                                        Timestamp start) {
  if (tmpl.empty()) throw BenchError(ErrorCode::EmptyTemplate, s.name + ": template has no packets");
  return spoof_replay(tmpl, as_device, start, s.tag);
}

std::vector<TimedPacket> gen_upload_burst(const Trace& camera_template, const ThreatScenario& s, const Harness& h,
                                          Timestamp start) {
  if (s.targets.empty()) throw BenchError(ErrorCode::NoTargets, s.name + ": no target devices");
  if (camera_template.empty()) throw BenchError(ErrorCode::EmptyTemplate, s.name + ": template has no packets");
  std::vector<TimedPacket> out;
  out.reserve(camera_template.size() * s.targets.size());
  for (const auto& id : s.targets) {
    auto part = spoof_replay(camera_template, h.device(id), start, s.tag);
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  std::stable_sort(out.begin(), out.end(), [](const TimedPacket& a, const TimedPacket& b) {
    return a.packet.timestamp < b.packet.timestamp;
  });
  return out;
}

// ------------------------------------------------------- application layer

std::vector<TimedPacket> gen_app_layer(ThreatKind kind, const ThreatScenario& s, const Harness& h,
                                       const ThreatResources& res, Timestamp start) {
  if (s.targets.empty()) throw BenchError(ErrorCode::MissingParam, s.name + ": targets");
  const auto self = require_connected(h, s.targets.front(), ErrorCode::DeviceDisconnected);
  const auto& plan = h.options().plan;
  auto rng = scenario_rng(s, "app");
  const auto interval = from_seconds(s.number("interval"));
  const Duration gap = 10ms;
  std::vector<PacketRecord> out;
  Timestamp t = start;
  auto client = self;

  switch (kind) {
    case ThreatKind::WeakPassword: {
      if (res.wordlist.empty()) throw BenchError(ErrorCode::ResourceMissing, s.name + ": wordlist is empty");
      auto count = static_cast<std::size_t>(s.number("count"));
      if (count == 0 || count > res.wordlist.size()) count = res.wordlist.size();
      const Endpoint server{plan.safeguard_lan_mac, victim_address(s.text("victim")), 21};
      const auto user = s.text("user");
      for (std::size_t i = 0; i < count; ++i) {
        client.port = ephemeral(rng);
        tcp_session(out, t, client, server, rng, {"USER " + user + "\r\n", "PASS " + res.wordlist[i] + "\r\n"}, gap);
        t += interval;
      }
      break;
    }
    case ThreatKind::PiiExposure:
    case ThreatKind::Unencrypted: {
      const auto host = s.text("host");
      const auto count = static_cast<std::size_t>(s.number("count"));
      if (kind == ThreatKind::PiiExposure && res.pii.empty()) {
        throw BenchError(ErrorCode::ResourceMissing, s.name + ": PII profile is empty");
      }
      dns_lookup(out, t, self, plan, host, rng);
      t += 50ms;
      const Endpoint server{plan.safeguard_lan_mac, InternetModel::address_of(host), 80};
      for (std::size_t i = 0; i < count; ++i) {
        client.port = ephemeral(rng);
        std::string req;
        if (kind == ThreatKind::PiiExposure) {
          const auto body = "{\"name\":\"" + res.pii.name + "\",\"email\":\"" + res.pii.email + "\",\"password\":\"" +
                            res.pii.password + "\",\"seq\":" + std::to_string(i) + "}";
          req = "POST /api/v1/account HTTP/1.1\r\nHost: " + host +
                "\r\nContent-Type: application/json\r\nContent-Length: " + std::to_string(body.size()) + "\r\n\r\n" +
                body;
        } else {
          req = "GET /status?fw=2.4.1&uptime=" + std::to_string(3600 + i * 17) + " HTTP/1.1\r\nHost: " + host +
                "\r\nUser-Agent: iot-agent/1.0\r\nAccept: text/plain\r\n\r\n";
        }
        tcp_session(out, t, client, server, rng, {req}, gap);
        t += interval;
      }
      break;
    }
    case ThreatKind::MaliciousDest: {
      if (res.blocklist.empty()) throw BenchError(ErrorCode::ResourceMissing, s.name + ": blocklist is empty");
      auto limit = static_cast<std::size_t>(s.number("limit"));
      if (limit == 0 || limit > res.blocklist.size()) limit = res.blocklist.size();
      for (std::size_t i = 0; i < limit; ++i) {
        const auto& entry = res.blocklist[i];
        Ipv4Address addr;
        bool literal = true;
        try {
          addr = Ipv4Address::parse(entry);
        } catch (const BenchError&) {
          literal = false;
        }
        if (!literal) {
          dns_lookup(out, t, self, plan, entry, rng);
          addr = InternetModel::address_of(entry);
        }
        client.port = ephemeral(rng);
        const Endpoint server{plan.safeguard_lan_mac, addr, 443};
        const FiveTuple ft{ip_proto::kTcp, client.ip, client.port, server.ip, server.port};
        const auto seq = static_cast<std::uint32_t>(rng());
        out.push_back(make_tcp(t + gap, client, server, tcp_flag::kSyn, seq, 0));
        out.push_back(make_tcp(t + 2 * gap, client, server, tcp_flag::kAck, seq + 1, server_isn(ft) + 1));
        t += interval;
      }
      break;
    }
    case ThreatKind::Doh: {
      const auto count = static_cast<std::size_t>(s.number("count"));
      for (std::size_t i = 0; i < count; ++i) {
        dns_lookup(out, t, self, plan, "check" + std::to_string(i) + ".doh-probe.example", rng);
        t += interval;
      }
      break;
    }
    default:
      throw BenchError(ErrorCode::InvalidArgument,
                       std::string(to_string(kind)) + " is not an application-layer scenario");
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const PacketRecord& a, const PacketRecord& b) { return a.timestamp < b.timestamp; });
  return tagged(std::move(out), s.tag);
}

void configure_open_ports(Harness& h, const std::string& device_id, std::set<std::uint16_t> ports) {
  h.set_open_ports(device_id, std::move(ports));
}

// ------------------------------------------------------------------- plans

ThreatPlan plan_threat(const ThreatScenario& s, const Harness& h, ThreatResources& res, Timestamp start) {
  s.validate();
  ThreatPlan plan;
  plan.scenario = s;
  plan.start = start;
  auto& lan = plan.lan_side;
  auto& wan = plan.gateway_side;
  auto place = [&](std::vector<TimedPacket> packets, bool gateway_side) {
    (gateway_side ? wan : lan) = std::move(packets);
  };
  auto template_spec = [&]() {
    auto spec = s.text("template");
    if (spec.rfind("builtin:", 0) == 0 && std::count(spec.begin(), spec.end(), ':') == 1) {
      spec += ":" + s.text("duration");
    }
    return spec;
  };

  switch (s.kind) {
    case ThreatKind::SynFlood:
    case ThreatKind::UdpFlood:
    case ThreatKind::DnsFlood:
    case ThreatKind::HttpFlood:
    case ThreatKind::IpfragFlood: {
      static const std::map<ThreatKind, FloodClass> cls = {
          {ThreatKind::SynFlood, FloodClass::Syn}, {ThreatKind::UdpFlood, FloodClass::Udp},
          {ThreatKind::DnsFlood, FloodClass::Dns}, {ThreatKind::HttpFlood, FloodClass::Http},
          {ThreatKind::IpfragFlood, FloodClass::Ipfrag}};
      const bool gw = s.origin == ThreatOrigin::Internet;
      place(gen_flood(cls.at(s.kind), s, h, start), gw);
      if (gw) plan.port_forward = s.targets.front();
      break;
    }
    case ThreatKind::PortScan:
    case ThreatKind::OsScan: {
      const bool gw = s.origin == ThreatOrigin::Internet;
      place(gen_scan(s.kind == ThreatKind::OsScan ? ScanClass::Os : ScanClass::Port, s, h, start), gw);
      if (gw) plan.port_forward = s.targets.front();
      break;
    }
    case ThreatKind::Quarantine: {
      lan = gen_flood(FloodClass::Syn, s, h, start);
      plan.benign_tag = benign_tag_of(s.tag);
      const auto& d = h.device(s.targets.front());
      BurstContext ctx;
      ctx.self = Endpoint{d.mac, *d.assigned_ip, 0};
      ctx.gateway_mac = h.options().plan.safeguard_lan_mac;
      ctx.next_port = 40000;
      const auto& profile = builtin_profile(d.profile);
      ctx.dns_cache[profile.first_party_host] = Timestamp::max();
      auto rng = scenario_rng(s, "benign");
      Timestamp t = start + s.duration() + from_seconds(s.number("benign_delay"));
      const FlowSpec flow{profile.first_party_host, ip_proto::kTcp, 443, 100, 400, 2, 3, 1};
      for (int i = 0; i < static_cast<int>(s.number("benign_bursts")); ++i) {
        for (auto& p : generate_flow_burst(flow, ctx, t, 20ms, rng)) lan.push_back({std::move(p), plan.benign_tag});
        t += 10s;
      }
      break;
    }
    case ThreatKind::AnomOnOff: plan.events = gen_power_cycle(s, h, start); break;
    case ThreatKind::AnomTraffic: {
      const auto& tmpl = res.template_trace(template_spec(), s.seed);
      lan = gen_trace_swap(tmpl, h.device(s.targets.front()), s, start);
      break;
    }
    case ThreatKind::AnomUpload: {
      const auto& tmpl = res.template_trace(template_spec(), s.seed);
      lan = gen_upload_burst(tmpl, s, h, start);
      break;
    }
    case ThreatKind::OpenPort: {
      const auto& id = s.targets.front();
      plan.open_ports[id] = s.ports("ports");
      if (h.device(id).connected) plan.events.push_back({start, id, false});
      plan.events.push_back({start + from_seconds(s.number("downtime")), id, true});
      break;
    }
    case ThreatKind::WeakPassword:
    case ThreatKind::PiiExposure:
    case ThreatKind::Unencrypted:
    case ThreatKind::MaliciousDest:
    case ThreatKind::Doh: lan = gen_app_layer(s.kind, s, h, res, start); break;
  }

  plan.end = start;
  for (const auto* v : {&lan, &wan}) {
    if (!v->empty()) plan.end = std::max(plan.end, v->back().packet.timestamp);
  }
  for (const auto& e : plan.events) plan.end = std::max(plan.end, e.time);
  return plan;
}

void apply_plan(Harness& h, const ThreatPlan& plan) {
  for (const auto& [id, ports] : plan.open_ports) configure_open_ports(h, id, ports);
  if (plan.port_forward) h.set_port_forward(plan.port_forward);
  for (const auto& e : plan.events) h.schedule(e);
  if (!plan.lan_side.empty()) h.inject(InjectionPoint::IotLanSide, plan.lan_side);
  if (!plan.gateway_side.empty()) h.inject(InjectionPoint::GatewaySide, plan.gateway_side);
}

}  // namespace sgbench
