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

#include "sgbench/harness.hpp"

#include <algorithm>
#include <cstring>

#include "sgbench/dns.hpp"
#include "sgbench/pcap.hpp"

namespace sgbench {

using namespace std::chrono_literals;

namespace {

const MacAddress kMdnsMac{{0x01, 0x00, 0x5e, 0x00, 0x00, 0xfb}};
const MacAddress kSsdpMac{{0x01, 0x00, 0x5e, 0x7f, 0xff, 0xfa}};
constexpr Ipv4Address kMdnsGroup{224, 0, 0, 251};
constexpr Ipv4Address kSsdpGroup{239, 255, 255, 250};
constexpr Ipv4Address kBroadcast{255, 255, 255, 255};
constexpr Duration kTcpNatTimeout = 300s;
constexpr Duration kOtherNatTimeout = 60s;
constexpr Duration kNatSweep = 10s;

bool is_icmp_error(const PacketRecord& p) {
  return p.is_icmp() && (p.icmp->type == icmp_type::kUnreachable || p.icmp->type == 11);
}

/// Flow of the datagram quoted inside an ICMP error (IPv4 header + 8 bytes).
std::optional<FiveTuple> quoted_flow(const PacketRecord& p) {
  const auto& b = p.payload;
  if (b.size() < 28 || (b[0] >> 4) != 4) return std::nullopt;
  const std::size_t ihl = (b[0] & 0x0f) * 4u;
  if (ihl != 20) return std::nullopt;
  FiveTuple t;
  t.protocol = b[9];
  t.src_ip = Ipv4Address((std::uint32_t{b[12]} << 24) | (std::uint32_t{b[13]} << 16) | (std::uint32_t{b[14]} << 8) | b[15]);
  t.dst_ip = Ipv4Address((std::uint32_t{b[16]} << 24) | (std::uint32_t{b[17]} << 16) | (std::uint32_t{b[18]} << 8) | b[19]);
  t.src_port = static_cast<std::uint16_t>((b[20] << 8) | b[21]);
  t.dst_port = static_cast<std::uint16_t>((b[22] << 8) | b[23]);
  return t;
}

void rewrite_quoted(PacketRecord& p, const FiveTuple& t) {
  auto& b = p.payload;
  auto put32 = [&](std::size_t off, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b[off + i] = static_cast<std::uint8_t>(v >> (24 - 8 * i));
  };
  put32(12, t.src_ip.value);
  put32(16, t.dst_ip.value);
  b[20] = static_cast<std::uint8_t>(t.src_port >> 8);
  b[21] = static_cast<std::uint8_t>(t.src_port);
  b[22] = static_cast<std::uint8_t>(t.dst_port >> 8);
  b[23] = static_cast<std::uint8_t>(t.dst_port);
  b[10] = 0;
  b[11] = 0;
  std::uint32_t sum = 0;
  for (int i = 0; i < 20; i += 2) sum += static_cast<std::uint32_t>((b[i] << 8) | b[i + 1]);
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  sum = ~sum & 0xffff;
  b[10] = static_cast<std::uint8_t>(sum >> 8);
  b[11] = static_cast<std::uint8_t>(sum);
}

std::vector<std::uint8_t> quote_of(const PacketRecord& p) {
  auto frame = encode_frame(p);
  const std::size_t n = std::min<std::size_t>(frame.size() - 14, 28);
  return {frame.begin() + 14, frame.begin() + 14 + static_cast<std::ptrdiff_t>(n)};
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

}  // namespace

// ---------------------------------------------------------------- DHCP / SSDP

namespace dhcp {

std::vector<std::uint8_t> encode(const Message& m) {
  std::vector<std::uint8_t> b(236, 0);
  b[0] = m.op;
  b[1] = 1;
  b[2] = 6;
  for (int i = 0; i < 4; ++i) b[4 + i] = static_cast<std::uint8_t>(m.xid >> (24 - 8 * i));
  for (int i = 0; i < 4; ++i) b[16 + i] = static_cast<std::uint8_t>(m.yiaddr.value >> (24 - 8 * i));
  std::copy(m.chaddr.bytes.begin(), m.chaddr.bytes.end(), b.begin() + 28);
  const std::uint8_t cookie[4] = {99, 130, 83, 99};
  for (auto x : cookie) b.push_back(x);
  auto opt = [&](std::uint8_t code, std::span<const std::uint8_t> data) {
    b.push_back(code);
    b.push_back(static_cast<std::uint8_t>(data.size()));
    for (auto x : data) b.push_back(x);
  };
  auto opt_ip = [&](std::uint8_t code, Ipv4Address ip) {
    const std::uint8_t v[4] = {static_cast<std::uint8_t>(ip.value >> 24), static_cast<std::uint8_t>(ip.value >> 16),
                               static_cast<std::uint8_t>(ip.value >> 8), static_cast<std::uint8_t>(ip.value)};
    opt(code, v);
  };
  const std::uint8_t type[1] = {m.type};
  opt(53, type);
  if (m.requested_ip) opt_ip(50, *m.requested_ip);
  if (m.server_id) opt_ip(54, *m.server_id);
  if (m.hostname) opt(12, to_bytes(*m.hostname));
  if (m.vendor_class) opt(60, to_bytes(*m.vendor_class));
  if (m.parameter_list) opt(55, *m.parameter_list);
  b.push_back(255);
  return b;
}

std::optional<Message> decode(std::span<const std::uint8_t> b) {
  if (b.size() < 241 || b[236] != 99 || b[237] != 130 || b[238] != 83 || b[239] != 99) return std::nullopt;
  Message m;
  m.op = b[0];
  m.xid = (std::uint32_t{b[4]} << 24) | (std::uint32_t{b[5]} << 16) | (std::uint32_t{b[6]} << 8) | b[7];
  m.yiaddr = Ipv4Address((std::uint32_t{b[16]} << 24) | (std::uint32_t{b[17]} << 16) | (std::uint32_t{b[18]} << 8) | b[19]);
  std::copy_n(b.begin() + 28, 6, m.chaddr.bytes.begin());
  std::size_t i = 240;
  bool have_type = false;
  while (i < b.size()) {
    const auto code = b[i];
    if (code == 255) break;
    if (code == 0) {
      ++i;
      continue;
    }
    if (i + 1 >= b.size()) return std::nullopt;
    const std::size_t len = b[i + 1];
    if (i + 2 + len > b.size()) return std::nullopt;
    const auto data = b.subspan(i + 2, len);
    auto as_ip = [&]() {
      return Ipv4Address((std::uint32_t{data[0]} << 24) | (std::uint32_t{data[1]} << 16) |
                         (std::uint32_t{data[2]} << 8) | data[3]);
    };
    switch (code) {
      case 53:
        if (len == 1) {
          m.type = data[0];
          have_type = true;
        }
        break;
      case 12: m.hostname = std::string(data.begin(), data.end()); break;
      case 60: m.vendor_class = std::string(data.begin(), data.end()); break;
      case 55: m.parameter_list = std::vector<std::uint8_t>(data.begin(), data.end()); break;
      case 50:
        if (len == 4) m.requested_ip = as_ip();
        break;
      case 54:
        if (len == 4) m.server_id = as_ip();
        break;
      default: break;
    }
    i += 2 + len;
  }
  if (!have_type) return std::nullopt;
  return m;
}

}  // namespace dhcp

std::vector<std::uint8_t> ssdp_notify(std::string_view device_type, std::string_view uuid) {
  std::string s = "NOTIFY * HTTP/1.1\r\nHOST: 239.255.255.250:1900\r\nCACHE-CONTROL: max-age=1800\r\n";
  s += "NT: " + std::string(device_type) + "\r\nNTS: ssdp:alive\r\n";
  s += "USN: uuid:" + std::string(uuid) + "::" + std::string(device_type) + "\r\n\r\n";
  return to_bytes(s);
}

std::optional<std::string> ssdp_device_type(std::string_view payload) {
  if (!starts_with(payload, "NOTIFY ")) return std::nullopt;
  const auto pos = payload.find("\r\nNT: ");
  if (pos == std::string_view::npos) return std::nullopt;
  const auto start = pos + 6;
  const auto end = payload.find("\r\n", start);
  if (end == std::string_view::npos) return std::nullopt;
  return std::string(payload.substr(start, end - start));
}

std::vector<TimedPacket> spoof_replay(const Trace& tmpl, const DeviceDescriptor& as_device, Timestamp time_base,
                                      std::uint32_t scenario_tag) {
  if (!as_device.connected || !as_device.assigned_ip) {
    throw BenchError(ErrorCode::DeviceDisconnected, as_device.id + " is not connected");
  }
  std::vector<TimedPacket> out;
  if (tmpl.empty()) return out;
  out.reserve(tmpl.size());
  const auto t0 = tmpl.packets.front().timestamp;
  for (const auto& p : tmpl.packets) {
    TimedPacket tp{p, scenario_tag};
    tp.packet.timestamp = time_base + (p.timestamp - t0);
    tp.packet.src_mac = as_device.mac;
    tp.packet.src_ip = *as_device.assigned_ip;
    tp.packet.capture_point = CapturePoint::IotBridge;
    out.push_back(std::move(tp));
  }
  return out;
}

// ------------------------------------------------------------------ Harness

Harness::Harness(std::vector<DeviceDescriptor> devices, std::unique_ptr<SafeguardAdapter> adapter,
                 std::uint64_t seed, HarnessOptions options)
    : devices_(std::move(devices)), adapter_(std::move(adapter)), seed_(seed), options_(options) {
  if (!adapter_) throw BenchError(ErrorCode::InvalidArgument, "harness needs a safeguard adapter");
  if (options_.tick_interval <= Duration::zero()) {
    throw BenchError(ErrorCode::InvalidArgument, "tick interval must be positive");
  }
  std::set<MacAddress> macs;
  for (auto& d : devices_) {
    if (!macs.insert(d.mac).second) throw BenchError(ErrorCode::DuplicateMac, d.mac.to_string());
    d.connected = false;
    d.assigned_ip.reset();
  }
  device_state_.resize(devices_.size());
  std::vector<AdapterDevice> table;
  for (std::size_t i = 0; i < devices_.size(); ++i) {
    auto& st = device_state_[i];
    st.rng.seed(seed_ ^ stable_hash(devices_[i].id));
    st.ctx.self = Endpoint{devices_[i].mac, Ipv4Address{}, 0};
    st.ctx.gateway_mac = options_.plan.safeguard_lan_mac;
    st.ctx.next_port = static_cast<std::uint16_t>(49152 + (stable_hash(devices_[i].id) % 4096));
    table.push_back({devices_[i].id, devices_[i].mac});
  }
  adapter_->attach(table, options_.plan);
  next_tick_ = options_.tick_interval;
}

Harness build_topology(std::vector<DeviceDescriptor> devices, std::unique_ptr<SafeguardAdapter> adapter,
                       std::uint64_t seed, HarnessOptions options) {
  return Harness(std::move(devices), std::move(adapter), seed, options);
}

void Harness::replace_adapter(std::unique_ptr<SafeguardAdapter> adapter) {
  if (!adapter) throw BenchError(ErrorCode::InvalidArgument, "harness needs a safeguard adapter");
  adapter_ = std::move(adapter);
  std::vector<AdapterDevice> table;
  for (const auto& d : devices_) table.push_back({d.id, d.mac});
  adapter_->attach(table, options_.plan);
}

std::size_t Harness::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < devices_.size(); ++i) {
    if (devices_[i].id == id) return i;
  }
  throw BenchError(ErrorCode::UnknownDevice, id);
}

const DeviceDescriptor& Harness::device(const std::string& id) const { return devices_[index_of(id)]; }

const DeviceDescriptor* Harness::device_by_mac(const MacAddress& mac) const {
  for (const auto& d : devices_) {
    if (d.mac == mac) return &d;
  }
  return nullptr;
}

const DeviceDescriptor* Harness::device_by_ip(Ipv4Address ip) const {
  auto it = ip_to_device_.find(ip.value);
  return it == ip_to_device_.end() ? nullptr : &devices_[it->second];
}

Endpoint Harness::endpoint_of(const std::string& id, std::uint16_t port) const {
  const auto& d = device(id);
  return Endpoint{d.mac, d.assigned_ip.value_or(Ipv4Address{}), port};
}

void Harness::set_open_ports(const std::string& id, std::set<std::uint16_t> ports) {
  devices_[index_of(id)].open_ports = std::move(ports);
}

void Harness::set_port_forward(std::optional<std::string> device_id) {
  port_forward_.reset();
  if (device_id) port_forward_ = index_of(*device_id);
}

Ipv4Address Harness::connect_device(const std::string& id) {
  const auto i = index_of(id);
  if (devices_[i].connected) throw BenchError(ErrorCode::DeviceConnected, id);
  connect_at(i, clock_);
  return *devices_[i].assigned_ip;
}

void Harness::disconnect_device(const std::string& id) {
  const auto i = index_of(id);
  auto& d = devices_[i];
  if (!d.connected) throw BenchError(ErrorCode::DeviceDisconnected, id);
  d.connected = false;
  if (d.assigned_ip) ip_to_device_.erase(d.assigned_ip->value);
  d.assigned_ip.reset();
  ++device_state_[i].generation;
}

void Harness::connect_at(std::size_t i, Timestamp t) {
  auto& d = devices_[i];
  auto& st = device_state_[i];
  const auto& plan = options_.plan;
  Ipv4Address ip;
  if (auto it = leases_.find(d.mac); it != leases_.end()) {
    ip = it->second;
  } else {
    std::set<std::uint32_t> used;
    for (const auto& [_, leased] : leases_) used.insert(leased.value);
    std::optional<Ipv4Address> free;
    for (auto v = plan.pool_first.value; v <= plan.pool_last.value; ++v) {
      if (!used.contains(v)) {
        free = Ipv4Address(v);
        break;
      }
    }
    if (!free) throw BenchError(ErrorCode::PoolExhausted, "no address left for " + d.id);
    ip = *free;
    leases_[d.mac] = ip;
  }
  d.connected = true;
  d.assigned_ip = ip;
  ip_to_device_[ip.value] = i;
  ++st.generation;
  st.ctx.self.ip = ip;
  st.ctx.dns_cache.clear();

  const auto xid = static_cast<std::uint32_t>(st.rng());
  const Endpoint client_any{d.mac, Ipv4Address{}, 68};
  const Endpoint all{MacAddress::broadcast(), kBroadcast, 67};
  const Endpoint server{plan.safeguard_lan_mac, plan.safeguard_lan_ip, 67};
  const Endpoint to_client{d.mac, kBroadcast, 68};
  const GroundTruth dev{GroundTruth::Origin::Device, d.id, 0};
  const GroundTruth sys{GroundTruth::Origin::Harness, {}, 0};

  dhcp::Message m;
  m.xid = xid;
  m.chaddr = d.mac;
  m.hostname = d.facts.dhcp_hostname;
  m.parameter_list = d.facts.dhcp_options.value_or(std::vector<std::uint8_t>{1, 3, 6, 15, 28, 51, 58, 59});
  m.vendor_class = d.facts.dhcp_vendor_class;
  m.type = dhcp::kDiscover;
  push(t, PacketEvent{Stage::LanIngress, make_udp(t, client_any, all, dhcp::encode(m)), dev});

  dhcp::Message reply;
  reply.op = 2;
  reply.xid = xid;
  reply.chaddr = d.mac;
  reply.yiaddr = ip;
  reply.server_id = plan.safeguard_lan_ip;
  reply.type = dhcp::kOffer;
  push(t + 10ms, PacketEvent{Stage::LanEgress, make_udp(t + 10ms, server, to_client, dhcp::encode(reply)), sys});

  m.type = dhcp::kRequest;
  m.requested_ip = ip;
  m.server_id = plan.safeguard_lan_ip;
  push(t + 20ms, PacketEvent{Stage::LanIngress, make_udp(t + 20ms, client_any, all, dhcp::encode(m)), dev});

  reply.type = dhcp::kAck;
  push(t + 30ms, PacketEvent{Stage::LanEgress, make_udp(t + 30ms, server, to_client, dhcp::encode(reply)), sys});

  const Endpoint self{d.mac, ip, 0};
  if (!d.facts.mdns_services.empty()) {
    dns::Message ann;
    ann.response = true;
    for (const auto& svc : d.facts.mdns_services) {
      dns::ResourceRecord rr;
      rr.name = svc + ".local";
      rr.type = dns::kTypePtr;
      rr.ttl = 4500;
      rr.target = d.id + "." + svc + ".local";
      ann.answers.push_back(rr);
    }
    auto src = self;
    src.port = 5353;
    push(t + 100ms, PacketEvent{Stage::LanIngress,
                                make_udp(t + 100ms, src, Endpoint{kMdnsMac, kMdnsGroup, 5353}, dns::encode(ann)), dev});
  }
  if (d.facts.upnp_device_type) {
    auto src = self;
    src.port = 1900;
    const auto uuid = std::to_string(stable_hash(d.id));
    push(t + 150ms,
         PacketEvent{Stage::LanIngress,
                     make_udp(t + 150ms, src, Endpoint{kSsdpMac, kSsdpGroup, 1900}, ssdp_notify(*d.facts.upnp_device_type, uuid)),
                     dev});
  }
  if (options_.boot_burst) {
    const auto& profile = builtin_profile(d.profile);
    for (auto& p : generate_boot_burst(profile, st.ctx, t + 500ms, st.rng)) {
      const auto pt = p.timestamp;
      push(pt, PacketEvent{Stage::LanIngress, std::move(p), dev});
    }
  }
  if (options_.background_traffic) schedule_activity(i, t + 1s);
}

void Harness::schedule_activity(std::size_t i, Timestamp after) {
  auto& st = device_state_[i];
  const auto& profile = builtin_profile(devices_[i].profile);
  const double jitter = 0.5 + uniform_real(st.rng);
  const auto gap = Duration{static_cast<std::int64_t>(static_cast<double>(profile.mean_interval.count()) * jitter *
                                                      options_.background_interval_scale)};
  push(after + gap, ActivityEvent{i, st.generation});
}

void Harness::handle_activity(const ActivityEvent& ev) {
  auto& st = device_state_[ev.device];
  const auto& d = devices_[ev.device];
  if (st.generation != ev.generation || !d.connected) return;
  const auto& profile = builtin_profile(d.profile);
  const GroundTruth dev{GroundTruth::Origin::Device, d.id, 0};
  for (auto& p : generate_burst(profile, st.ctx, clock_, st.rng)) {
    const auto pt = p.timestamp;
    push(pt, PacketEvent{Stage::LanIngress, std::move(p), dev});
  }
  schedule_activity(ev.device, clock_);
}

void Harness::schedule(const DeviceEvent& event) {
  if (event.time < clock_) throw BenchError(ErrorCode::TimeInPast, "device event before current clock");
  index_of(event.device_id);
  push(event.time, event);
}

void Harness::handle_device_event(const DeviceEvent& ev) {
  const auto i = index_of(ev.device_id);
  if (ev.connect) {
    if (!devices_[i].connected) connect_at(i, clock_);
  } else if (devices_[i].connected) {
    disconnect_device(ev.device_id);
  }
}

void Harness::inject(InjectionPoint point, std::vector<TimedPacket> packets) {
  for (const auto& tp : packets) {
    if (tp.packet.timestamp < clock_) throw BenchError(ErrorCode::TimeInPast, "packet before current clock");
  }
  for (auto& tp : packets) {
    GroundTruth truth;
    truth.scenario_tag = tp.scenario_tag;
    Stage stage;
    if (point == InjectionPoint::IotLanSide) {
      stage = Stage::LanIngress;
      if (const auto* d = device_by_mac(tp.packet.src_mac)) {
        truth.origin = GroundTruth::Origin::Device;
        truth.device_id = d->id;
      }
    } else {
      stage = Stage::WanIngress;
      truth.origin = GroundTruth::Origin::Internet;
    }
    const auto t = tp.packet.timestamp;
    push(t, PacketEvent{stage, std::move(tp.packet), std::move(truth)});
  }
}

void Harness::inject(InjectionPoint point, const std::vector<PacketRecord>& packets, std::uint32_t scenario_tag) {
  std::vector<TimedPacket> v;
  v.reserve(packets.size());
  for (const auto& p : packets) v.push_back({p, scenario_tag});
  inject(point, std::move(v));
}

void Harness::push(Timestamp t, std::variant<PacketEvent, DeviceEvent, ActivityEvent> body) {
  queue_.push(Event{t, seq_++, std::move(body)});
}

void Harness::push_packet(Stage stage, PacketRecord packet, GroundTruth truth) {
  const auto t = packet.timestamp;
  push(t, PacketEvent{stage, std::move(packet), std::move(truth)});
}

std::size_t Harness::advance_clock(Duration dt) {
  if (dt < Duration::zero()) throw BenchError(ErrorCode::InvalidArgument, "negative clock advance");
  return run_until(clock_ + dt);
}

std::size_t Harness::run_until(Timestamp end) {
  std::size_t processed = 0;
  while (true) {
    const bool have_event = !queue_.empty();
    const Timestamp te = have_event ? queue_.top().time : Timestamp::max();
    if (next_tick_ <= te && next_tick_ <= end) {
      clock_ = next_tick_;
      tick(clock_);
      next_tick_ += options_.tick_interval;
      continue;
    }
    if (!have_event || te > end) break;
    Event ev = queue_.top();
    queue_.pop();
    clock_ = std::max(clock_, ev.time);
    dispatch(ev);
    ++processed;
  }
  clock_ = std::max(clock_, end);
  stats_.events += processed;
  return processed;
}

void Harness::dispatch(Event& ev) {
  if (auto* p = std::get_if<PacketEvent>(&ev.body)) {
    handle_packet(*p);
  } else if (auto* d = std::get_if<DeviceEvent>(&ev.body)) {
    handle_device_event(*d);
  } else {
    handle_activity(std::get<ActivityEvent>(ev.body));
  }
}

void Harness::tick(Timestamp t) {
  std::vector<Emission> out;
  try {
    out = adapter_->on_tick(t);
  } catch (const std::exception&) {
    ++stats_.adapter_faults;
  }
  const GroundTruth sg{GroundTruth::Origin::Safeguard, {}, 0};
  for (auto& e : out) {
    e.packet.timestamp = std::max(e.packet.timestamp, t);
    forward(e.to_wan ? Stage::WanEgress : Stage::LanEgress, std::move(e.packet), sg);
  }
  if (t.count() % kNatSweep.count() == 0) expire_nat(t);
}

void Harness::handle_packet(PacketEvent& ev) {
  switch (ev.stage) {
    case Stage::LanIngress: lan_ingress(ev.packet, ev.truth); break;
    case Stage::LanEgress: lan_egress(ev.packet, ev.truth); break;
    case Stage::WanIngress: wan_ingress(ev.packet, ev.truth); break;
    case Stage::WanEgress: wan_egress(ev.packet, ev.truth); break;
  }
}

void Harness::forward(Stage stage, PacketRecord p, const GroundTruth& truth) {
  if (options_.hop_latency > Duration::zero()) {
    p.timestamp += options_.hop_latency;
    push_packet(stage, std::move(p), truth);
    return;
  }
  switch (stage) {
    case Stage::LanIngress: lan_ingress(p, truth); break;
    case Stage::LanEgress: lan_egress(p, truth); break;
    case Stage::WanIngress: wan_ingress(p, truth); break;
    case Stage::WanEgress: wan_egress(p, truth); break;
  }
}

void Harness::record(CapturePoint point, const PacketRecord& p, const GroundTruth& truth) {
  if (point == CapturePoint::Gateway) {
    ++stats_.gateway_packets;
  } else {
    ++stats_.bridge_packets;
  }
  if (!options_.record_captures) return;
  auto& buf = point == CapturePoint::Gateway ? gateway_capture_ : bridge_capture_;
  auto& tr = point == CapturePoint::Gateway ? gateway_truth_ : bridge_truth_;
  buf.push_back(p);
  buf.back().capture_point = point;
  tr.push_back(truth);
}

ForwardDecision Harness::call_adapter(const PacketRecord& p, Direction dir) {
  try {
    return adapter_->process(p, dir);
  } catch (const std::exception&) {
    ++stats_.adapter_faults;
    return ForwardDecision::forward();
  }
}

void Harness::lan_ingress(PacketRecord& p, const GroundTruth& truth) {
  record(CapturePoint::IotBridge, p, truth);
  const auto& plan = options_.plan;
  if (!p.is_ipv4()) {
    call_adapter(p, Direction::LanLocal);
    return;
  }
  const bool local = p.dst_ip.is_broadcast() || p.dst_ip.is_multicast() || p.dst_mac.is_multicast() ||
                     plan.on_iot_lan(p.dst_ip);
  if (local) {
    if (call_adapter(p, Direction::LanLocal).verdict == ForwardDecision::Verdict::Drop) {
      ++stats_.dropped;
      return;
    }
    if (p.dst_ip != plan.safeguard_lan_ip) {
      if (auto it = ip_to_device_.find(p.dst_ip.value); it != ip_to_device_.end()) respond_device(it->second, p, truth);
    }
    return;
  }
  auto decision = call_adapter(p, Direction::LanToWan);
  if (decision.verdict == ForwardDecision::Verdict::Drop) {
    ++stats_.dropped;
    return;
  }
  if (decision.verdict == ForwardDecision::Verdict::Rewrite) {
    GroundTruth sg{GroundTruth::Origin::Safeguard, {}, truth.scenario_tag};
    for (auto& q : decision.packets) forward(Stage::WanEgress, std::move(q), sg);
    return;
  }
  if (!translate_outbound(p)) {
    ++stats_.dropped;
    return;
  }
  p.src_mac = plan.safeguard_wan_mac;
  p.dst_mac = plan.gateway_mac;
  forward(Stage::WanEgress, std::move(p), truth);
}

void Harness::wan_egress(PacketRecord& p, const GroundTruth& truth) {
  record(CapturePoint::Gateway, p, truth);
  respond_internet(p, truth);
}

void Harness::wan_ingress(PacketRecord& p, const GroundTruth& truth) {
  record(CapturePoint::Gateway, p, truth);
  const auto& plan = options_.plan;
  if (p.dst_ip != plan.safeguard_wan_ip) return;
  PacketRecord view = p;
  const bool translated = translate_inbound(view);
  auto decision = call_adapter(view, Direction::WanToLan);
  if (decision.verdict == ForwardDecision::Verdict::Drop) {
    ++stats_.dropped;
    return;
  }
  if (decision.verdict == ForwardDecision::Verdict::Rewrite) {
    GroundTruth sg{GroundTruth::Origin::Safeguard, {}, truth.scenario_tag};
    for (auto& q : decision.packets) forward(Stage::LanEgress, std::move(q), sg);
    return;
  }
  if (!translated) {
    ++stats_.dropped;
    return;
  }
  view.src_mac = plan.safeguard_lan_mac;
  if (const auto* d = device_by_ip(view.dst_ip)) view.dst_mac = d->mac;
  forward(Stage::LanEgress, std::move(view), truth);
}

void Harness::lan_egress(PacketRecord& p, const GroundTruth& truth) {
  record(CapturePoint::IotBridge, p, truth);
  if (truth.origin == GroundTruth::Origin::Harness && p.src_ip == options_.plan.safeguard_lan_ip) {
    call_adapter(p, Direction::LanLocal);
  }
  if (auto it = ip_to_device_.find(p.dst_ip.value); it != ip_to_device_.end()) {
    respond_device(it->second, p, truth);
  }
}

// ---------------------------------------------------------------------- NAT

FiveTuple Harness::allocate_wan(const FiveTuple& lan) {
  FiveTuple wan = lan;
  wan.src_ip = options_.plan.safeguard_wan_ip;
  if (lan.protocol == ip_proto::kIcmp) return wan;
  std::uint32_t port = lan.src_port;
  for (int attempts = 0; attempts < 65536; ++attempts) {
    wan.src_port = static_cast<std::uint16_t>(port);
    if (!nat_reverse_.contains(wan)) return wan;
    port = port >= 65535 ? 1024 : port + 1;
  }
  throw BenchError(ErrorCode::PoolExhausted, "NAT port space exhausted");
}

bool Harness::translate_outbound(PacketRecord& p) {
  const auto wan_ip = options_.plan.safeguard_wan_ip;
  if (p.frag_offset != 0) {
    p.src_ip = wan_ip;
    return true;
  }
  if (is_icmp_error(p)) {
    auto inner = quoted_flow(p);
    if (!inner) return false;
    auto it = nat_.find(inner->reversed());
    if (it == nat_.end()) return false;
    it->second.last_used = p.timestamp;
    auto rewritten = *inner;
    rewritten.dst_ip = it->second.wan.src_ip;
    rewritten.dst_port = it->second.wan.src_port;
    rewrite_quoted(p, rewritten);
    p.src_ip = wan_ip;
    return true;
  }
  const auto lan = flow_of(p);
  auto it = nat_.find(lan);
  if (it == nat_.end()) {
    FiveTuple wan;
    try {
      wan = allocate_wan(lan);
    } catch (const BenchError&) {
      return false;
    }
    it = nat_.emplace(lan, NatEntry{wan, p.timestamp, p.timestamp}).first;
    nat_reverse_.emplace(wan, lan);
  }
  it->second.last_used = p.timestamp;
  const auto& wan = it->second.wan;
  p.src_ip = wan.src_ip;
  if (p.src_port) p.src_port = wan.src_port;
  return true;
}

bool Harness::translate_inbound(PacketRecord& p) {
  if (p.frag_offset != 0) {
    if (!port_forward_ || !devices_[*port_forward_].assigned_ip) return false;
    p.dst_ip = *devices_[*port_forward_].assigned_ip;
    return true;
  }
  if (is_icmp_error(p)) {
    auto inner = quoted_flow(p);
    if (!inner) return false;
    auto it = nat_reverse_.find(*inner);
    if (it == nat_reverse_.end()) return false;
    const auto lan = it->second;
    nat_[lan].last_used = p.timestamp;
    auto rewritten = *inner;
    rewritten.src_ip = lan.src_ip;
    rewritten.src_port = lan.src_port;
    rewrite_quoted(p, rewritten);
    p.dst_ip = lan.src_ip;
    return true;
  }
  const auto wan = flow_of(p).reversed();
  auto it = nat_reverse_.find(wan);
  if (it == nat_reverse_.end()) {
    if (!port_forward_ || !devices_[*port_forward_].assigned_ip) return false;
    FiveTuple lan = wan;
    lan.src_ip = *devices_[*port_forward_].assigned_ip;
    if (nat_.contains(lan)) return false;
    nat_.emplace(lan, NatEntry{wan, p.timestamp, p.timestamp});
    it = nat_reverse_.emplace(wan, lan).first;
  }
  const auto lan = it->second;
  nat_[lan].last_used = p.timestamp;
  p.dst_ip = lan.src_ip;
  if (p.dst_port) p.dst_port = lan.src_port;
  return true;
}

void Harness::expire_nat(Timestamp now) {
  for (auto it = nat_.begin(); it != nat_.end();) {
    const auto timeout = it->first.protocol == ip_proto::kTcp ? kTcpNatTimeout : kOtherNatTimeout;
    if (now - it->second.last_used > timeout) {
      if (options_.record_captures) {
        nat_history_.push_back({it->first, it->second.wan, it->second.first_used, it->second.last_used});
      }
      nat_reverse_.erase(it->second.wan);
      it = nat_.erase(it);
    } else {
      ++it;
    }
  }
}

NatLog Harness::nat_log() const {
  NatLog log = nat_history_;
  std::vector<NatBinding> active;
  for (const auto& [lan, e] : nat_) active.push_back({lan, e.wan, e.first_used, e.last_used});
  std::sort(active.begin(), active.end(), [](const NatBinding& a, const NatBinding& b) {
    return a.first_used != b.first_used ? a.first_used < b.first_used : a.lan < b.lan;
  });
  log.insert(log.end(), active.begin(), active.end());
  return log;
}

bool Harness::nat_is_bijective() const {
  if (nat_.size() != nat_reverse_.size()) return false;
  for (const auto& [lan, e] : nat_) {
    auto it = nat_reverse_.find(e.wan);
    if (it == nat_reverse_.end() || it->second != lan) return false;
  }
  return true;
}

// --------------------------------------------------------------- responders

void Harness::respond_internet(const PacketRecord& p, const GroundTruth& truth) {
  if (!p.is_ipv4() || p.is_fragment()) return;
  const auto& plan = options_.plan;
  if (plan.on_lan(p.dst_ip)) return;
  const auto behavior = InternetModel::behavior_of(p.dst_ip);
  const GroundTruth inet{GroundTruth::Origin::Internet, {}, truth.scenario_tag};
  const Endpoint server{plan.gateway_mac, p.dst_ip, p.dst_port.value_or(0)};
  const Endpoint client{plan.safeguard_wan_mac, p.src_ip, p.src_port.value_or(0)};
  const auto t = p.timestamp;
  auto reply = [&](PacketRecord r) { push_packet(Stage::WanIngress, std::move(r), inet); };

  if (p.is_tcp()) {
    const auto& tcp = *p.tcp;
    const auto flow = flow_of(p);
    const auto isn = server_isn(flow);
    if (tcp.has(tcp_flag::kSyn) && !tcp.has(tcp_flag::kAck)) {
      if (behavior.tcp_open.contains(*p.dst_port)) {
        reply(make_tcp(t, server, client, tcp_flag::kSyn | tcp_flag::kAck, isn, tcp.seq + 1));
      } else {
        reply(make_tcp(t, server, client, tcp_flag::kRst | tcp_flag::kAck, 0, tcp.seq + 1));
      }
      return;
    }
    if (p.payload.empty()) return;
    const auto ack = tcp.seq + static_cast<std::uint32_t>(p.payload.size());
    const auto text = p.payload_view();
    std::vector<std::uint8_t> body;
    if (behavior.doh_server && p.dst_port == 443) {
      auto inner = doh_unwrap(p.payload);
      if (!inner) return;
      auto q = dns::decode(*inner);
      if (!q || q->questions.empty()) return;
      const Ipv4Address addr = InternetModel::address_of(q->questions.front().name);
      const auto answer = dns::encode(dns::make_a_response(*q, std::span(&addr, 1)));
      body = doh_wrap(answer, stable_hash(text) ^ ++response_nonce_);
    } else if (starts_with(text, "GET ") || starts_with(text, "POST ")) {
      body = to_bytes("HTTP/1.1 200 OK\r\nContent-Length: 2\r\nConnection: close\r\n\r\nok");
    } else if (p.dst_port == 21 && starts_with(text, "USER ")) {
      body = to_bytes("331 Please specify the password.\r\n");
    } else if (p.dst_port == 21 && starts_with(text, "PASS ")) {
      body = to_bytes("530 Login incorrect.\r\n");
    } else {
      return;
    }
    reply(make_tcp(t, server, client, tcp_flag::kPsh | tcp_flag::kAck, isn + 1, ack, body));
    return;
  }
  if (p.is_udp()) {
    const auto dport = *p.dst_port;
    if (dport == 53 && behavior.dns_server) {
      auto q = dns::decode(p.payload);
      if (!q || q->response || q->questions.empty()) return;
      const Ipv4Address addr = InternetModel::address_of(q->questions.front().name);
      reply(make_udp(t, server, client, dns::encode(dns::make_a_response(*q, std::span(&addr, 1)))));
      return;
    }
    if (dport == 123 && behavior.ntp_server) {
      std::vector<std::uint8_t> ntp(48, 0);
      ntp[0] = 0x24;
      ntp[1] = 2;
      reply(make_udp(t, server, client, ntp));
      return;
    }
    if (behavior.udp_silent.contains(dport)) return;
    reply(make_icmp(t, Endpoint{plan.gateway_mac, p.dst_ip, 0}, Endpoint{plan.safeguard_wan_mac, p.src_ip, 0},
                    icmp_type::kUnreachable, icmp_type::kPortUnreachableCode, 0, quote_of(p)));
    return;
  }
  if (p.is_icmp() && p.icmp->type == icmp_type::kEchoRequest) {
    reply(make_icmp(t, Endpoint{plan.gateway_mac, p.dst_ip, 0}, Endpoint{plan.safeguard_wan_mac, p.src_ip, 0},
                    icmp_type::kEchoReply, 0, p.icmp->rest, p.payload));
  }
}

void Harness::respond_device(std::size_t i, const PacketRecord& p, const GroundTruth& truth) {
  const auto& d = devices_[i];
  if (!d.connected || !p.is_ipv4() || p.is_fragment()) return;
  const GroundTruth dev{GroundTruth::Origin::Device, d.id, truth.scenario_tag};
  const Endpoint self{d.mac, *d.assigned_ip, p.dst_port.value_or(0)};
  const Endpoint peer{p.src_mac, p.src_ip, p.src_port.value_or(0)};
  const auto t = p.timestamp;
  auto reply = [&](PacketRecord r) { push_packet(Stage::LanIngress, std::move(r), dev); };

  if (p.is_tcp()) {
    const auto& tcp = *p.tcp;
    if (tcp.has(tcp_flag::kAck) || tcp.has(tcp_flag::kRst)) return;
    const bool open = d.open_ports.contains(*p.dst_port);
    if (tcp.has(tcp_flag::kSyn)) {
      if (open) {
        reply(make_tcp(t, self, peer, tcp_flag::kSyn | tcp_flag::kAck, server_isn(flow_of(p)), tcp.seq + 1));
      } else {
        reply(make_tcp(t, self, peer, tcp_flag::kRst | tcp_flag::kAck, 0, tcp.seq + 1));
      }
    } else if (!open) {
      reply(make_tcp(t, self, peer, tcp_flag::kRst | tcp_flag::kAck, 0, tcp.seq));
    }
    return;
  }
  if (p.is_udp()) {
    const auto sport = *p.src_port;
    const auto dport = *p.dst_port;
    // Replies to the device's own lookups and sessions.
    if (sport == 53 || sport == 123 || sport == 443 || sport == 3478 || sport == 67) return;
    if (dport == 5353 || dport == 1900 || dport == 68) return;
    reply(make_icmp(t, Endpoint{d.mac, *d.assigned_ip, 0}, Endpoint{p.src_mac, p.src_ip, 0}, icmp_type::kUnreachable,
                    icmp_type::kPortUnreachableCode, 0, quote_of(p)));
    return;
  }
  if (p.is_icmp() && p.icmp->type == icmp_type::kEchoRequest) {
    reply(make_icmp(t, Endpoint{d.mac, *d.assigned_ip, 0}, Endpoint{p.src_mac, p.src_ip, 0}, icmp_type::kEchoReply, 0,
                    p.icmp->rest, p.payload));
  }
}

// ----------------------------------------------------------------- captures

Trace Harness::capture(CapturePoint point, Timestamp t0, Timestamp t1) const {
  const auto& buf = point == CapturePoint::Gateway ? gateway_capture_ : bridge_capture_;
  const auto& tr = point == CapturePoint::Gateway ? gateway_truth_ : bridge_truth_;
  auto cmp = [](const PacketRecord& p, Timestamp t) { return p.timestamp < t; };
  const auto lo = std::lower_bound(buf.begin(), buf.end(), t0, cmp);
  const auto hi = std::lower_bound(lo, buf.end(), t1, cmp);
  Trace out;
  out.metadata.capture_point = point;
  out.metadata.start = t0;
  out.metadata.end = t1;
  out.metadata.link_id = point == CapturePoint::Gateway ? "gateway-wan" : "iot-bridge";
  out.packets.assign(lo, hi);
  const auto off = lo - buf.begin();
  out.truth.assign(tr.begin() + off, tr.begin() + off + (hi - lo));
  return out;
}

Trace Harness::capture_all(CapturePoint point) const {
  return capture(point, Timestamp::min(), Timestamp::max());
}

void Harness::clear_captures() {
  gateway_capture_.clear();
  gateway_truth_.clear();
  bridge_capture_.clear();
  bridge_truth_.clear();
  nat_history_.clear();
}

void Harness::set_record_captures(bool on) { options_.record_captures = on; }

}  // namespace sgbench
