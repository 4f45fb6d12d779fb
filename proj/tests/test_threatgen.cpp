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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "sgbench/detector.hpp"
#include "sgbench/dns.hpp"
#include "sgbench/harness.hpp"
#include "sgbench/profiles.hpp"
#include "sgbench/threatgen.hpp"
#include "support.hpp"

using namespace sgbench;
using namespace std::chrono_literals;

namespace {

ThreatScenario scenario(ThreatKind kind, std::vector<std::string> targets = {"echo"},
                        std::map<std::string, std::string> overrides = {}) {
  ThreatScenario s;
  s.name = std::string(to_string(kind));
  s.kind = kind;
  s.targets = std::move(targets);
  s.params = default_params(kind);
  for (auto& [k, v] : overrides) s.params[k] = v;
  s.seed = 11;
  s.tag = 7;
  return s;
}

struct Lab {
  Harness h;
  Lab()
      : h({test::device("echo", 1, "echo-spot"), test::device("home", 2, "google-home"),
           test::device("cam", 3, "camera-upload", DeviceCategory::Camera), test::device("plug", 4)},
          std::make_unique<NullAdapter>(), 3, [] {
            HarnessOptions o;
            o.boot_burst = false;
            return o;
          }()) {
    for (const auto* id : {"echo", "home", "cam"}) h.connect_device(id);
    h.run_until(5s);
  }
};

Trace as_trace(const std::vector<TimedPacket>& v) {
  std::vector<PacketRecord> p;
  for (const auto& tp : v) p.push_back(tp.packet);
  return test::trace_of(std::move(p), CapturePoint::IotBridge);
}

template <typename Pred>
std::size_t count(const std::vector<TimedPacket>& v, Pred pred) {
  std::size_t n = 0;
  for (const auto& tp : v) n += pred(tp.packet) ? 1 : 0;
  return n;
}

bool syn_only(const PacketRecord& p) {
  return p.is_tcp() && (p.tcp->flags & tcp_flag::kSyn) && !(p.tcp->flags & tcp_flag::kAck);
}

}  // namespace

TEST_CASE("SYN flood: rate x duration SYNs and no ACKs") {
  Lab lab;
  const auto s = scenario(ThreatKind::SynFlood, {"echo"}, {{"rate", "100"}, {"duration", "60"}});
  const auto out = gen_flood(FloodClass::Syn, s, lab.h, 10s);
  CHECK(out.size() == 6000);
  CHECK(count(out, syn_only) == 6000);
  CHECK(count(out, [](const PacketRecord& p) { return p.is_tcp() && (p.tcp->flags & tcp_flag::kAck); }) == 0);
  std::set<std::uint16_t> sports;
  for (const auto& tp : out) {
    CHECK(tp.packet.src_ip == *lab.h.device("echo").assigned_ip);
    CHECK(tp.packet.src_mac == lab.h.device("echo").mac);
    CHECK(tp.scenario_tag == 7);
    sports.insert(*tp.packet.src_port);
  }
  CHECK(sports.size() > 1000);
  CHECK(out.front().packet.timestamp == 10s);
  CHECK(out.back().packet.timestamp < 70s);
}

TEST_CASE("flood packet count is rate x duration within one") {
  Lab lab;
  for (const auto cls : {FloodClass::Syn, FloodClass::Udp, FloodClass::Dns, FloodClass::Http, FloodClass::Ipfrag}) {
    for (const auto& [rate, dur] : std::vector<std::pair<double, double>>{{100, 3}, {33, 7}, {250, 1.5}, {7, 0.5}}) {
      auto s = scenario(ThreatKind::SynFlood, {"echo"},
                        {{"rate", std::to_string(rate)}, {"duration", std::to_string(dur)}});
      const auto n = static_cast<double>(gen_flood(cls, s, lab.h, 10s).size());
      CHECK(std::abs(n - rate * dur) <= 1.0);
    }
  }
}

TEST_CASE("UDP flood only targets ports 80 and 443") {
  Lab lab;
  const auto out = gen_flood(FloodClass::Udp, scenario(ThreatKind::UdpFlood, {"echo"}, {{"duration", "2"}}), lab.h, 10s);
  std::set<std::uint16_t> ports;
  for (const auto& tp : out) {
    REQUIRE(tp.packet.is_udp());
    ports.insert(*tp.packet.dst_port);
  }
  CHECK(ports == std::set<std::uint16_t>{80, 443});
}

TEST_CASE("DNS flood: random labels at the victim resolver") {
  Lab lab;
  const auto out = gen_flood(FloodClass::Dns, scenario(ThreatKind::DnsFlood, {"echo"}, {{"duration", "1"}}), lab.h, 10s);
  std::set<std::string> names;
  for (const auto& tp : out) {
    CHECK(tp.packet.dst_ip == InternetModel::kVictimB);
    CHECK(tp.packet.dst_port == 53);
    const auto m = dns::decode(tp.packet.payload);
    REQUIRE(m.has_value());
    REQUIRE(m->questions.size() == 1);
    names.insert(m->questions[0].name);
  }
  CHECK(names.size() == out.size());
}

TEST_CASE("HTTP flood: complete handshakes carrying GETs") {
  Lab lab;
  const auto out = gen_flood(FloodClass::Http, scenario(ThreatKind::HttpFlood, {"echo"}, {{"duration", "1"}}), lab.h, 10s);
  const auto gets = count(out, [](const PacketRecord& p) { return p.payload_view().rfind("GET ", 0) == 0; });
  CHECK(gets == 250);
  CHECK(count(out, syn_only) == 250);
  // Every GET rides on a flow that opened with a SYN and was acknowledged.
  std::set<std::uint16_t> opened, acked;
  for (const auto& tp : out) {
    const auto& p = tp.packet;
    if (syn_only(p)) opened.insert(*p.src_port);
    if (p.is_tcp() && p.tcp->flags == tcp_flag::kAck && p.payload.empty()) acked.insert(*p.src_port);
    if (p.payload_view().rfind("GET ", 0) == 0) {
      CHECK(opened.count(*p.src_port) == 1);
      CHECK(acked.count(*p.src_port) == 1);
    }
  }
}

TEST_CASE("IPFRAG flood: every packet is a fragment and nothing reassembles") {
  Lab lab;
  const auto out =
      gen_flood(FloodClass::Ipfrag, scenario(ThreatKind::IpfragFlood, {"echo"}, {{"duration", "10"}}), lab.h, 10s);
  REQUIRE(!out.empty());
  std::map<std::uint16_t, std::vector<const PacketRecord*>> by_id;
  for (const auto& tp : out) {
    const auto& p = tp.packet;
    CHECK((p.more_fragments || p.frag_offset > 0));
    by_id[p.ip_id].push_back(&p);
  }
  // A datagram is complete only once a last fragment (MF=0) arrives.
  for (const auto& [id, frags] : by_id) {
    CHECK(std::none_of(frags.begin(), frags.end(), [](const PacketRecord* p) { return !p->more_fragments; }));
  }
}

TEST_CASE("floods from the Internet hit the safeguard WAN address") {
  Lab lab;
  auto s = scenario(ThreatKind::SynFlood, {"echo"}, {{"duration", "1"}});
  s.origin = ThreatOrigin::Internet;
  for (const auto& tp : gen_flood(FloodClass::Syn, s, lab.h, 10s)) {
    CHECK(tp.packet.src_ip == InternetModel::kAttacker);
    CHECK(tp.packet.dst_ip == lab.h.options().plan.safeguard_wan_ip);
  }
  auto bad = scenario(ThreatKind::WeakPassword);
  bad.origin = ThreatOrigin::Internet;
  CHECK_THROWS_AS(bad.validate(), BenchError);
}

TEST_CASE("scenario validation") {
  auto s = scenario(ThreatKind::SynFlood);
  CHECK_NOTHROW(s.validate());
  // Absent keys fall back to the defaults; an explicitly empty value is missing.
  s.params.erase("rate");
  CHECK_NOTHROW(s.validate());
  s.params["rate"] = "";
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("MISSING_PARAM"), BenchError);
  s = scenario(ThreatKind::SynFlood, {"echo"}, {{"victim", ""}});
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("MISSING_PARAM"), BenchError);
  s = scenario(ThreatKind::SynFlood, {"echo"}, {{"rate", "fast"}});
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("INVALID_ARGUMENT"), BenchError);
  s = scenario(ThreatKind::SynFlood, {"echo"}, {{"duration", "0"}});
  CHECK_THROWS_AS(s.validate(), BenchError);
  s = scenario(ThreatKind::SynFlood, {"echo"}, {{"rate", "-3"}});
  CHECK_THROWS_AS(s.validate(), BenchError);
  s = scenario(ThreatKind::SynFlood, {});
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("MISSING_PARAM"), BenchError);
  s = scenario(ThreatKind::AnomUpload, {});
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("NO_TARGETS"), BenchError);
  CHECK(parse_threat_origin("INTERNET") == ThreatOrigin::Internet);
  CHECK_THROWS_AS(parse_threat_origin("MARS"), BenchError);
}

TEST_CASE("port scan: n distinct ports, monotone probe times") {
  Lab lab;
  for (const int n : {5, 1000}) {
    const auto out =
        gen_scan(ScanClass::Port, scenario(ThreatKind::PortScan, {"echo"}, {{"n_ports", std::to_string(n)}}), lab.h, 10s);
    std::set<std::uint16_t> ports;
    for (std::size_t i = 0; i < out.size(); ++i) {
      ports.insert(*out[i].packet.dst_port);
      CHECK(syn_only(out[i].packet));
      CHECK(out[i].packet.dst_ip == *lab.h.device("echo").assigned_ip);
      if (i > 0) CHECK(out[i].packet.timestamp > out[i - 1].packet.timestamp);
    }
    CHECK(out.size() == static_cast<std::size_t>(n));
    CHECK(ports.size() == static_cast<std::size_t>(n));
    CHECK(count(out, is_probe_diversity) == 0);
  }
}

TEST_CASE("OS scan is a port scan plus at least six diverse probes") {
  Lab lab;
  const auto s = scenario(ThreatKind::OsScan, {"echo"}, {{"n_ports", "200"}});
  const auto os = gen_scan(ScanClass::Os, s, lab.h, 10s);
  auto ps_s = s;
  ps_s.kind = ThreatKind::OsScan;
  const auto ps = gen_scan(ScanClass::Port, ps_s, lab.h, 10s);
  REQUIRE(os.size() > ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) CHECK(os[i].packet == ps[i].packet);
  CHECK(count(os, is_probe_diversity) >= 6);
}

TEST_CASE("scans need a connected target") {
  Lab lab;
  CHECK_THROWS_WITH_AS(gen_scan(ScanClass::Port, scenario(ThreatKind::PortScan, {"plug"}), lab.h, 10s),
                       doctest::Contains("TARGET_DISCONNECTED"), BenchError);
}

TEST_CASE("power cycling") {
  Lab lab;
  auto conn = [](const std::vector<DeviceEvent>& v, const std::string& id) {
    return std::count_if(v.begin(), v.end(), [&](const DeviceEvent& e) { return e.connect && e.device_id == id; });
  };
  const auto def = gen_power_cycle(scenario(ThreatKind::AnomOnOff), lab.h, 100s);
  CHECK(def.size() == 240);
  CHECK(conn(def, "echo") == 120);
  const auto one = gen_power_cycle(scenario(ThreatKind::AnomOnOff, {"echo"}, {{"period", "60"}, {"total", "60"}}),
                                   lab.h, 100s);
  CHECK(one.size() == 2);
  CHECK_FALSE(one[0].connect);
  CHECK(one[1].connect);
  const auto three = gen_power_cycle(scenario(ThreatKind::AnomOnOff, {"home", "cam", "echo"}), lab.h, 100s);
  CHECK(three.size() == 720);
  for (const auto* id : {"echo", "home", "cam"}) CHECK(conn(three, id) == 120);
  for (std::size_t i = 1; i < three.size(); ++i) {
    const auto& a = three[i - 1];
    const auto& b = three[i];
    CHECK((a.time < b.time || (a.time == b.time && a.device_id < b.device_id)));
  }
  const auto again = gen_power_cycle(scenario(ThreatKind::AnomOnOff, {"home", "cam", "echo"}), lab.h, 100s);
  REQUIRE(again.size() == three.size());
  for (std::size_t i = 0; i < three.size(); ++i) {
    CHECK(again[i].time == three[i].time);
    CHECK(again[i].device_id == three[i].device_id);
  }
}

TEST_CASE("trace swap replays Google Home traffic as the Echo") {
  Lab lab;
  auto res = ThreatResources::bundled();
  const auto& tmpl = res.template_trace("builtin:google-home:600");
  REQUIRE(!tmpl.empty());
  const auto& echo = lab.h.device("echo");
  const auto out = gen_trace_swap(tmpl, echo, scenario(ThreatKind::AnomTraffic), 50s);
  REQUIRE(out.size() == tmpl.size());
  std::set<Ipv4Address> google{InternetModel::kResolver};
  const auto& gp = builtin_profile("google-home");
  google.insert(InternetModel::address_of(gp.first_party_host));
  for (const auto& f : gp.flows) google.insert(InternetModel::address_of(f.host));
  for (const auto& tp : out) {
    CHECK(tp.packet.src_ip == *echo.assigned_ip);
    CHECK(tp.packet.src_mac == echo.mac);
    CHECK(google.count(tp.packet.dst_ip) == 1);
  }
  CHECK_THROWS_WITH_AS(gen_trace_swap(Trace{}, echo, scenario(ThreatKind::AnomTraffic), 50s),
                       doctest::Contains("EMPTY_TEMPLATE"), BenchError);
  // Swapping a device's own template onto it is a plain replay.
  const auto& own = res.template_trace("builtin:echo-spot:600");
  const auto same = gen_trace_swap(own, echo, scenario(ThreatKind::AnomTraffic), 50s);
  const auto replay = spoof_replay(own, echo, 50s, 7);
  REQUIRE(same.size() == replay.size());
  for (std::size_t i = 0; i < same.size(); ++i) CHECK(same[i].packet == replay[i].packet);
}

TEST_CASE("upload burst") {
  Lab lab;
  auto res = ThreatResources::bundled();
  const auto& cam = res.template_trace("builtin:camera-upload:120");
  REQUIRE(!cam.empty());
  const auto one = gen_upload_burst(cam, scenario(ThreatKind::AnomUpload, {"echo"}), lab.h, 50s);
  const auto swap = gen_trace_swap(cam, lab.h.device("echo"), scenario(ThreatKind::AnomUpload), 50s);
  REQUIRE(one.size() == swap.size());
  for (std::size_t i = 0; i < one.size(); ++i) CHECK(one[i].packet == swap[i].packet);

  const auto all = gen_upload_burst(cam, scenario(ThreatKind::AnomUpload, {"echo", "home", "cam"}), lab.h, 50s);
  CHECK(all.size() == 3 * cam.size());
  std::map<MacAddress, std::vector<Duration>> offsets;
  std::map<MacAddress, std::uint64_t> bytes;
  for (const auto& tp : all) {
    offsets[tp.packet.src_mac].push_back(tp.packet.timestamp - 50s);
    bytes[tp.packet.src_mac] += tp.packet.wire_len;
  }
  REQUIRE(offsets.size() == 3);
  CHECK(offsets.count(lab.h.device("cam").mac) == 1);
  for (const auto& [mac, v] : offsets) CHECK(v == offsets.begin()->second);
  std::uint64_t tmpl_bytes = 0;
  for (const auto& p : cam.packets) tmpl_bytes += p.wire_len;
  std::uint64_t total = 0;
  for (const auto& [mac, b] : bytes) total += b;
  CHECK(total >= 3 * tmpl_bytes);
  CHECK_THROWS_WITH_AS(gen_upload_burst(cam, scenario(ThreatKind::AnomUpload, {}), lab.h, 50s),
                       doctest::Contains("NO_TARGETS"), BenchError);
}

TEST_CASE("weak passwords: one FTP session per bundled word") {
  Lab lab;
  const auto res = ThreatResources::bundled();
  REQUIRE(res.wordlist.size() == 200);
  const auto out = gen_app_layer(ThreatKind::WeakPassword, scenario(ThreatKind::WeakPassword), lab.h, res, 10s);
  std::set<std::string> seen;
  std::set<std::uint16_t> sessions;
  for (const auto& tp : out) {
    const auto& p = tp.packet;
    if (syn_only(p)) sessions.insert(*p.src_port);
    const auto v = p.payload_view();
    if (v.rfind("PASS ", 0) == 0) {
      CHECK(p.dst_port == 21);
      seen.insert(std::string(v.substr(5, v.size() - 7)));
    }
  }
  CHECK(sessions.size() == 200);
  CHECK(seen == std::set<std::string>(res.wordlist.begin(), res.wordlist.end()));
  ThreatResources empty;
  CHECK_THROWS_WITH_AS(gen_app_layer(ThreatKind::WeakPassword, scenario(ThreatKind::WeakPassword), lab.h, empty, 10s),
                       doctest::Contains("RESOURCE_MISSING"), BenchError);
}

TEST_CASE("malicious destinations: one lookup and one connect per entry") {
  Lab lab;
  ThreatResources res;
  res.blocklist = {"bad-one.example", "bad-two.example", "bad-three.example"};
  const auto out = gen_app_layer(ThreatKind::MaliciousDest, scenario(ThreatKind::MaliciousDest), lab.h, res, 10s);
  std::set<std::string> asked;
  for (const auto& tp : out) {
    if (tp.packet.dst_port == 53) {
      const auto m = dns::decode(tp.packet.payload);
      REQUIRE(m.has_value());
      asked.insert(m->questions.at(0).name);
    }
  }
  CHECK(asked == std::set<std::string>(res.blocklist.begin(), res.blocklist.end()));
  CHECK(count(out, [](const PacketRecord& p) { return p.is_udp() && p.dst_port == 53; }) == 3);
  CHECK(count(out, syn_only) == 3);
  for (const auto& tp : out) CHECK(tp.packet.src_ip == *lab.h.device("echo").assigned_ip);
  ThreatResources empty;
  CHECK_THROWS_WITH_AS(gen_app_layer(ThreatKind::MaliciousDest, scenario(ThreatKind::MaliciousDest), lab.h, empty, 10s),
                       doctest::Contains("RESOURCE_MISSING"), BenchError);
}

TEST_CASE("PII and unencrypted traffic") {
  Lab lab;
  ThreatResources res;
  res.pii = {"Ann", "a@b.c", "hunter2"};
  const auto pii = gen_app_layer(ThreatKind::PiiExposure, scenario(ThreatKind::PiiExposure), lab.h, res, 10s);
  auto has = [](const std::vector<TimedPacket>& v, std::string_view s) {
    return count(v, [&](const PacketRecord& p) { return p.payload_view().find(s) != std::string_view::npos; });
  };
  CHECK(has(pii, "a@b.c") >= 1);
  CHECK(has(pii, "hunter2") >= 1);
  const auto plain = gen_app_layer(ThreatKind::Unencrypted, scenario(ThreatKind::Unencrypted), lab.h, res, 10s);
  CHECK(has(plain, "HTTP/1.1") == 10);
  CHECK(has(plain, "a@b.c") == 0);
  CHECK_THROWS_WITH_AS(
      gen_app_layer(ThreatKind::PiiExposure, scenario(ThreatKind::PiiExposure), lab.h, ThreatResources{}, 10s),
      doctest::Contains("RESOURCE_MISSING"), BenchError);
}

TEST_CASE("DoH scenario sends plain port-53 queries") {
  Lab lab;
  const auto out = gen_app_layer(ThreatKind::Doh, scenario(ThreatKind::Doh), lab.h, ThreatResources{}, 10s);
  CHECK(count(out, [](const PacketRecord& p) { return p.is_udp() && p.dst_port == 53; }) == 5);
  CHECK(count(out, [](const PacketRecord& p) { return p.dst_port == 443; }) == 0);
}

TEST_CASE("configure_open_ports: SYN-ACK on listed ports, RST elsewhere") {
  for (const auto& open : std::vector<std::set<std::uint16_t>>{{}, {23}}) {
    Lab lab;
    configure_open_ports(lab.h, "echo", open);
    const auto& d = lab.h.device("echo");
    const Endpoint scanner{MacAddress{{0x02, 0x1b, 0, 0, 0, 0x66}}, {10, 0, 0, 66}, 47000};
    std::vector<TimedPacket> probes;
    for (const std::uint16_t port : {23, 24}) {
      probes.push_back({make_tcp(lab.h.now() + 1s + Duration{port}, scanner, Endpoint{d.mac, *d.assigned_ip, port},
                                 tcp_flag::kSyn, 1000, 0),
                        1});
    }
    lab.h.inject(InjectionPoint::IotLanSide, probes);
    lab.h.run_until(lab.h.now() + 3s);
    const auto br = lab.h.capture_all(CapturePoint::IotBridge);
    auto answered = [&](std::uint16_t port, std::uint8_t flags) {
      return test::count_if(br, [&](const PacketRecord& p) {
        return p.is_tcp() && p.src_ip == *d.assigned_ip && p.src_port == port && p.tcp->flags == flags;
      });
    };
    const auto synack = tcp_flag::kSyn | tcp_flag::kAck;
    const auto rst = tcp_flag::kRst | tcp_flag::kAck;
    CHECK(answered(23, synack) == (open.count(23) ? 1u : 0u));
    CHECK(answered(23, rst) == (open.count(23) ? 0u : 1u));
    CHECK(answered(24, rst) == 1);
  }
}

TEST_CASE("property: every plan is deterministic, tagged, ordered and survives pcap") {
  for (const auto kind : kAllThreatKinds) {
    CAPTURE(to_string(kind));
    auto s = scenario(kind, kind == ThreatKind::AnomUpload ? std::vector<std::string>{"echo", "home"}
                                                           : std::vector<std::string>{"echo"});
    if (s.has("rate") && s.has("victim")) s.params["duration"] = "2";
    if (kind == ThreatKind::AnomOnOff) s.params["total"] = "300";
    auto once = [&] {
      Lab lab;
      auto res = ThreatResources::bundled();
      return plan_threat(s, lab.h, res, 20s);
    };
    const auto a = once();
    const auto b = once();
    CHECK(a.lan_side.size() == b.lan_side.size());
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t i = 0; i < a.events.size(); ++i) {
      CHECK(a.events[i].time == b.events[i].time);
      CHECK(a.events[i].connect == b.events[i].connect);
    }
    for (std::size_t i = 0; i < std::min(a.lan_side.size(), b.lan_side.size()); ++i) {
      CHECK(a.lan_side[i].packet == b.lan_side[i].packet);
    }
    if (kind != ThreatKind::AnomOnOff && kind != ThreatKind::OpenPort) CHECK(a.packet_count() > 0);
    for (const auto* side : {&a.lan_side, &a.gateway_side}) {
      for (const auto& tp : *side) {
        CHECK((tp.scenario_tag == s.tag || tp.scenario_tag == a.benign_tag));
        CHECK(tp.packet.timestamp >= a.start);
        CHECK(tp.packet.timestamp <= a.end);
      }
      const auto t = as_trace(*side);
      CHECK(t.is_ordered());
      const auto back = parse_trace(serialize_trace(t), CapturePoint::IotBridge);
      CHECK(back.packets == t.packets);
    }
  }
}
