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

#include <filesystem>
#include <fstream>

#include "sgbench/attribution.hpp"
#include "sgbench/detector.hpp"
#include "sgbench/dns.hpp"
#include "sgbench/pcap.hpp"
#include "support.hpp"

using namespace sgbench;
using namespace std::chrono_literals;
using test::ep;
using test::trace_of;

namespace {

// Ethernet/IPv4/UDP frames assembled byte by byte outside the library: a query
// for cloud.example at t=100.0 and its answer 192.0.2.7 at t=101.25.
constexpr std::string_view kDnsFixture =
    "d4c3b2a1020004000000000000000000ffff000001000000640000000000000049000000490000000253470000010200"
    "0000000908004500003b12340000401133b20a000064c63364359c4000350027dfcd0abc010000010000000000000563"
    "6c6f7564076578616d706c6500000100016500000090d003005900000059000000020000000009025347000001080045"
    "00004b12340000401133a2c63364350a00006400359c40003718a90abc8180000100010000000005636c6f7564076578"
    "616d706c650000010001c00c000100010000012c0004c0000207";

PacketRecord dns_answer(Timestamp t, Ipv4Address client, const std::string& name, Ipv4Address answer) {
  auto q = dns::make_query(7, name);
  const std::vector<Ipv4Address> addrs{answer};
  const auto r = dns::encode(dns::make_a_response(q, addrs));
  return make_udp(t, ep({198, 51, 100, 53}, 53), ep(client, 40000), r);
}

PacketRecord random_packet(std::mt19937_64& rng, Timestamp t) {
  const auto src = ep(Ipv4Address{static_cast<std::uint32_t>(rng())}, static_cast<std::uint16_t>(rng()),
                      static_cast<std::uint8_t>(rng()));
  const auto dst = ep(Ipv4Address{static_cast<std::uint32_t>(rng())}, static_cast<std::uint16_t>(rng()));
  const auto payload = test::random_payload(rng, rng() % 1200);
  PacketRecord p;
  switch (rng() % 4) {
    case 0:
      p = make_tcp(t, src, dst, static_cast<std::uint8_t>(rng()), static_cast<std::uint32_t>(rng()),
                   static_cast<std::uint32_t>(rng()), payload);
      if (rng() % 2) p.tcp->options = {0x02, 0x04, 0x05, 0xb4};
      break;
    case 1: p = make_udp(t, src, dst, payload); break;
    case 2:
      p = make_icmp(t, src, dst, static_cast<std::uint8_t>(rng() % 16), static_cast<std::uint8_t>(rng() % 4),
                    static_cast<std::uint32_t>(rng()), payload);
      break;
    default:
      // A non-first fragment: raw payload after the IP header.
      p = make_udp(t, src, dst, payload);
      p.src_port.reset();
      p.dst_port.reset();
      p.more_fragments = rng() % 2;
      p.frag_offset = static_cast<std::uint16_t>(1 + rng() % 1000);
      break;
  }
  p.ip_id = static_cast<std::uint16_t>(rng());
  p.ttl = static_cast<std::uint8_t>(1 + rng() % 255);
  finalize_length(p);
  return p;
}

}  // namespace

TEST_CASE("empty trace writes a bare global header and reads back empty") {
  const auto bytes = serialize_trace(Trace{});
  CHECK(bytes.size() == 24);
  CHECK(parse_trace(bytes).empty());
}

TEST_CASE("one minimum-size frame costs 24 + 16 + 60 bytes") {
  auto p = make_udp(1s, ep({10, 0, 0, 100}, 1000), ep({192, 0, 2, 1}, 2000));
  CHECK(p.wire_len == 60);
  CHECK(serialize_trace(trace_of({p})).size() == 24 + 16 + 60);
}

TEST_CASE("hand-built DNS fixture decodes field by field") {
  const auto bytes = test::from_hex(kDnsFixture);
  const auto t = parse_trace(bytes);
  REQUIRE(t.size() == 2);
  CHECK(t.packets[0].ip_protocol == ip_proto::kUdp);
  CHECK(t.packets[0].dst_port == 53);
  CHECK(t.packets[1].src_port == 53);
  CHECK(t.packets[0].timestamp == 100s);
  CHECK(t.packets[1].timestamp == 101s + 250ms);
  CHECK(t.packets[0].src_ip == Ipv4Address{10, 0, 0, 100});
  CHECK(t.packets[0].src_mac == MacAddress{{0x02, 0, 0, 0, 0, 0x09}});
  CHECK(t.packets[0].ip_id == 0x1234);
  const auto names = dns::correlate_dns(t).ip_to_name;
  REQUIRE(names.size() == 1);
  CHECK(names.at(Ipv4Address{192, 0, 2, 7}) == "cloud.example");
  // Checksums computed by the writer agree with the independently built frame.
  CHECK(serialize_trace(t) == bytes);
}

TEST_CASE("bad magic, truncation and foreign link types are rejected") {
  auto bytes = test::from_hex(kDnsFixture);
  SUBCASE("truncated record") {
    bytes.resize(bytes.size() - 3);
    CHECK_THROWS_WITH_AS(parse_trace(bytes), doctest::Contains("MALFORMED_FILE"), BenchError);
  }
  SUBCASE("truncated global header") {
    bytes.resize(20);
    CHECK_THROWS_AS(parse_trace(bytes), BenchError);
  }
  SUBCASE("bad magic") {
    bytes[0] = 0;
    CHECK_THROWS_WITH_AS(parse_trace(bytes), doctest::Contains("MALFORMED_FILE"), BenchError);
  }
  SUBCASE("linktype") {
    bytes[20] = 101;
    CHECK_THROWS_WITH_AS(parse_trace(bytes), doctest::Contains("UNSUPPORTED_LINKTYPE"), BenchError);
  }
}

TEST_CASE("property: random traces survive a write/read round trip exactly") {
  std::mt19937_64 rng(0x5eed);
  for (int round = 0; round < 40; ++round) {
    std::vector<PacketRecord> packets;
    Timestamp t{static_cast<std::int64_t>(rng() % 1'000'000'000)};
    const auto n = rng() % 60;
    for (std::uint64_t i = 0; i < n; ++i) {
      t += Duration{static_cast<std::int64_t>(rng() % 2'000'000)};
      packets.push_back(random_packet(rng, t));
    }
    const auto trace = trace_of(packets);
    const auto bytes = serialize_trace(trace);
    const auto back = parse_trace(bytes, CapturePoint::Gateway);
    REQUIRE(back.size() == trace.size());
    for (std::size_t i = 0; i < back.size(); ++i) CHECK(back.packets[i] == trace.packets[i]);
    CHECK(serialize_trace(back) == bytes);
  }
}

TEST_CASE("write_trace and read_trace agree through a file") {
  const auto dir = std::filesystem::temp_directory_path() / "sgbench-trace-core";
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(3);
  std::vector<PacketRecord> ps;
  for (int i = 0; i < 5; ++i) ps.push_back(random_packet(rng, Timestamp{i * 1000}));
  const auto t = trace_of(ps);
  write_trace(t, dir / "x.pcap");
  const auto back = read_trace(dir / "x.pcap");
  CHECK(back.packets == t.packets);
  CHECK(std::filesystem::file_size(dir / "x.pcap") == serialize_trace(t).size());
  CHECK_THROWS_AS(read_trace(dir / "missing.pcap"), BenchError);
}

TEST_CASE("correlate_dns: empty, single answer, last writer wins") {
  CHECK(dns::correlate_dns(Trace{}).ip_to_name.empty());
  const Ipv4Address ip{192, 0, 2, 7};
  const auto one = trace_of({dns_answer(1s, {10, 0, 0, 100}, "cloud.example", ip)});
  CHECK(dns::correlate_dns(one).ip_to_name == std::map<Ipv4Address, std::string>{{ip, "cloud.example"}});
  const auto two = trace_of({dns_answer(1s, {10, 0, 0, 100}, "n1.example", ip),
                             dns_answer(2s, {10, 0, 0, 100}, "n2.example", ip)});
  CHECK(dns::correlate_dns(two).ip_to_name.at(ip) == "n2.example");
  // Same input, same mapping.
  CHECK(dns::correlate_dns(two).ip_to_name == dns::correlate_dns(two).ip_to_name);
  auto junk = make_udp(3s, ep({198, 51, 100, 53}, 53), ep({10, 0, 0, 100}, 4000), to_bytes("not dns"));
  CHECK(dns::correlate_dns(trace_of({junk})).skipped == 1);
}

TEST_CASE("summarize_destinations aggregates by hostname and counts outbound bytes only") {
  const AddressPlan plan;
  const Ipv4Address a{192, 0, 2, 1}, b{192, 0, 2, 2}, c{192, 0, 2, 3};
  const auto wan = ep(plan.safeguard_wan_ip, 30001);
  auto out1 = make_tcp(1s, wan, ep(a, 443), tcp_flag::kAck, 1, 1, std::vector<std::uint8_t>(100));
  auto out2 = make_tcp(2s, wan, ep(b, 443), tcp_flag::kAck, 1, 1, std::vector<std::uint8_t>(200));
  auto out3 = make_tcp(3s, wan, ep(c, 443), tcp_flag::kAck, 1, 1);
  auto in = make_tcp(4s, ep(a, 443), wan, tcp_flag::kAck, 1, 1, std::vector<std::uint8_t>(900));
  auto dns_q = make_udp(5s, ep(plan.safeguard_wan_ip, 30500), ep({198, 51, 100, 53}, 53));
  const std::map<Ipv4Address, std::string> names{{a, "cloud.example"}, {b, "cloud.example"}};
  const auto recs = summarize_destinations(trace_of({out1, out2, out3, in, dns_q}), names, plan);
  REQUIRE(recs.size() == 2);
  std::map<std::string, DestinationRecord> by;
  for (const auto& r : recs) by[r.key] = r;
  CHECK(by.at("cloud.example").bytes_total == out1.wire_len + out2.wire_len);
  CHECK(by.at("cloud.example").first_seen == 1s);
  CHECK(by.at("cloud.example").last_seen == 2s);
  CHECK(by.at("192.0.2.3").bytes_total == out3.wire_len);
  CHECK(summarize_destinations(Trace{}, {}, plan).empty());
  const auto csv = destinations_csv(recs);
  CHECK(csv.rfind("key,party,bytes_total,first_seen,last_seen\n", 0) == 0);
}

TEST_CASE("attribution: vacuous and full filters") {
  const AddressPlan plan;
  std::vector<PacketRecord> gw;
  for (int i = 0; i < 10; ++i) {
    gw.push_back(make_udp(Timestamp{i * 1000}, ep(plan.safeguard_wan_ip, 30000 + i), ep({192, 0, 2, 9}, 443)));
  }
  const auto all = attribute_safeguard_traffic(trace_of(gw), Trace{}, {}, kDefaultMatchWindow, plan);
  CHECK(all.safeguard_only.size() == 10);
  CHECK(all.device_via_gateway.empty());

  // A device flow and its NAT-translated copy.
  const FiveTuple lan{ip_proto::kUdp, {10, 0, 0, 100}, 5000, {192, 0, 2, 9}, 443};
  const FiveTuple wan{ip_proto::kUdp, plan.safeguard_wan_ip, 40000, {192, 0, 2, 9}, 443};
  const NatLog nat{{lan, wan, 0s, 10s}};
  std::vector<PacketRecord> br, gw2;
  for (int i = 0; i < 5; ++i) {
    br.push_back(make_udp(Timestamp{i * 1000}, ep(lan.src_ip, lan.src_port), ep(lan.dst_ip, 443),
                          std::vector<std::uint8_t>(10 + i)));
    gw2.push_back(make_udp(Timestamp{i * 1000 + 10}, ep(wan.src_ip, wan.src_port), ep(wan.dst_ip, 443),
                           std::vector<std::uint8_t>(10 + i)));
  }
  const auto none =
      attribute_safeguard_traffic(trace_of(gw2), trace_of(br, CapturePoint::IotBridge), nat, kDefaultMatchWindow, plan);
  CHECK(none.safeguard_only.empty());
  CHECK(none.device_via_gateway.size() == 5);
}

TEST_CASE("attribution rejects captures that never overlap") {
  const AddressPlan plan;
  auto g = make_udp(100s, ep(plan.safeguard_wan_ip, 1), ep({192, 0, 2, 9}, 443));
  auto b = make_udp(1s, ep({10, 0, 0, 100}, 1), ep({192, 0, 2, 9}, 443));
  CHECK_THROWS_WITH_AS(attribute_safeguard_traffic(trace_of({g}), trace_of({b}, CapturePoint::IotBridge), {}),
                       doctest::Contains("CLOCK_SKEW"), BenchError);
}

TEST_CASE("attribution matches per-packet ground truth on a mixed harness run") {
  // Devices talking to their clouds plus a safeguard with its own cloud chatter.
  std::vector<DeviceDescriptor> devs{test::device("cam", 1, "camera", DeviceCategory::Camera),
                                     test::device("plug", 2, "plug"), test::device("echo", 3, "echo-spot")};
  HarnessOptions opts;
  opts.background_traffic = true;
  auto adapter = std::make_unique<CloudTelemetryAdapter>(std::make_unique<NullAdapter>(), avira_like_profile(), 5);
  Harness h(devs, std::move(adapter), 11, opts);
  for (const auto& d : devs) h.connect_device(d.id);
  h.run_until(h.now() + 1800s);
  const auto gw = h.capture_all(CapturePoint::Gateway);
  const auto br = h.capture_all(CapturePoint::IotBridge);
  const auto res = attribute_safeguard_traffic(gw, br, h.nat_log(), kDefaultMatchWindow, opts.plan);

  // Partition in packets and bytes.
  CHECK(res.safeguard_only.size() + res.device_via_gateway.size() == gw.size());
  CHECK(res.safeguard_only.total_bytes() + res.device_via_gateway.total_bytes() == gw.total_bytes());

  // Outbound, the safeguard-only half is exactly what the safeguard sent.
  std::uint64_t truth_bytes = 0, truth_packets = 0;
  for (std::size_t i = 0; i < gw.size(); ++i) {
    if (gw.packets[i].src_ip == opts.plan.safeguard_wan_ip &&
        gw.truth[i].origin == GroundTruth::Origin::Safeguard) {
      truth_bytes += gw.packets[i].wire_len;
      ++truth_packets;
    }
  }
  std::uint64_t got_bytes = 0, got_packets = 0;
  for (const auto& p : res.safeguard_only.packets) {
    if (p.src_ip != opts.plan.safeguard_wan_ip) continue;
    got_bytes += p.wire_len;
    ++got_packets;
  }
  CHECK(truth_packets > 0);
  CHECK(got_packets == truth_packets);
  CHECK(got_bytes == truth_bytes);

  // Ten hosts in the avira-like profile, one in the fsecure-like one.
  const auto names = dns::correlate_dns(gw).ip_to_name;
  CHECK(summarize_destinations(res.safeguard_only, names, opts.plan).size() == avira_like_profile().hosts.size());
}

TEST_CASE("the fsecure-like safeguard contacts exactly one destination") {
  std::vector<DeviceDescriptor> devs{test::device("plug", 2, "plug")};
  HarnessOptions opts;
  opts.background_traffic = true;
  Harness h(devs, std::make_unique<CloudTelemetryAdapter>(std::make_unique<NullAdapter>(), fsecure_like_profile(), 3),
            1, opts);
  h.connect_device("plug");
  h.run_until(h.now() + 3600s);
  const auto gw = h.capture_all(CapturePoint::Gateway);
  const auto br = h.capture_all(CapturePoint::IotBridge);
  const auto res = attribute_safeguard_traffic(gw, br, h.nat_log(), kDefaultMatchWindow, opts.plan);
  const auto recs = summarize_destinations(res.safeguard_only, dns::correlate_dns(gw).ip_to_name, opts.plan);
  REQUIRE(recs.size() == 1);
  CHECK(recs.front().key == "sense-telemetry.fsecure-like.example");
  CHECK(recs.front().first_seen <= recs.front().last_seen);
  CHECK(recs.front().bytes_total > 0);
}
