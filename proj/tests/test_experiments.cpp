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

#include <cmath>
#include <set>

#include "sgbench/catalog.hpp"
#include "sgbench/detector.hpp"
#include "sgbench/experiments.hpp"
#include "sgbench/profiles.hpp"
#include "support.hpp"

using namespace sgbench;
using namespace std::chrono_literals;
using test::ep;

namespace {

DetectorConfig ref_config() {
  DetectorConfig c;
  c.port_scan_mode = DetectorConfig::PortScanMode::Off;
  c.auto_quarantine = true;
  return c;
}

ThreatScenario scenario(ThreatKind kind, std::string target, std::map<std::string, std::string> overrides = {}) {
  ThreatScenario s;
  s.name = std::string(to_string(kind));
  s.kind = kind;
  s.targets = {std::move(target)};
  s.params = default_params(kind);
  for (auto& [k, v] : overrides) s.params[k] = v;
  s.seed = 5;
  s.tag = 3;
  return s;
}

ExperimentConfig quick(int iterations = 1, Duration wait = 60s) {
  ExperimentConfig c;
  c.iterations = iterations;
  c.wait_after_threat = wait;
  return c;
}

HarnessOptions bg(bool on) {
  HarnessOptions o;
  o.background_traffic = on;
  return o;
}

std::unique_ptr<Harness> lab(std::unique_ptr<SafeguardAdapter> a, bool background = false, std::uint64_t seed = 1) {
  auto h = std::make_unique<Harness>(catalog_subset({"wyze-cam-v2", "amazon-echo-spot", "google-home"}), std::move(a),
                                     seed, bg(background));
  for (const auto& d : h->devices()) h->connect_device(d.id);
  h->run_until(30s);
  return h;
}

/// Fails on every TCP SYN it sees.
class FaultyAdapter : public NullAdapter {
 public:
  ForwardDecision process(const PacketRecord& p, Direction) override {
    if (p.is_tcp() && p.tcp->flags == tcp_flag::kSyn) throw std::runtime_error("boom");
    return ForwardDecision::forward();
  }
};

/// A reference detector whose operator isolates any device named in a flood alert.
class OperatorQuarantine : public ReferenceDetector {
 public:
  using ReferenceDetector::ReferenceDetector;
  std::vector<Emission> on_tick(Timestamp now) override {
    for (const auto& a : poll_alerts(Timestamp::min())) {
      if (a.reported_threat() == ThreatKind::SynFlood) {
        for (const auto& id : a.device_ids) set_quarantine(id, true);
      }
    }
    return ReferenceDetector::on_tick(now);
  }
};

PacketRecord sized(Timestamp t, Endpoint src, Endpoint dst, std::size_t wire) {
  auto p = make_udp(t, src, dst, std::vector<std::uint8_t>(wire - 42, 0));
  REQUIRE(p.wire_len == wire);
  return p;
}

}  // namespace

// --------------------------------------------------------------- protocol

TEST_CASE("experiment config validation") {
  ExperimentConfig c;
  CHECK(c.iterations == 30);
  CHECK(c.wait_after_threat == 1200s);
  CHECK(c.id_iterations == 10);
  CHECK(c.id_wait == 1800s);
  CHECK(c.consistency_points == 3);
  CHECK_NOTHROW(c.validate());
  c.iterations = 0;
  CHECK_THROWS_AS(c.validate(), BenchError);
  c = ExperimentConfig{};
  c.wait_after_threat = 0s;
  CHECK_THROWS_AS(c.validate(), BenchError);
  c = ExperimentConfig{};
  c.id_wait = -1s;
  CHECK_THROWS_AS(c.validate(), BenchError);
}

TEST_CASE("property: detected_any is the OR over iterations") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    DetectionOutcome o;
    const int n = 1 + static_cast<int>(rng() % 30);
    bool any = false;
    std::vector<double> lat;
    for (int i = 0; i < n; ++i) {
      IterationOutcome it;
      it.detected = rng() % 4 == 0;
      if (it.detected) {
        it.latency = static_cast<double>(rng() % 1000) / 10.0;
        lat.push_back(*it.latency);
      }
      any = any || it.detected;
      o.iterations.push_back(it);
    }
    o.aggregate();
    CHECK(o.detected_any == any);
    CHECK(o.min_latency.has_value() == any);
    if (any) {
      std::sort(lat.begin(), lat.end());
      CHECK(*o.min_latency == lat.front());
      const auto m = lat.size() % 2 ? lat[lat.size() / 2] : (lat[lat.size() / 2 - 1] + lat[lat.size() / 2]) / 2;
      CHECK(*o.median_latency == doctest::Approx(m));
      CHECK(*o.median_latency >= 0.0);
    }
    // Clearing a detected iteration can only turn the aggregate off.
    for (auto& it : o.iterations) {
      if (!it.detected) continue;
      it.detected = false;
      it.latency.reset();
      const bool before = o.detected_any;
      o.aggregate();
      CHECK((o.detected_any == before || (before && !o.detected_any)));
    }
    CHECK_FALSE(o.detected_any);
  }
}

TEST_CASE("threat experiment: null never detects, reference detects a SYN flood quickly") {
  auto res = ThreatResources::bundled();
  const auto s = scenario(ThreatKind::SynFlood, "amazon-echo-spot", {{"rate", "100"}, {"duration", "30"}});
  {
    auto h = lab(std::make_unique<NullAdapter>());
    const auto o = run_threat_experiment(*h, s, res, quick(3));
    CHECK(o.iterations.size() == 3);
    CHECK_FALSE(o.detected_any);
    CHECK(cell_of(o).state == CellState::NotDetected);
  }
  {
    auto h = lab(std::make_unique<ReferenceDetector>(ref_config()));
    const auto o = run_threat_experiment(*h, s, res, quick(3));
    CHECK(o.detected_any);
    for (const auto& it : o.iterations) CHECK(it.detected);
    REQUIRE(o.median_latency.has_value());
    CHECK(*o.median_latency <= 40.0);
    CHECK(cell_of(o).state == CellState::Detected);
  }
}

TEST_CASE("threat experiment: a UDP flood shorter than the sustain time goes unnoticed") {
  auto res = ThreatResources::bundled();
  for (const auto& [duration, expect] : std::vector<std::pair<std::string, bool>>{{"300", false}, {"900", true}}) {
    auto h = lab(std::make_unique<ReferenceDetector>(ref_config()));
    const auto o = run_threat_experiment(
        *h, scenario(ThreatKind::UdpFlood, "amazon-echo-spot", {{"rate", "20"}, {"duration", duration}}), res, quick());
    CHECK(o.detected_any == expect);
  }
}

TEST_CASE("threat experiment: unclaimed kinds and adapter faults") {
  auto res = ThreatResources::bundled();
  {
    auto h = lab(std::make_unique<NullAdapter>("partial", std::set<ThreatKind>{ThreatKind::PortScan}));
    const auto o = run_threat_experiment(*h, scenario(ThreatKind::SynFlood, "amazon-echo-spot"), res, quick());
    CHECK_FALSE(o.claimed);
    CHECK(o.iterations.empty());
    CHECK(cell_of(o).state == CellState::NotClaimed);
  }
  {
    auto h = lab(std::make_unique<FaultyAdapter>());
    const auto o = run_threat_experiment(
        *h, scenario(ThreatKind::SynFlood, "amazon-echo-spot", {{"rate", "10"}, {"duration", "2"}}), res, quick(2));
    CHECK(o.faults == 2);
    for (const auto& it : o.iterations) {
      CHECK(it.adapter_fault);
      CHECK_FALSE(it.detected);
    }
  }
}

TEST_CASE("quarantine check") {
  auto res = ThreatResources::bundled();
  const auto cfg = quick(1, 120s);
  auto flood = scenario(ThreatKind::Quarantine, "amazon-echo-spot", {{"rate", "100"}, {"duration", "20"}});
  {
    auto h = lab(std::make_unique<NullAdapter>());
    CHECK_FALSE(run_quarantine_check(*h, res, cfg, flood).quarantined());
  }
  {
    auto h = lab(std::make_unique<ReferenceDetector>(ref_config()));
    const auto q = run_quarantine_check(*h, res, cfg, flood);
    CHECK(q.flood_detected);
    CHECK(q.sent_after_alert > 0);
    CHECK(q.leaked == 0);
    CHECK(q.quarantined());
  }
  {
    auto cfg_off = ref_config();
    cfg_off.auto_quarantine = false;
    auto h = lab(std::make_unique<ReferenceDetector>(cfg_off));
    const auto q = run_quarantine_check(*h, res, cfg, flood);
    CHECK(q.flood_detected);
    CHECK(q.leaked > 0);
    CHECK_FALSE(q.quarantined());
  }
  {
    auto cfg_off = ref_config();
    cfg_off.auto_quarantine = false;
    auto h = lab(std::make_unique<OperatorQuarantine>(cfg_off));
    CHECK(run_quarantine_check(*h, res, cfg, flood).quarantined());
  }
}

// ------------------------------------------------------------------ matrix

TEST_CASE("matrix cells and rendering") {
  CHECK(format_latency(0) == "0s");
  CHECK(format_latency(30) == "30s");
  CHECK(format_latency(40) == "40s");
  CHECK(format_latency(180) == "3m");
  CHECK(format_latency(600) == "10m");
  CHECK(format_latency(7200) == "2h");
  CHECK(MatrixCell{CellState::Detected, 30.0}.render() == "✓(30s)");
  CHECK(MatrixCell{CellState::NotDetected, std::nullopt}.render() == "✗");
  CHECK(MatrixCell{CellState::NotClaimed, std::nullopt}.render() == "-");
  CHECK(display_width("✓(30s)") == 6);
  CHECK(pad_display("✗", 3) == "✗  ");

  DetectionMatrix m;
  m.add_adapter("a");
  m.add_adapter("b");
  m.add_adapter("a");
  CHECK(m.adapters() == std::vector<std::string>{"a", "b"});
  m.set(ThreatKind::PortScan, "a", {CellState::Detected, 45.0});
  m.set(ThreatKind::SynFlood, "a", {CellState::NotDetected, std::nullopt});
  m.set(ThreatKind::SynFlood, "b", {CellState::NotClaimed, std::nullopt});
  CHECK(m.kinds() == std::vector<ThreatKind>{ThreatKind::SynFlood, ThreatKind::PortScan});
  const auto text = m.render_text();
  CHECK(text.find("SYN Flooding") < text.find("Port Scanning"));
  CHECK(text.find("✓(45s)") != std::string::npos);
  CHECK_FALSE(m.has(ThreatKind::PortScan, "b"));
  CHECK_THROWS_AS(m.at(ThreatKind::PortScan, "b"), BenchError);

  auto other = m;
  CHECK(m.diff(other).empty());
  other.set(ThreatKind::SynFlood, "a", {CellState::Detected, 10.0});
  CHECK(m.diff(other).size() == 1);
  // Latencies that render alike are not a difference.
  other = m;
  other.set(ThreatKind::PortScan, "a", {CellState::Detected, 45.2});
  CHECK(m.diff(other).empty());
}

TEST_CASE("property: raising reference thresholds never turns NotDetected into Detected") {
  Suite suite;
  suite.devices = catalog_subset({"amazon-echo-spot", "google-home"});
  suite.harness = bg(false);
  suite.config = quick(1, 60s);
  suite.resources = ThreatResources::bundled();
  for (const auto kind : {ThreatKind::SynFlood, ThreatKind::DnsFlood, ThreatKind::HttpFlood, ThreatKind::IpfragFlood,
                          ThreatKind::PortScan}) {
    auto s = scenario(kind, "amazon-echo-spot", {{"rate", "50"}, {"duration", "15"}});
    s.name = std::string(to_string(kind));
    if (kind == ThreatKind::PortScan) s.params = {{"n_ports", "8"}, {"rate", "1"}, {"duration", "10"}};
    suite.scenarios.push_back(s);
  }
  std::map<ThreatKind, bool> prev;
  for (const double scale : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    auto cfg = ref_config();
    cfg.syn_half_open = static_cast<int>(500 * scale);
    cfg.http_gets = static_cast<int>(300 * scale);
    cfg.dns_queries = static_cast<int>(500 * scale);
    cfg.frag_incomplete = static_cast<int>(200 * scale);
    cfg.scan_ports = static_cast<int>(std::max(1.0, 5 * scale));
    suite.adapters = {{"ref", "reference", cfg}};
    const auto r = run_suite(suite, 1);
    for (const auto& s : suite.scenarios) {
      const bool det = r.matrix.at(s.kind, "ref").state == CellState::Detected;
      if (prev.count(s.kind) && !prev[s.kind]) CHECK_FALSE(det);
      prev[s.kind] = det;
    }
  }
  // The sweep crosses every threshold.
  for (const auto& [kind, det] : prev) CHECK_FALSE(det);
}

// ---------------------------------------------------------- identification

TEST_CASE("label judgement") {
  CHECK(normalize_label("  Google   Home\t") == "google home");
  CHECK(judge_label("google home", "Google Home") == IdVerdict::Detected);
  CHECK(judge_label("Google Nest", "Google Home") == IdVerdict::Error);
  CHECK(judge_label(kUnknownLabel, "Google Home") == IdVerdict::Unknown);
  CHECK(judge_label("", "Google Home") == IdVerdict::Unknown);
}

TEST_CASE("identification protocol") {
  auto catalog = device_catalog();
  REQUIRE(catalog.size() == 79);
  ExperimentConfig cfg;
  cfg.id_iterations = 2;
  cfg.id_wait = 60s;

  auto run = [&](std::unique_ptr<SafeguardAdapter> a) {
    Harness h(catalog, std::move(a), 1, bg(false));
    return run_identification_experiment(h, cfg);
  };
  auto total = [](const IdentificationResult& r) {
    return r.percent(IdVerdict::Detected) + r.percent(IdVerdict::Error) + r.percent(IdVerdict::Unknown);
  };

  const auto null = run(std::make_unique<NullAdapter>());
  CHECK(null.count(IdVerdict::Unknown) == 79);
  CHECK(null.percent(IdVerdict::Unknown) == doctest::Approx(100.0));
  CHECK(null.unstable == 0);

  // A database naming 20 devices exactly, by their unique DHCP hostnames.
  std::map<std::string, int> uses;
  for (const auto& d : catalog) {
    if (d.facts.dhcp_hostname) ++uses[*d.facts.dhcp_hostname];
  }
  FingerprintDb db;
  std::vector<std::string> covered;
  for (const auto& d : catalog) {
    if (covered.size() == 20) break;
    if (!d.facts.dhcp_hostname || uses[*d.facts.dhcp_hostname] != 1) continue;
    if (d.facts.dhcp_hostname->find_first_of("*?") != std::string::npos) continue;
    db.add({PatternKind::DhcpHostname, *d.facts.dhcp_hostname, d.true_label, 1});
    covered.push_back(d.id);
  }
  REQUIRE(covered.size() == 20);
  auto c = ref_config();
  c.fingerprints = db;
  const auto good = run(std::make_unique<ReferenceDetector>(c));
  CHECK(good.count(IdVerdict::Detected) >= 20);
  CHECK(good.count(IdVerdict::Error) == 0);
  for (const auto& id : covered) CHECK(good.verdicts.at(id) == IdVerdict::Detected);
  CHECK(total(good) == doctest::Approx(100.0));

  // One entry with the wrong label.
  const auto& victim = catalog[0];
  REQUIRE(victim.facts.dhcp_hostname.has_value());
  FingerprintDb wrong;
  wrong.add({PatternKind::DhcpHostname, *victim.facts.dhcp_hostname, "Definitely Not " + victim.true_label, 1});
  c.fingerprints = wrong;
  const auto bad = run(std::make_unique<ReferenceDetector>(c));
  CHECK(bad.verdicts.at(victim.id) == IdVerdict::Error);
  CHECK(total(bad) == doctest::Approx(100.0));
}

// ---------------------------------------------------------------- locality

TEST_CASE("pearson and autocorrelation") {
  CHECK(pearson({1, 2, 3, 4}, {2, 4, 6, 8}) == doctest::Approx(1.0));
  CHECK(pearson({1, 2, 3, 4}, {8, 6, 4, 2}) == doctest::Approx(-1.0));
  CHECK(pearson({1, 1, 1}, {1, 2, 3}) == 0.0);
  std::vector<double> pulse(40, 0);
  for (std::size_t i = 0; i < pulse.size(); i += 5) pulse[i] = 700;
  CHECK(autocorrelation(pulse, 5) > 0.8);
  CHECK(autocorrelation(pulse, 2) < 0.2);
}

TEST_CASE("locality verdicts") {
  auto verdict = [](std::unique_ptr<SafeguardAdapter> a, Duration span) {
    auto h = lab(std::move(a), true, 2);
    h->run_until(span);
    return run_locality_experiment(h->capture_all(CapturePoint::Gateway), h->capture_all(CapturePoint::IotBridge),
                                   h->nat_log(), {}, h->options().plan);
  };
  const auto local = verdict(std::make_unique<NullAdapter>(), 2h);
  CHECK(local.verdict == LocalityVerdict::Local);
  CHECK(local.max_window_bytes == 0);

  CloudProfile beat;
  beat.name = "beat";
  beat.hosts = {"hb.beat.example"};
  beat.heartbeat_period = 300s;
  beat.heartbeat_bytes = 700;
  const auto periodic = verdict(std::make_unique<CloudTelemetryAdapter>(std::make_unique<NullAdapter>(), beat, 1), 2h);
  CHECK(periodic.verdict == LocalityVerdict::CloudPeriodic);
  CHECK(periodic.autocorrelation >= kPeriodicThreshold);
  CHECK(periodic.peak_lag % 5 == 0);

  CloudProfile mirror;
  mirror.name = "mirror";
  mirror.hosts = {"up.mirror.example"};
  mirror.heartbeat_period = 0s;
  mirror.mirror_fraction = 0.1;
  const auto corr = verdict(std::make_unique<CloudTelemetryAdapter>(std::make_unique<NullAdapter>(), mirror, 1), 2h);
  CHECK(corr.verdict == LocalityVerdict::CloudCorrelated);
  CHECK(corr.correlation >= kCorrelatedThreshold);

  CHECK_THROWS_WITH_AS(verdict(std::make_unique<NullAdapter>(), 300s), doctest::Contains("INSUFFICIENT_DATA"),
                       BenchError);
}

// ------------------------------------------------------------------ parties

TEST_CASE("party classification") {
  const auto db = PartyDb::load(default_data_dir() / "party_db.csv");
  CHECK(registrable_domain("api.mixpanel.com") == "mixpanel.com");
  CHECK(registrable_domain("A.B.Example") == "b.example");
  CHECK(registrable_domain("localhost") == "localhost");
  CHECK(registrable_domain("192.0.2.1") == "192.0.2.1");
  std::vector<DestinationRecord> in{{"api.mixpanel.com", 10}, {"update.avira-like.example", 20},
                                    {"ocsp.digicert.com", 5}, {"unknown.example", 1}, {"192.0.2.1", 1}};
  const auto out = classify_parties(in, db);
  REQUIRE(out.size() == in.size());
  CHECK(out[0].party == Party::Third);
  CHECK(out[1].party == Party::First);
  CHECK(out[2].party == Party::Support);
  CHECK(out[3].party == Party::Unclassified);
  CHECK(out[4].party == Party::Unclassified);
  for (std::size_t i = 0; i < in.size(); ++i) CHECK(out[i].bytes_total == in[i].bytes_total);
  const auto again = classify_parties(in, db);
  for (std::size_t i = 0; i < in.size(); ++i) CHECK(again[i].party == out[i].party);
  CHECK(classify_parties(in, PartyDb{})[0].party == Party::Unclassified);
  CHECK_THROWS_AS(PartyDb::parse("x.example,FOURTH,Org\n"), BenchError);
}

// ----------------------------------------------------------------- overhead

TEST_CASE("overhead arithmetic") {
  const AddressPlan plan;
  const Endpoint wan{plan.safeguard_wan_mac, plan.safeguard_wan_ip, 30000};
  const Endpoint dev = ep({10, 0, 0, 120}, 40000);
  const Endpoint cloud = ep({192, 0, 2, 1}, 443);
  std::vector<PacketRecord> g, b;
  for (int i = 0; i < 100; ++i) g.push_back(sized(Duration{i}, wan, cloud, 1000));
  for (int i = 0; i < 80; ++i) b.push_back(sized(Duration{i}, dev, cloud, 1000));
  // Replies and LAN-local chatter do not count.
  g.push_back(sized(200us, cloud, wan, 500));
  b.push_back(sized(200us, dev, ep({10, 0, 0, 255}, 67), 300));
  const auto gw = test::trace_of(g, CapturePoint::Gateway);
  const auto br = test::trace_of(b, CapturePoint::IotBridge);
  const auto t = compute_overhead(gw, br, plan);
  CHECK(t.t_g == 100000);
  CHECK(t.t_d == 80000);
  CHECK(t.t_s == 20000);
  CHECK(t.ov == doctest::Approx(0.2));
  CHECK_FALSE(t.empty);
  CHECK_THROWS_WITH_AS(compute_overhead(test::trace_of({}, CapturePoint::Gateway), br, plan),
                       doctest::Contains("NEGATIVE_TS"), BenchError);
  const auto none = compute_overhead(Trace{}, Trace{}, plan);
  CHECK(none.empty);
  CHECK(none.ov == 0.0);
}

TEST_CASE("property: subtraction equals ground-truth attribution") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    std::unique_ptr<SafeguardAdapter> a;
    if (seed % 2) {
      a = std::make_unique<CloudTelemetryAdapter>(std::make_unique<NullAdapter>(), avira_like_profile(), seed);
    } else {
      a = std::make_unique<NullAdapter>();
    }
    auto h = lab(std::move(a), true, seed);
    h->run_until(3600s);
    const auto gw = h->capture_all(CapturePoint::Gateway);
    const auto t = compute_overhead(gw, h->capture_all(CapturePoint::IotBridge), h->options().plan);
    CHECK(t.t_g == t.t_s + t.t_d);
    CHECK(t.t_s == ground_truth_safeguard_bytes(gw, h->options().plan));
    CHECK(t.ov >= 0.0);
    CHECK(t.ov <= 1.0);
    CHECK((seed % 2 == 1) == (t.t_s > 0));
  }
}

// ---------------------------------------------------------- overprotection

TEST_CASE("overprotection") {
  auto make = [](std::unique_ptr<SafeguardAdapter> a) {
    auto h = std::make_unique<Harness>(catalog_subset({"amazon-echo-spot", "google-home", "wyze-cam-v2"}), std::move(a),
                                       3, bg(false));
    for (const auto& d : h->devices()) h->connect_device(d.id);
    h->run_until(10s);
    return h;
  };
  {
    auto h = make(std::make_unique<NullAdapter>());
    const auto corpus = generate_benign_corpus(*h, h->now() + 1s, 6h, 9);
    CHECK(!corpus.empty());
    CHECK(run_overprotection(*h, corpus).count() == 0);
  }
  {
    auto h = make(std::make_unique<ReferenceDetector>(ref_config()));
    const auto corpus = generate_benign_corpus(*h, h->now() + 1s, 6h, 9);
    OverprotectionOptions opt;
    opt.gateway_side = gateway_probe(*h, h->now() + 3600s);
    opt.port_forward = "google-home";
    const auto r = run_overprotection(*h, corpus, opt);
    CHECK(r.packets == corpus.size());
    CHECK(r.count("PORT_SCAN") == 1);
    CHECK(r.count() <= 4);
  }
  {
    auto h = make(std::make_unique<NullAdapter>());
    auto corpus = generate_benign_corpus(*h, h->now() + 1s, 1h, 9);
    corpus.truth.assign(corpus.size(), GroundTruth{GroundTruth::Origin::Device, "x", 5});
    CHECK_THROWS_AS(run_overprotection(*h, corpus), BenchError);
  }
}

// -------------------------------------------------------------- consistency

TEST_CASE("time consistency") {
  Suite suite;
  suite.devices = catalog_subset({"amazon-echo-spot", "google-home"});
  suite.harness = bg(true);
  suite.config = quick(2, 60s);
  suite.resources = ThreatResources::bundled();
  suite.scenarios = {scenario(ThreatKind::SynFlood, "amazon-echo-spot", {{"rate", "80"}, {"duration", "10"}}),
                     scenario(ThreatKind::PortScan, "google-home", {{"n_ports", "40"}, {"rate", "10"}})};
  suite.adapters = {{"ref", "reference", ref_config()}, {"null", "null", {}}};

  const auto steady = run_consistency(suite);
  CHECK(steady.runs.size() == 3);
  CHECK(steady.consistent());
  CHECK(steady.runs[0].at(ThreatKind::SynFlood, "ref").state == CellState::Detected);

  auto one = suite;
  one.config.consistency_points = 1;
  CHECK(run_consistency(one).diffs.empty());

  auto flaky = suite;
  flaky.factory = [](const AdapterSpec& spec, std::uint64_t seed) -> std::unique_ptr<SafeguardAdapter> {
    auto cfg = spec.config;
    cfg.syn_half_open = seed % 2 ? 300 : 100000;
    return std::make_unique<ReferenceDetector>(cfg, spec.name);
  };
  flaky.adapters = {{"flaky", "reference", ref_config()}};
  const auto r = run_consistency(flaky);
  CHECK_FALSE(r.consistent());
  for (const auto& d : r.diffs) CHECK(d.find("SYN_FLOOD/flaky") != std::string::npos);

  // A threshold that only moves the alert time drifts without differing.
  auto slow = suite;
  slow.factory = [](const AdapterSpec& spec, std::uint64_t seed) -> std::unique_ptr<SafeguardAdapter> {
    auto cfg = spec.config;
    cfg.syn_half_open = seed % 2 ? 100 : 700;
    return std::make_unique<ReferenceDetector>(cfg, spec.name);
  };
  slow.adapters = {{"slow", "reference", ref_config()}};
  const auto d = run_consistency(slow);
  CHECK(d.consistent());
  REQUIRE_FALSE(d.latency_drift.empty());
  CHECK(d.latency_drift.front().find("SYN_FLOOD/slow: ✓(") != std::string::npos);
}
