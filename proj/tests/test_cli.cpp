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

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

#include "sgbench/cli.hpp"
#include "sgbench/dns.hpp"
#include "sgbench/manifest.hpp"
#include "sgbench/pcap.hpp"
#include "sgbench/report.hpp"
#include "sgbench/resources.hpp"
#include "sgbench/signature.hpp"
#include "support.hpp"

using namespace sgbench;
using namespace std::chrono_literals;
namespace fs = std::filesystem;
using nlohmann::json;
using test::ep;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int n = 0;
    path = fs::temp_directory_path() / ("sgbench-cli-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

fs::path write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kSmall = R"(
[run]
name = small
seed = 3

[experiment]
iterations = 2
wait_after_threat = 60

[harness]
background_traffic = true
background_interval_scale = 0.5

[topology]
catalog = amazon-echo-spot, google-home

[adapter reference]
type = reference
learning_window = 600
port_scan_mode = off

[adapter null]
type = null

[scenario syn]
kind = SYN_FLOOD
targets = amazon-echo-spot
rate = 80
duration = 10

[scenario scan]
kind = PORT_SCAN
targets = google-home
n_ports = 40
rate = 10
)";

std::string error_of(const std::string& text, const fs::path& base = default_data_dir()) {
  try {
    parse_manifest(text, base);
  } catch (const BenchError& e) {
    CHECK(e.code() == ErrorCode::ManifestError);
    return e.what();
  }
  FAIL("manifest parsed: " << text);
  return {};
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

cli::RunOptions opts(const fs::path& manifest, const fs::path& out) {
  cli::RunOptions o;
  o.manifest = manifest;
  o.out = out;
  return o;
}

}  // namespace

// ----------------------------------------------------------------- manifest

TEST_CASE("bundled manifests parse") {
  const auto suite = load_manifest(default_data_dir() / "paper-suite.manifest");
  CHECK(suite.seed == 20211);
  CHECK(suite.scenarios.size() == 17);
  CHECK(suite.adapters.size() == 2);
  CHECK(suite.experiment.iterations == 30);
  CHECK(suite.experiment.wait_after_threat == 1200s);
  std::set<ThreatKind> kinds;
  for (const auto& s : suite.scenarios) kinds.insert(s.kind);
  CHECK(kinds.size() == kAllThreatKinds.size());

  const auto lab = load_manifest(default_data_dir() / "lab-profile.manifest");
  CHECK(lab.devices.size() == 79);
  CHECK(lab.scenarios.empty());
  CHECK(lab.experiment.identification);
}

TEST_CASE("manifest errors name the section and field") {
  CHECK(contains(error_of("[run]\nname = x\n"), "seed is required"));
  CHECK(contains(error_of("[run]\nseed = abc\n"), "seed"));
  CHECK(contains(error_of("[run]\nseed = 1\n[experiment]\nloops = 3\n"), "[experiment]"));
  CHECK(contains(error_of("[run]\nseed = 1\n[experiment]\niterations = many\n"), "iterations"));
  CHECK(contains(error_of("[run]\nseed = 1\n[experiment]\niterations = 0\n"), "[experiment]"));
  CHECK(contains(error_of("[run]\nseed = 1\n[bogus]\n"), "unknown section"));
  CHECK(contains(error_of("[run]\nseed = 1\n[resources]\nblocklist = nowhere.txt\n"), "blocklist"));
  CHECK(contains(error_of("[run]\nseed = 1\n[adapter a]\ntype = magic\n"), "type"));
  CHECK(contains(error_of("[run]\nseed = 1\n[topology]\ncatalog = no-such-device\n"), "catalog"));
  CHECK(contains(error_of("[run]\nseed = 1\n[device d]\nlabel = Thing\n"), "mac is required"));
  CHECK(contains(error_of("[run]\nseed = 1\n[device a]\nmac = 02:00:00:00:00:01\n[device b]\nmac = 02:00:00:00:00:01\n"),
                 "duplicate MAC"));
  const std::string head = "[run]\nseed = 1\n[topology]\ncatalog = google-home\n[adapter n]\ntype = null\n";
  CHECK(contains(error_of(head + "[scenario s]\nkind = SYN_FLOOD\ntargets = elsewhere\n"), "targets"));
  CHECK(contains(error_of(head + "[scenario s]\ntargets = google-home\n"), "kind is required"));
  CHECK(contains(error_of(head + "[scenario s]\nkind = TELEPORT\ntargets = google-home\n"), "[scenario s]"));
  CHECK(contains(error_of(head + "[scenario s]\nkind = SYN_FLOOD\ntargets = google-home\nrate = fast\n"), "rate"));
  CHECK(contains(error_of(head + "[scenario s]\nkind = SYN_FLOOD\ntargets = google-home\ntag = 0\n"), "tag"));
  CHECK(contains(error_of(head + "[scenario s]\nkind = SYN_FLOOD\ntargets = google-home\n"
                                 "[scenario s]\nkind = SYN_FLOOD\ntargets = google-home\n"),
                 "duplicate scenario"));
  CHECK(contains(error_of("[run]\nseed = 1\n[topology]\ncatalog = google-home\n"
                          "[scenario s]\nkind = SYN_FLOOD\ntargets = google-home\n"),
                 "no [adapter"));
}

TEST_CASE("output directory precedence") {
  ::unsetenv(cli::kOutputEnv);
  CHECK(cli::output_dir(std::nullopt, std::nullopt) == "out");
  CHECK(cli::output_dir(std::nullopt, fs::path("m")) == "m");
  ::setenv(cli::kOutputEnv, "env", 1);
  CHECK(cli::output_dir(std::nullopt, fs::path("m")) == "env");
  CHECK(cli::output_dir(fs::path("flag"), fs::path("m")) == "flag");
  ::unsetenv(cli::kOutputEnv);
}

// ---------------------------------------------------------------------- run

TEST_CASE("run: exit codes for manifest problems") {
  TempDir tmp;
  std::ostringstream out, err;
  CHECK(cli::cmd_run(opts(tmp.path / "missing.manifest", tmp.path / "o"), out, err) == cli::kExitManifest);
  const auto bad = write(tmp.path / "bad.manifest", kSmall + "\n[resources]\nblocklist = gone.txt\n");
  err.str("");
  CHECK(cli::cmd_run(opts(bad, tmp.path / "o"), out, err) == cli::kExitManifest);
  CHECK(contains(err.str(), "blocklist"));
  CHECK(contains(err.str(), "[resources]"));
}

TEST_CASE("run: empty scenario list") {
  TempDir tmp;
  const auto m = write(tmp.path / "empty.manifest", "[run]\nname = empty\nseed = 1\n[adapter null]\ntype = null\n");
  std::ostringstream out, err;
  CHECK(cli::cmd_run(opts(m, tmp.path / "o"), out, err) == cli::kExitOk);
  const auto doc = json::parse(slurp(tmp.path / "o" / "report.json"));
  CHECK(doc["matrix"]["rows"].empty());
  CHECK(doc["adapter_faults"] == 0);
}

TEST_CASE("run: report, matrix, captures and rendering") {
  TempDir tmp;
  const auto m = write(tmp.path / "small.manifest", kSmall);
  std::ostringstream out, err;
  REQUIRE(cli::cmd_run(opts(m, tmp.path / "a"), out, err) == cli::kExitOk);
  CHECK(contains(out.str(), "reference: syn detected"));
  CHECK(contains(out.str(), "null: syn not detected"));

  const auto doc = json::parse(slurp(tmp.path / "a" / "report.json"));
  CHECK(doc["name"] == "small");
  CHECK(doc["seed"] == 3);
  CHECK(doc["notes"].size() == standard_notes().size());
  CHECK(doc["outcomes"]["reference"].size() == 2);
  CHECK(doc["outcomes"]["reference"][0]["iterations"].size() == 2);
  const auto matrix = matrix_from_json(doc);
  CHECK(matrix.at(ThreatKind::SynFlood, "reference").state == CellState::Detected);
  CHECK(matrix.at(ThreatKind::PortScan, "reference").state == CellState::Detected);
  CHECK(matrix.at(ThreatKind::SynFlood, "null").state == CellState::NotDetected);
  CHECK(slurp(tmp.path / "a" / "matrix.txt") == matrix.render_text());
  for (const auto* a : {"reference", "null"}) {
    for (const auto* s : {"syn", "scan"}) {
      const auto gw = tmp.path / "a" / "pcaps" / a / (std::string(s) + ".gateway.pcap");
      const auto br = tmp.path / "a" / "pcaps" / a / (std::string(s) + ".bridge.pcap");
      REQUIRE(fs::exists(gw));
      REQUIRE(fs::exists(br));
      CHECK(read_trace(br, CapturePoint::IotBridge).size() > 0);
    }
  }

  // Same seed, same report apart from metadata; --jobs does not change it.
  auto o2 = opts(m, tmp.path / "b");
  o2.jobs = 2;
  REQUIRE(cli::cmd_run(o2, out, err) == cli::kExitOk);
  auto again = json::parse(slurp(tmp.path / "b" / "report.json"));
  auto first = doc;
  CHECK(again["metadata"]["jobs"] == 2);
  first.erase("metadata");
  again.erase("metadata");
  CHECK(first == again);

  std::ostringstream text, csv, e2;
  CHECK(cli::cmd_report(tmp.path / "a" / "report.json", "text", text, e2) == cli::kExitOk);
  CHECK(contains(text.str(), "SYN Flooding"));
  CHECK(contains(text.str(), "✓("));
  CHECK(cli::cmd_report(tmp.path / "a" / "report.json", "csv", csv, e2) == cli::kExitOk);
  std::vector<std::string> lines;
  std::istringstream cs(csv.str());
  for (std::string l; std::getline(cs, l);) lines.push_back(l);
  REQUIRE(lines.size() == 1 + 2 * 2);
  CHECK(lines[0] == "kind,adapter,state,latency_s");
  CHECK(contains(csv.str(), "SYN_FLOOD,null,NOT_DETECTED,"));
  CHECK(cli::cmd_report(tmp.path / "a" / "report.json", "yaml", text, e2) == cli::kExitFailure);
  write(tmp.path / "junk.json", "{\"hello\": 1}");
  CHECK(cli::cmd_report(tmp.path / "junk.json", "text", text, e2) == cli::kExitManifest);
  write(tmp.path / "broken.json", "{");
  CHECK(cli::cmd_report(tmp.path / "broken.json", "text", text, e2) == cli::kExitManifest);
}

TEST_CASE("report JSON round trip") {
  RunReport r;
  r.name = "rt";
  r.seed = 9;
  r.result.matrix.add_adapter("x");
  r.result.matrix.set(ThreatKind::UdpFlood, "x", {CellState::Detected, 610.0});
  r.result.matrix.set(ThreatKind::Doh, "x", {CellState::NotClaimed, std::nullopt});
  const auto doc = report_to_json(r);
  CHECK(report_to_json(r).dump() == doc.dump());
  const auto back = matrix_from_json(json::parse(doc.dump()));
  CHECK(back.diff(r.result.matrix).empty());
  CHECK(back.at(ThreatKind::UdpFlood, "x").render() == "✓(10m)");
  CHECK_THROWS_AS(matrix_from_json(json::object()), BenchError);
}

// ------------------------------------------------------------------- corpus

TEST_CASE("gen-corpus and validate") {
  TempDir tmp;
  const auto m = default_data_dir() / "paper-suite.manifest";
  const auto manifest = load_manifest(m);
  std::ostringstream out, err;
  REQUIRE(cli::cmd_gen_corpus(opts(m, tmp.path / "c1"), out, err) == cli::kExitOk);
  REQUIRE(cli::cmd_gen_corpus(opts(m, tmp.path / "c2"), out, err) == cli::kExitOk);

  std::size_t pcaps = 0;
  for (const auto& e : fs::directory_iterator(tmp.path / "c1")) pcaps += e.path().extension() == ".pcap";
  CHECK(pcaps == 18);
  for (const auto& s : manifest.scenarios) {
    const auto pcap = tmp.path / "c1" / (s.name + ".pcap");
    const auto side = tmp.path / "c1" / (s.name + ".json");
    REQUIRE(fs::exists(pcap));
    REQUIRE(fs::exists(side));
    const auto j = json::parse(slurp(side));
    CHECK(j["kind"] == to_string(s.kind));
    CHECK(j["packets"] == read_trace(pcap, CapturePoint::IotBridge).size());
    CHECK(slurp(pcap) == slurp(tmp.path / "c2" / (s.name + ".pcap")));
  }
  CHECK(json::parse(slurp(tmp.path / "c1" / "benign.json"))["kind"] == "BENIGN");
  CHECK(slurp(tmp.path / "c1" / "benign.pcap") == slurp(tmp.path / "c2" / "benign.pcap"));

  std::ostringstream vout, verr;
  CHECK(cli::cmd_validate(tmp.path / "c1", vout, verr) == cli::kExitOk);
  CHECK(contains(vout.str(), "18 file(s) validated"));

  // A truncated capture and a missing directory both fail validation.
  fs::resize_file(tmp.path / "c2" / "syn-flood.pcap", 30);
  CHECK(cli::cmd_validate(tmp.path / "c2", vout, verr) == cli::kExitValidation);
  CHECK(contains(verr.str(), "syn-flood.pcap"));
  CHECK(cli::cmd_validate(tmp.path / "nowhere", vout, verr) == cli::kExitValidation);
  fs::create_directories(tmp.path / "none");
  CHECK(cli::cmd_validate(tmp.path / "none", vout, verr) == cli::kExitValidation);
}

// ---------------------------------------------------------------- signature

namespace {

std::vector<std::string> rules_hit(const std::vector<PacketRecord>& pkts, const SignatureRules& r = {}) {
  std::vector<std::string> out;
  for (const auto& h : run_signature_rules(test::trace_of(pkts, CapturePoint::IotBridge), r)) out.push_back(h.rule);
  return out;
}

const Endpoint kAttacker = ep({203, 0, 113, 9}, 40000, 0x99);
const Endpoint kDevice = ep({10, 0, 0, 100}, 80, 0x01);

}  // namespace

TEST_CASE("signature rate rules fire at the threshold, once per pair") {
  for (const int n : {199, 200, 600}) {
    std::vector<PacketRecord> pkts;
    for (int i = 0; i < n; ++i) {
      auto src = kAttacker;
      src.port = static_cast<std::uint16_t>(1024 + i);
      pkts.push_back(make_tcp(Timestamp{i * 10ms}, src, kDevice, tcp_flag::kSyn, 1, 0));
    }
    const auto hits = rules_hit(pkts);
    CHECK(hits == (n >= 200 ? std::vector<std::string>{"syn-rate"} : std::vector<std::string>{}));
  }
  // The same 200 SYNs spread over 20 s stay under the rate.
  std::vector<PacketRecord> slow;
  for (int i = 0; i < 200; ++i) slow.push_back(make_tcp(Timestamp{i * 100ms}, kAttacker, kDevice, tcp_flag::kSyn, 1, 0));
  CHECK(rules_hit(slow).empty());
}

TEST_CASE("signature sweep, probe, login and blocklist rules") {
  std::vector<PacketRecord> sweep;
  for (int p = 1; p <= 19; ++p) {
    auto dst = kDevice;
    dst.port = static_cast<std::uint16_t>(p);
    sweep.push_back(make_tcp(Timestamp{p * 1s}, kAttacker, dst, tcp_flag::kSyn, 1, 0));
  }
  CHECK(rules_hit(sweep).empty());
  auto dst = kDevice;
  dst.port = 20;
  sweep.push_back(make_tcp(Timestamp{20s}, kAttacker, dst, tcp_flag::kSyn, 1, 0));
  CHECK(rules_hit(sweep) == std::vector<std::string>{"port-sweep"});

  CHECK(rules_hit({make_tcp(Timestamp{1s}, kAttacker, kDevice, 0, 1, 0)}) == std::vector<std::string>{"os-probe"});
  CHECK(rules_hit({make_tcp(Timestamp{1s}, kAttacker, kDevice, tcp_flag::kSyn | tcp_flag::kFin, 1, 0)}) ==
        std::vector<std::string>{"os-probe"});

  auto telnet = kDevice;
  telnet.port = 23;
  const std::string pass = "PASS admin\r\n";
  auto login = make_tcp(Timestamp{1s}, kAttacker, telnet, tcp_flag::kAck | tcp_flag::kPsh, 1, 1,
                        std::vector<std::uint8_t>(pass.begin(), pass.end()));
  CHECK(rules_hit({login}) == std::vector<std::string>{"cleartext-login"});

  auto query = [](const std::string& name) {
    const auto bytes = dns::encode(dns::make_query(7, name));
    return make_udp(Timestamp{1s}, ep({10, 0, 0, 100}, 5353, 0x01), ep({198, 51, 100, 53}, 53), bytes);
  };
  const auto rules = SignatureRules::with_blocklist({"Bad.Example"});
  CHECK(rules_hit({query("bad.example")}, rules) == std::vector<std::string>{"blocklist-dns"});
  CHECK(rules_hit({query("good.example")}, rules).empty());
  CHECK(rules_hit({query("bad.example")}).empty());
}
