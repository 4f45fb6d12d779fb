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

#include "sgbench/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sgbench/detector.hpp"
#include "sgbench/manifest.hpp"
#include "sgbench/pcap.hpp"
#include "sgbench/report.hpp"
#include "sgbench/signature.hpp"

namespace sgbench::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr auto kBenignSpan = std::chrono::hours(1);

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw BenchError(ErrorCode::IoError, "cannot write " + path.string());
  f << text;
  if (!f) throw BenchError(ErrorCode::IoError, "write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw BenchError(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// Scenario names become file names.
std::string file_stem(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  return out.empty() ? "scenario" : out;
}

/// Manifest problems, including files it names, map to exit 2.
std::optional<Manifest> load(const fs::path& path, std::ostream& err) {
  try {
    return load_manifest(path);
  } catch (const BenchError& e) {
    err << "manifest error: " << e.what() << '\n';
    return std::nullopt;
  }
}

struct AdapterRun {
  SuiteResult result;
  std::optional<TrafficProfile> profile;
  std::optional<IdentificationResult> identification;
  std::string error;
};

AdapterRun run_adapter(Suite suite, const AdapterSpec& spec, std::uint64_t seed, const PartyDb& parties,
                       const SuiteHooks& hooks) {
  AdapterRun r;
  suite.adapters = {spec};
  r.result = run_suite(suite, seed, Timestamp{0}, hooks);
  if (suite.config.profile_window > Duration::zero()) r.profile = run_traffic_profile(suite, spec, seed, parties);
  if (suite.config.identification) r.identification = run_suite_identification(suite, spec, seed);
  return r;
}

}  // namespace

fs::path output_dir(const std::optional<fs::path>& flag, const std::optional<fs::path>& manifest_output) {
  if (flag) return *flag;
  if (const char* env = std::getenv(kOutputEnv); env && *env) return env;
  if (manifest_output) return *manifest_output;
  return "out";
}

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  const auto wall0 = std::chrono::steady_clock::now();
  auto manifest = load(opts.manifest, err);
  if (!manifest) return kExitManifest;
  const auto seed = opts.seed.value_or(manifest->seed);
  try {
    auto suite = manifest->suite();
    suite.config.seed = seed;
    PartyDb parties;
    if (suite.config.profile_window > Duration::zero()) {
      parties = PartyDb::load(manifest->resources.party_db.value_or(default_data_dir() / "party_db.csv"));
    }
    const auto dir = output_dir(opts.out, manifest->output_dir);
    fs::create_directories(dir / "pcaps");

    std::mutex io;
    SuiteHooks hooks;
    hooks.on_capture = [&](const std::string& adapter, const ThreatPlan& plan, const Trace& gw, const Trace& br) {
      const auto sub = dir / "pcaps" / file_stem(adapter);
      const auto stem = file_stem(plan.scenario.name);
      {
        std::lock_guard lock(io);
        fs::create_directories(sub);
      }
      write_trace(gw, sub / (stem + ".gateway.pcap"));
      write_trace(br, sub / (stem + ".bridge.pcap"));
    };
    hooks.on_outcome = [&](const std::string& adapter, const DetectionOutcome& o) {
      std::lock_guard lock(io);
      out << adapter << ": " << o.scenario << " " << (o.detected_any ? "detected" : "not detected");
      if (o.median_latency) out << " (median " << format_latency(*o.median_latency) << ")";
      if (o.faults) out << " [" << o.faults << " adapter faults]";
      out << '\n';
    };

    // Adapters are independent cells; results are folded back in manifest order.
    const auto& specs = suite.adapters;
    std::vector<AdapterRun> runs(specs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (auto i = next++; i < specs.size(); i = next++) {
        try {
          runs[i] = run_adapter(suite, specs[i], seed, parties, hooks);
        } catch (const std::exception& e) {
          runs[i].error = e.what();
        }
      }
    };
    const auto n = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(opts.jobs, 1)), 1, std::max<std::size_t>(specs.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    RunReport report;
    report.name = manifest->name;
    report.seed = seed;
    report.config = suite.config;
    report.adapters = specs;
    report.scenarios = suite.scenarios;
    report.notes = standard_notes();
    for (std::size_t i = 0; i < specs.size(); ++i) {
      if (!runs[i].error.empty()) {
        err << "adapter " << specs[i].name << ": " << runs[i].error << '\n';
        return kExitFailure;
      }
      merge_suite_result(report.result, std::move(runs[i].result));
      if (runs[i].profile) report.profiles[specs[i].name] = std::move(*runs[i].profile);
      if (runs[i].identification) report.identification[specs[i].name] = std::move(*runs[i].identification);
    }

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    json meta{{"tool", "safeguard-bench"},
              {"version", kVersion},
              {"manifest", fs::absolute(opts.manifest).lexically_normal().string()},
              {"output", fs::absolute(dir).lexically_normal().string()},
              {"jobs", n},
              {"started_at", utc_now()},
              {"wall_seconds", wall}};
    write_text(dir / "report.json", report_to_json(report, meta).dump(2) + "\n");
    write_text(dir / "matrix.txt", report.result.matrix.render_text());
    out << report.result.matrix.render_text();
    out << "wrote " << (dir / "report.json").string() << '\n';
    if (report.result.faults > 0) {
      err << report.result.faults << " iteration(s) hit an adapter fault\n";
      return kExitAdapterFault;
    }
    return kExitOk;
  } catch (const BenchError& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::ManifestError ? kExitManifest : kExitFailure;
  }
}

int cmd_gen_corpus(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  auto manifest = load(opts.manifest, err);
  if (!manifest) return kExitManifest;
  const auto seed = opts.seed.value_or(manifest->seed);
  try {
    auto suite = manifest->suite();
    const auto dir = opts.out ? *opts.out : output_dir(std::nullopt, manifest->output_dir) / "corpus";
    fs::create_directories(dir);
    auto options = suite.harness;
    options.record_captures = true;
    options.background_traffic = false;

    auto sidecar = [&](const std::string& stem, json j) {
      write_text(dir / (stem + ".json"), j.dump(2) + "\n");
    };

    for (const auto& base : suite.scenarios) {
      ThreatScenario s = base;
      s.seed = base.seed + seed * 1000003u;
      Harness h(suite.devices, std::make_unique<NullAdapter>(), seed, options);
      for (const auto& d : suite.devices) h.connect_device(d.id);
      h.run_until(h.now() + std::chrono::seconds(10));
      const auto start = h.now() + std::chrono::seconds(1);
      const auto plan = plan_threat(s, h, suite.resources, start);
      apply_plan(h, plan);
      auto end = plan.end + std::chrono::seconds(5);
      h.run_until(end);
      if (s.kind == ThreatKind::OpenPort) {
        // An exposure check: connect attempts from the bridge to each open port.
        const Endpoint scanner{MacAddress{{0x02, 0x1b, 0x00, 0x00, 0x00, 0x66}}, Ipv4Address{10, 0, 0, 66}, 47000};
        std::vector<PacketRecord> probe;
        for (const auto& [id, ports] : plan.open_ports) {
          for (auto port : ports) {
            probe.push_back(make_tcp(end + std::chrono::milliseconds(100) * static_cast<int>(probe.size()), scanner,
                                     h.endpoint_of(id, port), tcp_flag::kSyn, 1000 + port, 0));
          }
        }
        h.inject(InjectionPoint::IotLanSide, probe, s.tag);
        end += std::chrono::seconds(5);
        h.run_until(end);
      }
      auto trace = h.capture(CapturePoint::IotBridge, start, end + Duration{1});
      const auto stem = file_stem(base.name);
      write_trace(trace, dir / (stem + ".pcap"));
      sidecar(stem, {{"scenario", base.name},
                     {"kind", to_string(s.kind)},
                     {"display", display_name(s.kind)},
                     {"security_threat", is_security_threat(s.kind)},
                     {"origin", to_string(s.origin)},
                     {"targets", s.targets},
                     {"seed", s.seed},
                     {"tag", s.tag},
                     {"params", s.params},
                     {"capture_point", "iot_bridge"},
                     {"start", to_seconds(start)},
                     {"end", to_seconds(end)},
                     {"packets", trace.size()},
                     {"bytes", trace.total_bytes()}});
      out << stem << ".pcap: " << trace.size() << " packets\n";
    }

    // Background traffic only: every device behind a pass-through safeguard.
    auto benign_options = options;
    benign_options.background_traffic = true;
    Harness h(suite.devices, std::make_unique<NullAdapter>(), seed, benign_options);
    for (const auto& d : suite.devices) h.connect_device(d.id);
    h.run_until(h.now() + kBenignSpan);
    const auto trace = h.capture_all(CapturePoint::IotBridge);
    write_trace(trace, dir / "benign.pcap");
    sidecar("benign", {{"scenario", "benign"},
                       {"kind", "BENIGN"},
                       {"security_threat", false},
                       {"capture_point", "iot_bridge"},
                       {"seed", seed},
                       {"devices", suite.devices.size()},
                       {"packets", trace.size()},
                       {"bytes", trace.total_bytes()}});
    out << "benign.pcap: " << trace.size() << " packets\n";

    // The ruleset's blocklist travels with the corpus.
    std::string lists;
    for (const auto& host : suite.resources.blocklist) lists += host + "\n";
    write_text(dir / "blocklist.txt", lists);
    return kExitOk;
  } catch (const BenchError& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::ManifestError ? kExitManifest : kExitFailure;
  }
}

int cmd_validate(const fs::path& dir, std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(dir)) {
    err << "not a directory: " << dir.string() << '\n';
    return kExitValidation;
  }
  std::vector<fs::path> pcaps;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".pcap") pcaps.push_back(e.path());
  }
  std::sort(pcaps.begin(), pcaps.end());
  if (pcaps.empty()) {
    err << "no pcap files in " << dir.string() << '\n';
    return kExitValidation;
  }
  const auto list = fs::exists(dir / "blocklist.txt") ? dir / "blocklist.txt" : default_data_dir() / "blocklist.txt";
  SignatureRules rules;
  try {
    rules = SignatureRules::with_blocklist(load_blocklist(list));
  } catch (const BenchError& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  std::vector<std::string> failing;
  for (const auto& path : pcaps) {
    const auto name = path.filename().string();
    auto side = path;
    side.replace_extension(".json");
    std::string kind;
    bool must_fire = false, must_be_quiet = false;
    try {
      const auto j = json::parse(read_text(side));
      kind = j.at("kind").get<std::string>();
      must_be_quiet = kind == "BENIGN";
      must_fire = !must_be_quiet && is_security_threat(parse_threat_kind(kind));
    } catch (const std::exception& e) {
      failing.push_back(name + ": sidecar: " + e.what());
      continue;
    }
    std::vector<RuleHit> hits;
    try {
      hits = run_signature_rules(read_trace(path, CapturePoint::IotBridge), rules);
    } catch (const BenchError& e) {
      failing.push_back(name + ": " + e.what());
      continue;
    }
    std::set<std::string> names;
    for (const auto& h : hits) names.insert(h.rule);
    std::string fired;
    for (const auto& r : names) fired += (fired.empty() ? "" : ",") + r;
    const bool ok = must_fire ? !hits.empty() : must_be_quiet ? hits.empty() : true;
    out << (ok ? "ok   " : "FAIL ") << name << "  " << kind << "  " << hits.size() << " hit(s)"
        << (fired.empty() ? "" : " [" + fired + "]") << (must_fire || must_be_quiet ? "" : " (informational)") << '\n';
    if (!ok) failing.push_back(name + (must_fire ? ": no rule fired" : ": benign traffic fired " + fired));
  }
  if (!failing.empty()) {
    err << failing.size() << " failing file(s):\n";
    for (const auto& f : failing) err << "  " << f << '\n';
    return kExitValidation;
  }
  out << pcaps.size() << " file(s) validated\n";
  return kExitOk;
}

int cmd_report(const fs::path& report, const std::string& format, std::ostream& out, std::ostream& err) {
  if (format != "text" && format != "csv") {
    err << "unknown format '" << format << "' (text or csv)\n";
    return kExitFailure;
  }
  try {
    const auto doc = json::parse(read_text(report));
    out << (format == "csv" ? render_csv(doc) : render_text(doc));
    return kExitOk;
  } catch (const json::exception& e) {
    err << "malformed report: " << e.what() << '\n';
    return kExitManifest;
  } catch (const BenchError& e) {
    err << "malformed report: " << e.what() << '\n';
    return kExitManifest;
  }
}

}  // namespace sgbench::cli
