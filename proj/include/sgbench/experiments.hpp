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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sgbench/attribution.hpp"
#include "sgbench/detector.hpp"
#include "sgbench/harness.hpp"
#include "sgbench/resources.hpp"
#include "sgbench/threatgen.hpp"

namespace sgbench {

struct ExperimentConfig {
  int iterations = 30;
  Duration wait_after_threat = std::chrono::seconds(1200);
  int id_iterations = 10;
  Duration id_wait = std::chrono::seconds(1800);
  int consistency_points = 3;
  std::uint64_t seed = 1;
  /// Time devices run before the first scenario, so baselines exist.
  Duration warmup = std::chrono::seconds(0);
  /// Length of the per-adapter traffic profile (overhead, locality,
  /// destinations); zero skips it.
  Duration profile_window = std::chrono::seconds(0);
  /// Run the identification protocol per adapter.
  bool identification = false;

  /// Throws INVALID_ARGUMENT.
  void validate() const;
};

// ------------------------------------------------------------- detection

struct IterationOutcome {
  bool detected = false;
  std::optional<double> latency;
  bool adapter_fault = false;
  std::string fault;
};

struct DetectionOutcome {
  std::string scenario;
  ThreatKind kind = ThreatKind::SynFlood;
  bool claimed = true;
  std::vector<IterationOutcome> iterations;
  bool detected_any = false;
  std::optional<double> min_latency;
  std::optional<double> median_latency;
  std::size_t faults = 0;

  /// Recomputes the aggregate fields from `iterations`.
  void aggregate();
};

/// True when `alert` reports `kind` and names one of `targets` (or no device).
bool alert_matches(const Alert& alert, ThreatKind kind, const std::vector<std::string>& targets);

/// Called with the captures of the first iteration of every scenario.
using CaptureSink = std::function<void(const ThreatPlan& plan, const Trace& gateway, const Trace& bridge)>;

/// Runs the generate / wait / poll loop `cfg.iterations` times on the
/// harness's adapter. Iterations clear sliding windows but keep baselines.
DetectionOutcome run_threat_experiment(Harness& h, const ThreatScenario& scenario, ThreatResources& res,
                                       const ExperimentConfig& cfg, const CaptureSink& sink = {});

struct QuarantineCheck {
  bool flood_detected = false;
  std::optional<Timestamp> alert_time;
  /// Benign follow-up packets that still reached the gateway after the alert.
  std::size_t leaked = 0;
  /// Benign follow-up packets sent after the alert.
  std::size_t sent_after_alert = 0;

  bool quarantined() const { return flood_detected && sent_after_alert > 0 && leaked == 0; }
};

/// One flood-then-benign round. The scenario defaults to a SYN flood from the
/// first connected device.
QuarantineCheck run_quarantine_check(Harness& h, ThreatResources& res, const ExperimentConfig& cfg,
                                     std::optional<ThreatScenario> scenario = std::nullopt);

enum class CellState : std::uint8_t { Detected, NotDetected, NotClaimed };

std::string format_latency(double seconds);

/// Terminal columns taken by UTF-8 text (one per code point).
std::size_t display_width(std::string_view s);
std::string pad_display(std::string_view s, std::size_t width);

struct MatrixCell {
  CellState state = CellState::NotDetected;
  std::optional<double> latency;

  /// "✓(30s)", "✗" or "-".
  std::string render() const;
  bool operator==(const MatrixCell&) const = default;
};

class DetectionMatrix {
 public:
  void add_adapter(const std::string& name);
  void set(ThreatKind kind, const std::string& adapter, MatrixCell cell);
  const MatrixCell& at(ThreatKind kind, const std::string& adapter) const;
  bool has(ThreatKind kind, const std::string& adapter) const;
  const std::vector<std::string>& adapters() const { return adapters_; }
  /// Threat kinds in table order that have at least one cell.
  std::vector<ThreatKind> kinds() const;

  std::string render_text() const;
  /// One line per cell whose rendering differs between the two matrices.
  std::vector<std::string> diff(const DetectionMatrix& other) const;

 private:
  std::vector<std::string> adapters_;
  std::map<std::pair<ThreatKind, std::string>, MatrixCell> cells_;
};

MatrixCell cell_of(const DetectionOutcome& outcome);

// -------------------------------------------------------- identification

enum class IdVerdict : std::uint8_t { Detected, Error, Unknown };

std::string_view to_string(IdVerdict v);
/// Lowercased with whitespace runs collapsed to one space.
std::string normalize_label(std::string_view label);
IdVerdict judge_label(std::string_view returned, std::string_view truth);

struct IdentificationResult {
  /// Majority verdict and label per device.
  std::map<std::string, IdVerdict> verdicts;
  std::map<std::string, std::string> labels;
  /// Devices whose verdict changed between iterations.
  std::size_t unstable = 0;
  int iterations = 0;

  std::size_t count(IdVerdict v) const;
  double percent(IdVerdict v) const;
};

IdentificationResult run_identification_experiment(Harness& h, const ExperimentConfig& cfg);

// -------------------------------------------------------------- locality

enum class LocalityVerdict : std::uint8_t { Local, CloudCorrelated, CloudPeriodic, Undetermined };

std::string_view to_string(LocalityVerdict v);

struct ActivityWindow {
  Timestamp start{0};
  Timestamp end{0};
};

struct LocalityReport {
  LocalityVerdict verdict = LocalityVerdict::Undetermined;
  double correlation = 0;
  double autocorrelation = 0;
  std::size_t peak_lag = 0;
  /// Largest safeguard egress inside one activity window.
  std::uint64_t max_window_bytes = 0;
  std::vector<double> safeguard_bins;
  std::vector<double> device_bins;
};

inline constexpr double kCorrelatedThreshold = 0.7;
inline constexpr double kPeriodicThreshold = 0.8;
inline constexpr std::uint64_t kLocalEgressLimit = 1024;
inline constexpr std::size_t kMinLocalityBins = 10;

double pearson(const std::vector<double>& a, const std::vector<double>& b);
/// Normalized autocorrelation at `lag`; 0 for a constant series.
double autocorrelation(const std::vector<double>& x, std::size_t lag);

/// Throws INSUFFICIENT_DATA below ten bins.
LocalityReport run_locality_experiment(const Trace& gateway, const Trace& bridge, const NatLog& nat,
                                       const std::vector<ActivityWindow>& activity = {},
                                       const AddressPlan& plan = {}, Duration bin = std::chrono::seconds(60));

// --------------------------------------------------------------- parties

struct PartyEntry {
  Party party = Party::Unclassified;
  std::string org;
};

class PartyDb {
 public:
  void add(const std::string& domain, PartyEntry entry);
  /// Exact host first, then its registrable domain.
  std::optional<PartyEntry> lookup(std::string_view host) const;
  std::size_t size() const { return entries_.size(); }

  /// `domain,class,org` lines; `#` comments.
  static PartyDb parse(std::string_view text);
  static PartyDb load(const std::filesystem::path& path);

 private:
  std::map<std::string, PartyEntry> entries_;
};

/// Last two labels of a hostname ("api.mixpanel.com" -> "mixpanel.com").
std::string registrable_domain(std::string_view host);

std::vector<DestinationRecord> classify_parties(std::vector<DestinationRecord> destinations, const PartyDb& db);

// -------------------------------------------------------------- overhead

struct TrafficTotals {
  std::uint64_t t_g = 0;
  std::uint64_t t_s = 0;
  std::uint64_t t_d = 0;
  double ov = 0;
  bool empty = false;
};

/// Outbound bytes only: gateway packets leaving the safeguard's WAN address
/// against device packets seen at the bridge heading off the IoT-LAN.
/// Throws NEGATIVE_TS when the bridge carries more than the gateway.
TrafficTotals compute_overhead(const Trace& gateway, const Trace& bridge, const AddressPlan& plan = {});

/// Outbound gateway bytes whose ground-truth origin is the safeguard.
std::uint64_t ground_truth_safeguard_bytes(const Trace& gateway, const AddressPlan& plan = {});

// --------------------------------------------------------- overprotection

/// LAN-side background traffic for every device in `h`, which must be
/// connected. Gaps between bursts are stretched by `interval_scale`.
Trace generate_benign_corpus(const Harness& h, Timestamp start, Duration span, std::uint64_t seed,
                             double interval_scale = 1.0);

/// SYNs from the gateway to `n_ports` ports of the safeguard's WAN address.
std::vector<TimedPacket> gateway_probe(const Harness& h, Timestamp start, int n_ports = 10,
                                       Duration gap = std::chrono::milliseconds(200));

struct FalsePositive {
  Timestamp time{0};
  std::string kind;
  std::string device;
  std::string detail;
};

struct OverprotectionReport {
  std::vector<FalsePositive> alerts;
  /// DoH notices are reports of the safeguard's own enforcement, not verdicts.
  std::size_t excluded = 0;
  std::size_t packets = 0;

  std::size_t count() const { return alerts.size(); }
  std::size_t count(std::string_view kind) const;
};

struct OverprotectionOptions {
  std::vector<TimedPacket> gateway_side;
  /// Inbound traffic to the safeguard is forwarded to this device.
  std::optional<std::string> port_forward;
  Duration chunk = std::chrono::hours(24);
};

/// Replays a benign LAN-side corpus; every alert raised is a false positive.
OverprotectionReport run_overprotection(Harness& h, const Trace& corpus, const OverprotectionOptions& options = {});

// ----------------------------------------------------------------- suite

struct AdapterSpec {
  std::string name;
  std::string type = "reference";
  DetectorConfig config;
};

using AdapterFactory = std::function<std::unique_ptr<SafeguardAdapter>(const AdapterSpec&, std::uint64_t seed)>;

std::unique_ptr<SafeguardAdapter> default_adapter_factory(const AdapterSpec& spec, std::uint64_t seed);

struct Suite {
  std::vector<DeviceDescriptor> devices;
  std::vector<AdapterSpec> adapters;
  std::vector<ThreatScenario> scenarios;
  ExperimentConfig config;
  HarnessOptions harness;
  ThreatResources resources;
  AdapterFactory factory = default_adapter_factory;
};

struct SuiteResult {
  DetectionMatrix matrix;
  /// Adapter name -> outcome per scenario, in scenario order.
  std::map<std::string, std::vector<DetectionOutcome>> outcomes;
  std::size_t faults = 0;
};

struct SuiteHooks {
  /// (adapter name, plan, gateway capture, bridge capture) for iteration one.
  std::function<void(const std::string&, const ThreatPlan&, const Trace&, const Trace&)> on_capture;
  std::function<void(const std::string&, const DetectionOutcome&)> on_outcome;
};

/// Runs every scenario against every adapter, each adapter on a fresh
/// harness whose clock starts at `epoch`.
SuiteResult run_suite(Suite suite, std::uint64_t seed, Timestamp epoch = Timestamp{0}, const SuiteHooks& hooks = {});

struct TrafficProfile {
  std::optional<TrafficTotals> overhead;
  std::string overhead_error;
  std::optional<LocalityReport> locality;
  std::string locality_error;
  std::vector<DestinationRecord> destinations;
};

/// Devices run with background traffic for `cfg.profile_window` behind the
/// adapter; the two captures feed overhead, locality and destinations.
TrafficProfile run_traffic_profile(const Suite& suite, const AdapterSpec& spec, std::uint64_t seed,
                                   const PartyDb& parties);

/// The identification protocol on a fresh harness holding every suite device.
IdentificationResult run_suite_identification(const Suite& suite, const AdapterSpec& spec, std::uint64_t seed);

/// Folds `part` into `into`; adapters must not overlap.
void merge_suite_result(SuiteResult& into, SuiteResult part);

struct ConsistencyReport {
  std::vector<DetectionMatrix> runs;
  /// Cells whose detection outcome differs from the first run.
  std::vector<std::string> diffs;
  /// Cells with the same outcome whose rendered latency moved. Seeds shift
  /// threats against window and probe phases, so this is informational.
  std::vector<std::string> latency_drift;

  bool consistent() const { return diffs.empty(); }
};

/// The suite at `consistency_points` seeds and virtual epochs; lists every
/// matrix cell whose outcome differs from the first run.
ConsistencyReport run_consistency(const Suite& suite);

}  // namespace sgbench
