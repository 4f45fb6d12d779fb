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

#include "sgbench/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sgbench/dns.hpp"
#include "sgbench/ini.hpp"

namespace sgbench {

using namespace std::chrono_literals;

void ExperimentConfig::validate() const {
  if (iterations < 1) throw BenchError(ErrorCode::InvalidArgument, "iterations must be at least 1");
  if (id_iterations < 1) throw BenchError(ErrorCode::InvalidArgument, "id_iterations must be at least 1");
  if (consistency_points < 1) throw BenchError(ErrorCode::InvalidArgument, "consistency_points must be at least 1");
  if (wait_after_threat <= Duration::zero() || id_wait <= Duration::zero()) {
    throw BenchError(ErrorCode::InvalidArgument, "waits must be positive");
  }
  if (warmup < Duration::zero()) throw BenchError(ErrorCode::InvalidArgument, "warmup must not be negative");
  if (profile_window < Duration::zero()) {
    throw BenchError(ErrorCode::InvalidArgument, "profile_window must not be negative");
  }
}

// ------------------------------------------------------------- detection

void DetectionOutcome::aggregate() {
  detected_any = false;
  faults = 0;
  std::vector<double> lat;
  for (const auto& it : iterations) {
    detected_any = detected_any || it.detected;
    if (it.adapter_fault) ++faults;
    if (it.detected && it.latency) lat.push_back(*it.latency);
  }
  min_latency.reset();
  median_latency.reset();
  if (lat.empty()) return;
  std::sort(lat.begin(), lat.end());
  min_latency = lat.front();
  const auto n = lat.size();
  median_latency = n % 2 == 1 ? lat[n / 2] : (lat[n / 2 - 1] + lat[n / 2]) / 2.0;
}

bool alert_matches(const Alert& alert, ThreatKind kind, const std::vector<std::string>& targets) {
  const auto reported = alert.reported_threat();
  if (!reported || *reported != kind) return false;
  if (alert.device_ids.empty() || targets.empty()) return true;
  return std::any_of(alert.device_ids.begin(), alert.device_ids.end(), [&](const std::string& id) {
    return std::find(targets.begin(), targets.end(), id) != targets.end();
  });
}

namespace {

struct SavedState {
  std::map<std::string, std::set<std::uint16_t>> open_ports;
};

SavedState save_state(const Harness& h, const ThreatPlan& plan) {
  SavedState s;
  for (const auto& [id, ports] : plan.open_ports) s.open_ports[id] = h.device(id).open_ports;
  return s;
}

void restore_state(Harness& h, const ThreatPlan& plan, const SavedState& saved) {
  if (plan.port_forward) h.set_port_forward(std::nullopt);
  for (const auto& [id, ports] : saved.open_ports) h.set_open_ports(id, ports);
  bool reconnected = false;
  for (const auto& id : plan.scenario.targets) {
    if (!h.device(id).connected) {
      h.connect_device(id);
      reconnected = true;
    }
  }
  if (reconnected) h.run_until(h.now() + 5s);
}

ThreatKind quarantine_flood_kind(const ThreatScenario&) { return ThreatKind::SynFlood; }

QuarantineCheck evaluate_quarantine(const Harness& h, const ThreatPlan& plan, const std::vector<Alert>& alerts,
                                    Timestamp end) {
  QuarantineCheck q;
  for (const auto& a : alerts) {
    if (a.time >= plan.start && alert_matches(a, quarantine_flood_kind(plan.scenario), plan.scenario.targets)) {
      q.flood_detected = true;
      q.alert_time = a.time;
      break;
    }
  }
  if (!q.alert_time) return q;
  const auto gw = h.capture(CapturePoint::Gateway, *q.alert_time, end);
  for (const auto& t : gw.truth) {
    if (t.scenario_tag == plan.benign_tag) ++q.leaked;
  }
  const auto br = h.capture(CapturePoint::IotBridge, *q.alert_time, end);
  for (std::size_t i = 0; i < br.size(); ++i) {
    if (br.truth[i].scenario_tag == plan.benign_tag && br.truth[i].origin == GroundTruth::Origin::Device) {
      ++q.sent_after_alert;
    }
  }
  return q;
}

Timestamp next_start(const Harness& h) { return h.now() + 1s; }

}  // namespace

DetectionOutcome run_threat_experiment(Harness& h, const ThreatScenario& scenario, ThreatResources& res,
                                       const ExperimentConfig& cfg, const CaptureSink& sink) {
  cfg.validate();
  scenario.validate();
  DetectionOutcome out;
  out.scenario = scenario.name;
  out.kind = scenario.kind;
  auto& adapter = h.adapter();
  out.claimed = adapter.claims().contains(scenario.kind);
  if (!out.claimed) {
    out.aggregate();
    return out;
  }
  const bool recording = h.options().record_captures;
  for (int i = 0; i < cfg.iterations; ++i) {
    IterationOutcome it;
    ThreatScenario s = scenario;
    s.seed = scenario.seed + static_cast<std::uint64_t>(i);
    const bool want_capture = (i == 0 && sink) || s.kind == ThreatKind::Quarantine;
    if (want_capture && !recording) h.set_record_captures(true);
    const auto faults_before = h.stats().adapter_faults;
    try {
      adapter.begin_iteration();
    } catch (const std::exception& e) {
      it.adapter_fault = true;
      it.fault = e.what();
    }
    const auto plan = plan_threat(s, h, res, next_start(h));
    const auto saved = save_state(h, plan);
    apply_plan(h, plan);
    const auto end = plan.end + cfg.wait_after_threat;
    h.run_until(end);

    std::vector<Alert> alerts;
    try {
      alerts = adapter.poll_alerts(plan.start);
    } catch (const std::exception& e) {
      it.adapter_fault = true;
      it.fault = e.what();
    }
    if (h.stats().adapter_faults > faults_before && !it.adapter_fault) {
      it.adapter_fault = true;
      it.fault = "adapter raised while processing traffic";
    }
    if (s.kind == ThreatKind::Quarantine) {
      const auto q = evaluate_quarantine(h, plan, alerts, h.now() + Duration{1});
      it.detected = q.quarantined();
      if (it.detected) it.latency = to_seconds(*q.alert_time - plan.start);
    } else {
      for (const auto& a : alerts) {
        if (a.time >= plan.start && alert_matches(a, s.kind, s.targets)) {
          it.detected = true;
          it.latency = to_seconds(a.time - plan.start);
          break;
        }
      }
    }
    if (it.adapter_fault) {
      it.detected = false;
      it.latency.reset();
    }
    if (i == 0 && sink) {
      sink(plan, h.capture(CapturePoint::Gateway, plan.start, h.now() + Duration{1}),
           h.capture(CapturePoint::IotBridge, plan.start, h.now() + Duration{1}));
    }
    if (want_capture && !recording) {
      h.clear_captures();
      h.set_record_captures(false);
    }
    restore_state(h, plan, saved);
    out.iterations.push_back(std::move(it));
  }
  out.aggregate();
  return out;
}

QuarantineCheck run_quarantine_check(Harness& h, ThreatResources& res, const ExperimentConfig& cfg,
                                     std::optional<ThreatScenario> scenario) {
  cfg.validate();
  ThreatScenario s;
  if (scenario) {
    s = *scenario;
  } else {
    s.name = "quarantine-check";
    s.kind = ThreatKind::Quarantine;
    for (const auto& d : h.devices()) {
      if (d.connected) {
        s.targets = {d.id};
        break;
      }
    }
  }
  s.validate();
  const bool recording = h.options().record_captures;
  if (!recording) h.set_record_captures(true);
  h.adapter().begin_iteration();
  const auto plan = plan_threat(s, h, res, next_start(h));
  apply_plan(h, plan);
  h.run_until(plan.end + cfg.wait_after_threat);
  const auto q = evaluate_quarantine(h, plan, h.adapter().poll_alerts(plan.start), h.now() + Duration{1});
  if (!recording) {
    h.clear_captures();
    h.set_record_captures(false);
  }
  return q;
}

std::string format_latency(double seconds) {
  char buf[32];
  if (seconds < 59.5) {
    std::snprintf(buf, sizeof buf, "%llds", static_cast<long long>(std::llround(seconds)));
  } else if (seconds < 3570) {
    std::snprintf(buf, sizeof buf, "%lldm", static_cast<long long>(std::llround(seconds / 60)));
  } else {
    std::snprintf(buf, sizeof buf, "%lldh", static_cast<long long>(std::llround(seconds / 3600)));
  }
  return buf;
}

std::string MatrixCell::render() const {
  switch (state) {
    case CellState::Detected: return latency ? "✓(" + format_latency(*latency) + ")" : "✓";
    case CellState::NotDetected: return "✗";
    case CellState::NotClaimed: return "-";
  }
  return "?";
}

MatrixCell cell_of(const DetectionOutcome& outcome) {
  if (!outcome.claimed) return {CellState::NotClaimed, std::nullopt};
  if (!outcome.detected_any) return {CellState::NotDetected, std::nullopt};
  return {CellState::Detected, outcome.median_latency};
}

void DetectionMatrix::add_adapter(const std::string& name) {
  if (std::find(adapters_.begin(), adapters_.end(), name) == adapters_.end()) adapters_.push_back(name);
}

void DetectionMatrix::set(ThreatKind kind, const std::string& adapter, MatrixCell cell) {
  add_adapter(adapter);
  cells_[{kind, adapter}] = cell;
}

bool DetectionMatrix::has(ThreatKind kind, const std::string& adapter) const {
  return cells_.contains({kind, adapter});
}

const MatrixCell& DetectionMatrix::at(ThreatKind kind, const std::string& adapter) const {
  auto it = cells_.find({kind, adapter});
  if (it == cells_.end()) {
    throw BenchError(ErrorCode::InvalidArgument,
                     "no cell for " + std::string(to_string(kind)) + " / " + adapter);
  }
  return it->second;
}

std::vector<ThreatKind> DetectionMatrix::kinds() const {
  std::vector<ThreatKind> out;
  for (auto k : kAllThreatKinds) {
    if (std::any_of(adapters_.begin(), adapters_.end(), [&](const std::string& a) { return has(k, a); })) {
      out.push_back(k);
    }
  }
  return out;
}

std::size_t display_width(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xc0) != 0x80) ++n;
  }
  return n;
}

std::string pad_display(std::string_view s, std::size_t width) {
  std::string out(s);
  const auto w = display_width(s);
  if (w < width) out.append(width - w, ' ');
  return out;
}

std::string DetectionMatrix::render_text() const {
  const auto rows = kinds();
  std::size_t first = display_width("Threat");
  for (auto k : rows) first = std::max(first, display_width(display_name(k)));
  std::vector<std::size_t> widths;
  for (const auto& a : adapters_) {
    std::size_t w = display_width(a);
    for (auto k : rows) {
      if (has(k, a)) w = std::max(w, display_width(at(k, a).render()));
    }
    widths.push_back(w);
  }
  std::ostringstream os;
  auto line = [&](std::string_view head, const std::vector<std::string>& cells) {
    std::string l = pad_display(head, first);
    for (std::size_t i = 0; i < cells.size(); ++i) l += "  " + pad_display(cells[i], widths[i]);
    while (!l.empty() && l.back() == ' ') l.pop_back();
    os << l << '\n';
  };
  line("Threat", adapters_);
  std::size_t total = first;
  for (auto w : widths) total += 2 + w;
  os << std::string(total, '-') << '\n';
  for (auto k : rows) {
    std::vector<std::string> cells;
    for (const auto& a : adapters_) cells.push_back(has(k, a) ? at(k, a).render() : "");
    line(display_name(k), cells);
  }
  return os.str();
}

std::vector<std::string> DetectionMatrix::diff(const DetectionMatrix& other) const {
  std::set<std::pair<ThreatKind, std::string>> keys;
  for (const auto& [k, v] : cells_) keys.insert(k);
  for (const auto& [k, v] : other.cells_) keys.insert(k);
  std::vector<std::string> out;
  for (const auto& key : keys) {
    const auto a = has(key.first, key.second) ? at(key.first, key.second).render() : "(absent)";
    const auto b = other.has(key.first, key.second) ? other.at(key.first, key.second).render() : "(absent)";
    if (a != b) out.push_back(std::string(to_string(key.first)) + "/" + key.second + ": " + a + " vs " + b);
  }
  return out;
}

// -------------------------------------------------------- identification

std::string_view to_string(IdVerdict v) {
  switch (v) {
    case IdVerdict::Detected: return "DETECTED";
    case IdVerdict::Error: return "ERROR";
    case IdVerdict::Unknown: return "UNKNOWN";
  }
  return "?";
}

std::string normalize_label(std::string_view label) {
  std::string out;
  bool space = false;
  for (unsigned char c : label) {
    if (std::isspace(c)) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

IdVerdict judge_label(std::string_view returned, std::string_view truth) {
  const auto r = normalize_label(returned);
  if (r.empty() || r == normalize_label(kUnknownLabel)) return IdVerdict::Unknown;
  return r == normalize_label(truth) ? IdVerdict::Detected : IdVerdict::Error;
}

std::size_t IdentificationResult::count(IdVerdict v) const {
  return static_cast<std::size_t>(
      std::count_if(verdicts.begin(), verdicts.end(), [&](const auto& kv) { return kv.second == v; }));
}

double IdentificationResult::percent(IdVerdict v) const {
  if (verdicts.empty()) return 0;
  return 100.0 * static_cast<double>(count(v)) / static_cast<double>(verdicts.size());
}

IdentificationResult run_identification_experiment(Harness& h, const ExperimentConfig& cfg) {
  cfg.validate();
  std::map<std::string, std::vector<std::pair<IdVerdict, std::string>>> history;
  for (int i = 0; i < cfg.id_iterations; ++i) {
    h.adapter().reset();
    for (const auto& d : h.devices()) {
      if (d.connected) h.disconnect_device(d.id);
    }
    h.run_until(h.now() + 1s);
    std::vector<std::string> ids;
    for (const auto& d : h.devices()) ids.push_back(d.id);
    for (const auto& id : ids) h.connect_device(id);
    h.run_until(h.now() + cfg.id_wait);
    const auto labels = h.adapter().identify_devices();
    for (const auto& d : h.devices()) {
      auto it = labels.find(d.id);
      const std::string label = it == labels.end() ? std::string(kUnknownLabel) : it->second;
      history[d.id].emplace_back(judge_label(label, d.true_label), label);
    }
  }
  IdentificationResult r;
  r.iterations = cfg.id_iterations;
  for (const auto& [id, runs] : history) {
    std::map<IdVerdict, int> votes;
    for (const auto& [v, label] : runs) ++votes[v];
    // Ties go to the earlier verdict in enum order.
    IdVerdict best = votes.begin()->first;
    for (const auto& [v, n] : votes) {
      if (n > votes[best]) best = v;
    }
    r.verdicts[id] = best;
    std::map<std::string, int> names;
    for (const auto& [v, label] : runs) {
      if (v == best) ++names[label];
    }
    r.labels[id] = std::max_element(names.begin(), names.end(), [](const auto& a, const auto& b) {
                     return a.second < b.second;
                   })->first;
    if (votes.size() > 1) ++r.unstable;
  }
  return r;
}

// -------------------------------------------------------------- locality

std::string_view to_string(LocalityVerdict v) {
  switch (v) {
    case LocalityVerdict::Local: return "LOCAL";
    case LocalityVerdict::CloudCorrelated: return "CLOUD_CORRELATED";
    case LocalityVerdict::CloudPeriodic: return "CLOUD_PERIODIC";
    case LocalityVerdict::Undetermined: return "UNDETERMINED";
  }
  return "?";
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const auto n = std::min(a.size(), b.size());
  if (n < 2) return 0;
  const double ma = std::accumulate(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(n), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(n), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0 || sbb <= 0) return 0;
  return sab / std::sqrt(saa * sbb);
}

double autocorrelation(const std::vector<double>& x, std::size_t lag) {
  const auto n = x.size();
  if (lag == 0 || lag >= n) return 0;
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < n; ++i) den += (x[i] - m) * (x[i] - m);
  if (den <= 0) return 0;
  for (std::size_t i = 0; i + lag < n; ++i) num += (x[i] - m) * (x[i + lag] - m);
  return num / den;
}

LocalityReport run_locality_experiment(const Trace& gateway, const Trace& bridge, const NatLog& nat,
                                       const std::vector<ActivityWindow>& activity, const AddressPlan& plan,
                                       Duration bin) {
  if (bin <= Duration::zero()) throw BenchError(ErrorCode::InvalidArgument, "bin width must be positive");
  if (gateway.empty() && bridge.empty()) {
    throw BenchError(ErrorCode::InsufficientData, "no packets to bin");
  }
  Timestamp t0 = Timestamp::max(), t1 = Timestamp::min();
  for (const Trace* tr : {&gateway, &bridge}) {
    if (tr->empty()) continue;
    t0 = std::min(t0, tr->packets.front().timestamp);
    t1 = std::max(t1, tr->packets.back().timestamp);
  }
  const auto nbins = static_cast<std::size_t>((t1 - t0) / bin) + 1;
  if (nbins < kMinLocalityBins) {
    throw BenchError(ErrorCode::InsufficientData,
                     std::to_string(nbins) + " bins of " + std::to_string(to_seconds(bin)) + "s; need 10");
  }
  LocalityReport r;
  r.safeguard_bins.assign(nbins, 0);
  r.device_bins.assign(nbins, 0);
  const auto attributed = attribute_safeguard_traffic(gateway, bridge, nat, kDefaultMatchWindow, plan);
  std::vector<const PacketRecord*> egress;
  for (const auto& p : attributed.safeguard_only.packets) {
    if (p.src_ip != plan.safeguard_wan_ip) continue;
    r.safeguard_bins[static_cast<std::size_t>((p.timestamp - t0) / bin)] += p.wire_len;
    egress.push_back(&p);
  }
  for (const auto& p : bridge.packets) {
    if (!plan.on_iot_lan(p.src_ip) || p.src_ip == plan.safeguard_lan_ip || plan.on_iot_lan(p.dst_ip) ||
        p.dst_ip.is_multicast() || p.dst_ip.is_broadcast()) {
      continue;
    }
    r.device_bins[static_cast<std::size_t>((p.timestamp - t0) / bin)] += p.wire_len;
  }
  r.correlation = pearson(r.safeguard_bins, r.device_bins);
  for (std::size_t lag = 1; lag <= nbins / 2; ++lag) {
    const double a = autocorrelation(r.safeguard_bins, lag);
    if (a > r.autocorrelation) {
      r.autocorrelation = a;
      r.peak_lag = lag;
    }
  }
  std::vector<ActivityWindow> windows = activity;
  if (windows.empty()) {
    for (std::size_t i = 0; i < nbins; ++i) {
      if (r.device_bins[i] > 0) {
        const auto s = t0 + bin * static_cast<std::int64_t>(i);
        windows.push_back({s, s + bin});
      }
    }
  }
  for (const auto& w : windows) {
    std::uint64_t bytes = 0;
    for (const auto* p : egress) {
      if (p->timestamp >= w.start && p->timestamp < w.end) bytes += p->wire_len;
    }
    r.max_window_bytes = std::max(r.max_window_bytes, bytes);
  }
  if (r.correlation >= kCorrelatedThreshold) {
    r.verdict = LocalityVerdict::CloudCorrelated;
  } else if (r.autocorrelation >= kPeriodicThreshold) {
    r.verdict = LocalityVerdict::CloudPeriodic;
  } else if (r.max_window_bytes < kLocalEgressLimit) {
    r.verdict = LocalityVerdict::Local;
  } else {
    r.verdict = LocalityVerdict::Undetermined;
  }
  return r;
}

// --------------------------------------------------------------- parties

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_ip_literal(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == '.'; });
}

}  // namespace

std::string registrable_domain(std::string_view host) {
  auto h = lower(host);
  while (!h.empty() && h.back() == '.') h.pop_back();
  const auto last = h.rfind('.');
  if (last == std::string::npos || last == 0) return h;
  // Address literals have no registrable part.
  try {
    Ipv4Address::parse(h);
    return h;
  } catch (const BenchError&) {
  }
  const auto prev = h.rfind('.', last - 1);
  return prev == std::string::npos ? h : h.substr(prev + 1);
}

void PartyDb::add(const std::string& domain, PartyEntry entry) { entries_[lower(domain)] = std::move(entry); }

std::optional<PartyEntry> PartyDb::lookup(std::string_view host) const {
  const auto h = lower(host);
  if (auto it = entries_.find(h); it != entries_.end()) return it->second;
  if (auto it = entries_.find(registrable_domain(h)); it != entries_.end()) return it->second;
  return std::nullopt;
}

PartyDb PartyDb::parse(std::string_view text) {
  PartyDb db;
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto t = ini::trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::vector<std::string> f;
    std::string field;
    std::istringstream ls{std::string(t)};
    while (std::getline(ls, field, ',')) f.emplace_back(ini::trim(field));
    if (f.size() < 2 || f.size() > 3 || f[0].empty()) {
      throw BenchError(ErrorCode::MalformedFile, "party db line " + std::to_string(n) + ": expected domain,class,org");
    }
    PartyEntry e;
    try {
      e.party = parse_party(f[1]);
    } catch (const BenchError&) {
      throw BenchError(ErrorCode::MalformedFile, "party db line " + std::to_string(n) + ": bad class '" + f[1] + "'");
    }
    if (f.size() == 3) e.org = f[2];
    db.add(f[0], std::move(e));
  }
  return db;
}

PartyDb PartyDb::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw BenchError(ErrorCode::ResourceMissing, "party db " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::vector<DestinationRecord> classify_parties(std::vector<DestinationRecord> destinations, const PartyDb& db) {
  for (auto& d : destinations) {
    d.party = Party::Unclassified;
    if (is_ip_literal(d.key)) continue;
    if (auto e = db.lookup(d.key)) d.party = e->party;
  }
  return destinations;
}

// -------------------------------------------------------------- overhead

namespace {

bool device_egress(const PacketRecord& p, const AddressPlan& plan) {
  return p.is_ipv4() && plan.on_iot_lan(p.src_ip) && p.src_ip != plan.safeguard_lan_ip &&
         !plan.on_iot_lan(p.dst_ip) && !p.dst_ip.is_multicast() && !p.dst_ip.is_broadcast();
}

}  // namespace

TrafficTotals compute_overhead(const Trace& gateway, const Trace& bridge, const AddressPlan& plan) {
  TrafficTotals t;
  for (const auto& p : gateway.packets) {
    if (p.is_ipv4() && p.src_ip == plan.safeguard_wan_ip) t.t_g += p.wire_len;
  }
  for (const auto& p : bridge.packets) {
    if (device_egress(p, plan)) t.t_d += p.wire_len;
  }
  if (t.t_d > t.t_g) {
    throw BenchError(ErrorCode::NegativeTs, "bridge carries " + std::to_string(t.t_d) + " bytes but gateway only " +
                                                std::to_string(t.t_g));
  }
  t.t_s = t.t_g - t.t_d;
  t.empty = t.t_g == 0;
  t.ov = t.empty ? 0.0 : static_cast<double>(t.t_s) / static_cast<double>(t.t_g);
  return t;
}

std::uint64_t ground_truth_safeguard_bytes(const Trace& gateway, const AddressPlan& plan) {
  if (gateway.truth.size() != gateway.packets.size()) {
    throw BenchError(ErrorCode::InvalidArgument, "gateway trace carries no ground truth");
  }
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < gateway.size(); ++i) {
    const auto& p = gateway.packets[i];
    if (p.is_ipv4() && p.src_ip == plan.safeguard_wan_ip &&
        gateway.truth[i].origin == GroundTruth::Origin::Safeguard) {
      total += p.wire_len;
    }
  }
  return total;
}

// --------------------------------------------------------- overprotection

Trace generate_benign_corpus(const Harness& h, Timestamp start, Duration span, std::uint64_t seed,
                             double interval_scale) {
  if (interval_scale <= 0) throw BenchError(ErrorCode::InvalidArgument, "interval scale must be positive");
  Trace t;
  t.metadata.capture_point = CapturePoint::IotBridge;
  t.metadata.start = start;
  t.metadata.end = start + span;
  t.metadata.link_id = "benign-corpus";
  for (const auto& d : h.devices()) {
    if (!d.connected || !d.assigned_ip) {
      throw BenchError(ErrorCode::DeviceDisconnected, d.id + " must be connected to build a corpus");
    }
    const auto& profile = builtin_profile(d.profile);
    BurstContext ctx;
    ctx.self = Endpoint{d.mac, *d.assigned_ip, 0};
    ctx.gateway_mac = h.options().plan.safeguard_lan_mac;
    std::mt19937_64 rng(seed ^ stable_hash(d.id));
    const auto mean = static_cast<double>(profile.mean_interval.count()) * interval_scale;
    auto gap = [&] { return Duration{static_cast<std::int64_t>(mean * (0.5 + uniform_real(rng)))}; };
    for (Timestamp at = start + gap(); at < start + span; at += gap()) {
      for (auto& p : generate_burst(profile, ctx, at, rng)) {
        if (p.timestamp < start + span) t.packets.push_back(std::move(p));
      }
    }
  }
  std::stable_sort(t.packets.begin(), t.packets.end(),
                   [](const PacketRecord& a, const PacketRecord& b) { return a.timestamp < b.timestamp; });
  for (auto& p : t.packets) p.capture_point = CapturePoint::IotBridge;
  return t;
}

std::vector<TimedPacket> gateway_probe(const Harness& h, Timestamp start, int n_ports, Duration gap) {
  static constexpr std::uint16_t kPorts[] = {22,   23,   80,   443,  554,  1883, 5000, 8080, 8443, 8883,
                                             9000, 9100, 49152, 1900, 5353, 8000, 8888, 7547, 3000, 21};
  if (n_ports < 1 || n_ports > static_cast<int>(std::size(kPorts))) {
    throw BenchError(ErrorCode::InvalidArgument, "gateway probe covers 1 to 20 ports");
  }
  const auto& plan = h.options().plan;
  std::vector<TimedPacket> out;
  for (int i = 0; i < n_ports; ++i) {
    const Endpoint src{plan.gateway_mac, plan.gateway_lan_ip, static_cast<std::uint16_t>(41000 + i)};
    const Endpoint dst{plan.safeguard_wan_mac, plan.safeguard_wan_ip, kPorts[i]};
    out.push_back({make_tcp(start + gap * i, src, dst, tcp_flag::kSyn, 0x5eed0000u + static_cast<std::uint32_t>(i), 0),
                   0});
  }
  return out;
}

std::size_t OverprotectionReport::count(std::string_view kind) const {
  return static_cast<std::size_t>(
      std::count_if(alerts.begin(), alerts.end(), [&](const FalsePositive& f) { return f.kind == kind; }));
}

OverprotectionReport run_overprotection(Harness& h, const Trace& corpus, const OverprotectionOptions& options) {
  if (options.chunk <= Duration::zero()) throw BenchError(ErrorCode::InvalidArgument, "chunk must be positive");
  for (const auto& t : corpus.truth) {
    if (t.scenario_tag != 0) throw BenchError(ErrorCode::InvalidArgument, "corpus carries scenario tags");
  }
  OverprotectionReport report;
  const Timestamp since = h.now();
  Timestamp first = Timestamp::max(), last = h.now();
  for (const auto& p : corpus.packets) first = std::min(first, p.timestamp);
  for (const auto& p : options.gateway_side) first = std::min(first, p.packet.timestamp);
  const Duration shift = first != Timestamp::max() && first <= h.now() ? (h.now() + 1s) - first : Duration::zero();

  if (options.port_forward) h.set_port_forward(options.port_forward);
  if (!options.gateway_side.empty()) {
    auto gw = options.gateway_side;
    for (auto& p : gw) {
      p.packet.timestamp += shift;
      last = std::max(last, p.packet.timestamp);
    }
    h.inject(InjectionPoint::GatewaySide, std::move(gw));
  }
  std::size_t i = 0;
  const auto& pk = corpus.packets;
  while (i < pk.size()) {
    const auto chunk_end = pk[i].timestamp + shift + options.chunk;
    std::vector<TimedPacket> batch;
    while (i < pk.size() && pk[i].timestamp + shift < chunk_end) {
      batch.push_back({pk[i], 0});
      batch.back().packet.timestamp += shift;
      ++i;
    }
    report.packets += batch.size();
    last = std::max(last, batch.back().packet.timestamp);
    h.inject(InjectionPoint::IotLanSide, std::move(batch));
    h.run_until(std::min(chunk_end, last + 1s));
  }
  // Let windows close and replies drain.
  h.run_until(std::max(h.now(), last) + 120s);
  if (options.port_forward) h.set_port_forward(std::nullopt);

  for (const auto& a : h.adapter().poll_alerts(since)) {
    if (a.reported_threat() == ThreatKind::Doh) {
      ++report.excluded;
      continue;
    }
    std::string devices;
    for (const auto& d : a.device_ids) devices += (devices.empty() ? "" : ",") + d;
    report.alerts.push_back({a.time, a.kind_name(), devices, a.detail});
  }
  return report;
}

// ----------------------------------------------------------------- suite

std::unique_ptr<SafeguardAdapter> default_adapter_factory(const AdapterSpec& spec, std::uint64_t seed) {
  return make_adapter(spec.type, spec.config, spec.name, seed);
}

SuiteResult run_suite(Suite suite, std::uint64_t seed, Timestamp epoch, const SuiteHooks& hooks) {
  suite.config.validate();
  SuiteResult result;
  for (const auto& spec : suite.adapters) {
    result.matrix.add_adapter(spec.name);
    Harness h(suite.devices, suite.factory(spec, seed), seed, suite.harness);
    if (epoch > h.now()) h.run_until(epoch);
    for (const auto& d : suite.devices) h.connect_device(d.id);
    h.run_until(h.now() + std::max<Duration>(suite.config.warmup, 10s));
    auto& outcomes = result.outcomes[spec.name];
    for (const auto& base : suite.scenarios) {
      ThreatScenario s = base;
      s.seed = base.seed + seed * 1000003u;
      CaptureSink sink;
      if (hooks.on_capture) {
        sink = [&](const ThreatPlan& plan, const Trace& gw, const Trace& br) {
          hooks.on_capture(spec.name, plan, gw, br);
        };
      }
      auto outcome = run_threat_experiment(h, s, suite.resources, suite.config, sink);
      outcome.scenario = base.name;
      result.faults += outcome.faults;
      auto cell = cell_of(outcome);
      if (result.matrix.has(s.kind, spec.name)) {
        // Several scenarios of one kind: detected if any was, at the best latency.
        const auto& prev = result.matrix.at(s.kind, spec.name);
        if (prev.state == CellState::Detected &&
            (cell.state != CellState::Detected || (prev.latency && cell.latency && *prev.latency < *cell.latency))) {
          cell = prev;
        }
      }
      result.matrix.set(s.kind, spec.name, cell);
      if (hooks.on_outcome) hooks.on_outcome(spec.name, outcome);
      outcomes.push_back(std::move(outcome));
    }
  }
  return result;
}

TrafficProfile run_traffic_profile(const Suite& suite, const AdapterSpec& spec, std::uint64_t seed,
                                   const PartyDb& parties) {
  auto options = suite.harness;
  options.background_traffic = true;
  options.record_captures = true;
  Harness h(suite.devices, suite.factory(spec, seed), seed, options);
  for (const auto& d : suite.devices) h.connect_device(d.id);
  h.run_until(h.now() + suite.config.profile_window);
  const auto gateway = h.capture_all(CapturePoint::Gateway);
  const auto bridge = h.capture_all(CapturePoint::IotBridge);
  const auto& plan = options.plan;
  TrafficProfile out;
  try {
    out.overhead = compute_overhead(gateway, bridge, plan);
  } catch (const BenchError& e) {
    out.overhead_error = e.what();
  }
  const auto nat = h.nat_log();
  try {
    out.locality = run_locality_experiment(gateway, bridge, nat, {}, plan);
  } catch (const BenchError& e) {
    out.locality_error = e.what();
  }
  const auto attributed = attribute_safeguard_traffic(gateway, bridge, nat, kDefaultMatchWindow, plan);
  // The safeguard's own lookups and the devices' lookups both name addresses.
  auto names = dns::correlate_dns(gateway).ip_to_name;
  out.destinations =
      classify_parties(summarize_destinations(attributed.safeguard_only, names, plan), parties);
  return out;
}

IdentificationResult run_suite_identification(const Suite& suite, const AdapterSpec& spec, std::uint64_t seed) {
  auto options = suite.harness;
  options.record_captures = false;
  Harness h(suite.devices, suite.factory(spec, seed), seed, options);
  return run_identification_experiment(h, suite.config);
}

void merge_suite_result(SuiteResult& into, SuiteResult part) {
  for (const auto& a : part.matrix.adapters()) {
    into.matrix.add_adapter(a);
    for (auto k : part.matrix.kinds()) {
      if (part.matrix.has(k, a)) into.matrix.set(k, a, part.matrix.at(k, a));
    }
  }
  for (auto& [name, outcomes] : part.outcomes) into.outcomes[name] = std::move(outcomes);
  into.faults += part.faults;
}

ConsistencyReport run_consistency(const Suite& suite) {
  suite.config.validate();
  ConsistencyReport report;
  for (int k = 0; k < suite.config.consistency_points; ++k) {
    const auto seed = suite.config.seed + static_cast<std::uint64_t>(k);
    const Timestamp epoch = std::chrono::hours(24) * k;
    report.runs.push_back(run_suite(suite, seed, epoch).matrix);
  }
  const auto& first = report.runs.front();
  for (std::size_t k = 1; k < report.runs.size(); ++k) {
    const auto& other = report.runs[k];
    std::set<std::pair<ThreatKind, std::string>> keys;
    for (const auto* m : {&first, &other}) {
      for (const auto kind : m->kinds()) {
        for (const auto& a : m->adapters()) {
          if (m->has(kind, a)) keys.emplace(kind, a);
        }
      }
    }
    const auto prefix = "run " + std::to_string(k + 1) + ": ";
    for (const auto& [kind, a] : keys) {
      const bool in_a = first.has(kind, a), in_b = other.has(kind, a);
      const auto ra = in_a ? first.at(kind, a).render() : "(absent)";
      const auto rb = in_b ? other.at(kind, a).render() : "(absent)";
      if (ra == rb) continue;
      const auto line = prefix + std::string(to_string(kind)) + "/" + a + ": " + ra + " vs " + rb;
      const bool same_outcome = in_a && in_b && first.at(kind, a).state == other.at(kind, a).state;
      (same_outcome ? report.latency_drift : report.diffs).push_back(line);
    }
  }
  return report;
}

}  // namespace sgbench
