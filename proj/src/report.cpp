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

#include "sgbench/report.hpp"

#include <cstdio>
#include <sstream>

namespace sgbench {

using nlohmann::json;

namespace {

std::string_view state_name(CellState s) {
  switch (s) {
    case CellState::Detected: return "DETECTED";
    case CellState::NotDetected: return "NOT_DETECTED";
    case CellState::NotClaimed: return "NOT_CLAIMED";
  }
  return "NOT_DETECTED";
}

CellState parse_state(const std::string& s) {
  if (s == "DETECTED") return CellState::Detected;
  if (s == "NOT_DETECTED") return CellState::NotDetected;
  if (s == "NOT_CLAIMED") return CellState::NotClaimed;
  throw BenchError(ErrorCode::MalformedFile, "unknown cell state '" + s + "'");
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json scenario_json(const ThreatScenario& s) {
  return {{"name", s.name},       {"kind", to_string(s.kind)}, {"origin", to_string(s.origin)},
          {"targets", s.targets}, {"seed", s.seed},           {"tag", s.tag},
          {"params", s.params}};
}

json outcome_json(const DetectionOutcome& o) {
  json iters = json::array();
  for (const auto& it : o.iterations) {
    json j{{"detected", it.detected}, {"latency", optional_number(it.latency)}};
    if (it.adapter_fault) j["fault"] = it.fault;
    iters.push_back(std::move(j));
  }
  return {{"scenario", o.scenario},
          {"kind", to_string(o.kind)},
          {"claimed", o.claimed},
          {"detected_any", o.detected_any},
          {"min_latency", optional_number(o.min_latency)},
          {"median_latency", optional_number(o.median_latency)},
          {"faults", o.faults},
          {"iterations", std::move(iters)}};
}

json matrix_json(const DetectionMatrix& m) {
  json rows = json::array();
  for (auto k : m.kinds()) {
    json cells = json::object();
    for (const auto& a : m.adapters()) {
      if (!m.has(k, a)) continue;
      const auto& c = m.at(k, a);
      cells[a] = {{"state", state_name(c.state)}, {"latency", optional_number(c.latency)}};
    }
    rows.push_back({{"kind", to_string(k)}, {"display", display_name(k)}, {"cells", std::move(cells)}});
  }
  return {{"adapters", m.adapters()}, {"rows", std::move(rows)}};
}

json profile_json(const TrafficProfile& p) {
  json j = json::object();
  if (p.overhead) {
    const auto& t = *p.overhead;
    j["overhead"] = {{"t_g", t.t_g}, {"t_s", t.t_s}, {"t_d", t.t_d}, {"ov", t.ov}, {"empty", t.empty}};
  } else {
    j["overhead"] = {{"error", p.overhead_error}};
  }
  if (p.locality) {
    const auto& l = *p.locality;
    j["locality"] = {{"verdict", to_string(l.verdict)},
                     {"correlation", l.correlation},
                     {"autocorrelation", l.autocorrelation},
                     {"peak_lag_bins", l.peak_lag},
                     {"max_window_bytes", l.max_window_bytes}};
  } else {
    j["locality"] = {{"error", p.locality_error}};
  }
  json dests = json::array();
  for (const auto& d : p.destinations) {
    dests.push_back({{"destination", d.key},
                     {"party", to_string(d.party)},
                     {"bytes", d.bytes_total},
                     {"first_seen", to_seconds(d.first_seen)},
                     {"last_seen", to_seconds(d.last_seen)}});
  }
  j["destinations"] = std::move(dests);
  return j;
}

json identification_json(const IdentificationResult& r) {
  json devices = json::object();
  for (const auto& [id, v] : r.verdicts) {
    const auto label = r.labels.find(id);
    devices[id] = {{"verdict", to_string(v)}, {"label", label == r.labels.end() ? "" : label->second}};
  }
  json percent = json::object();
  for (auto v : {IdVerdict::Detected, IdVerdict::Error, IdVerdict::Unknown}) {
    percent[std::string(to_string(v))] = r.percent(v);
  }
  return {{"iterations", r.iterations}, {"unstable", r.unstable}, {"percent", std::move(percent)},
          {"devices", std::move(devices)}};
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

/// Left-aligned columns, two spaces apart, trailing blanks trimmed.
std::string table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> w(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) w[i] = display_width(header[i]);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size() && i < w.size(); ++i) w[i] = std::max(w[i], display_width(r[i]));
  }
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    std::string l;
    for (std::size_t i = 0; i < cells.size(); ++i) l += (i ? "  " : "") + pad_display(cells[i], w[i]);
    while (!l.empty() && l.back() == ' ') l.pop_back();
    os << l << '\n';
  };
  line(header);
  std::size_t total = 0;
  for (auto x : w) total += x;
  os << std::string(total + 2 * (w.empty() ? 0 : w.size() - 1), '-') << '\n';
  for (const auto& r : rows) line(r);
  return os.str();
}

const json& member(const json& obj, const char* key) {
  static const json kEmpty = json::object();
  if (!obj.is_object()) throw BenchError(ErrorCode::MalformedFile, std::string("expected an object around '") + key + "'");
  const auto it = obj.find(key);
  return it == obj.end() ? kEmpty : *it;
}

std::string percent_text(double fraction) { return fixed(100.0 * fraction, 2) + "%"; }

}  // namespace

std::vector<std::string> standard_notes() {
  return {
      "destination and overhead byte counts include outbound traffic only",
      "anomalous ON/OFF is modeled as DHCP re-association churn with a post-boot burst",
      "detector thresholds are calibrated against the bundled generators only",
      "the malicious-destination list is a synthetic sample treated as fully active",
      "with DoH on, resolver traffic leaves from the safeguard and counts toward T_S",
  };
}

json report_to_json(const RunReport& r, const json& metadata) {
  json doc;
  doc["metadata"] = metadata;
  doc["name"] = r.name;
  doc["seed"] = r.seed;
  doc["experiment"] = {{"iterations", r.config.iterations},
                       {"wait_after_threat", to_seconds(r.config.wait_after_threat)},
                       {"id_iterations", r.config.id_iterations},
                       {"id_wait", to_seconds(r.config.id_wait)},
                       {"warmup", to_seconds(r.config.warmup)},
                       {"profile_window", to_seconds(r.config.profile_window)}};
  json adapters = json::array();
  for (const auto& a : r.adapters) adapters.push_back({{"name", a.name}, {"type", a.type}});
  doc["adapters"] = std::move(adapters);
  json scenarios = json::array();
  for (const auto& s : r.scenarios) scenarios.push_back(scenario_json(s));
  doc["scenarios"] = std::move(scenarios);
  doc["matrix"] = matrix_json(r.result.matrix);
  json outcomes = json::object();
  for (const auto& [name, list] : r.result.outcomes) {
    json arr = json::array();
    for (const auto& o : list) arr.push_back(outcome_json(o));
    outcomes[name] = std::move(arr);
  }
  doc["outcomes"] = std::move(outcomes);
  doc["adapter_faults"] = r.result.faults;
  json profiles = json::object();
  for (const auto& [name, p] : r.profiles) profiles[name] = profile_json(p);
  doc["profiles"] = std::move(profiles);
  json ident = json::object();
  for (const auto& [name, id] : r.identification) ident[name] = identification_json(id);
  doc["identification"] = std::move(ident);
  doc["notes"] = r.notes;
  return doc;
}

DetectionMatrix matrix_from_json(const json& doc) {
  try {
    const auto& m = member(doc, "matrix");
    if (!m.is_object() || !m.contains("adapters") || !m.contains("rows")) {
      throw BenchError(ErrorCode::MalformedFile, "report has no matrix");
    }
    DetectionMatrix out;
    for (const auto& a : m.at("adapters")) out.add_adapter(a.get<std::string>());
    for (const auto& row : m.at("rows")) {
      const auto kind = parse_threat_kind(row.at("kind").get<std::string>());
      for (const auto& [adapter, cell] : row.at("cells").items()) {
        MatrixCell c;
        c.state = parse_state(cell.at("state").get<std::string>());
        if (!cell.at("latency").is_null()) c.latency = cell.at("latency").get<double>();
        out.set(kind, adapter, c);
      }
    }
    return out;
  } catch (const json::exception& e) {
    throw BenchError(ErrorCode::MalformedFile, std::string("report: ") + e.what());
  }
}

std::string render_text(const json& doc) {
  const auto matrix = matrix_from_json(doc);
  std::ostringstream os;
  try {
    os << "Detection matrix\n" << matrix.render_text();

    std::vector<std::vector<std::string>> overhead, locality, dests;
    for (const auto& [name, p] : member(doc, "profiles").items()) {
      const auto& o = member(p, "overhead");
      if (o.contains("ov")) {
        overhead.push_back({name, std::to_string(o.at("t_g").get<std::uint64_t>()),
                            std::to_string(o.at("t_s").get<std::uint64_t>()),
                            std::to_string(o.at("t_d").get<std::uint64_t>()), percent_text(o.at("ov").get<double>())});
      } else {
        overhead.push_back({name, "-", "-", "-", o.value("error", std::string("n/a"))});
      }
      const auto& l = member(p, "locality");
      if (l.contains("verdict")) {
        locality.push_back({name, l.at("verdict").get<std::string>(), fixed(l.at("correlation").get<double>(), 3),
                            fixed(l.at("autocorrelation").get<double>(), 3)});
      } else {
        locality.push_back({name, l.value("error", std::string("n/a")), "-", "-"});
      }
      for (const auto& d : p.value("destinations", json::array())) {
        dests.push_back({name, d.at("destination").get<std::string>(), d.at("party").get<std::string>(),
                         std::to_string(d.at("bytes").get<std::uint64_t>())});
      }
    }
    os << "\nOverhead\n" << table({"Adapter", "T_G", "T_S", "T_D", "ov"}, overhead);
    os << "\nLocality\n" << table({"Adapter", "Verdict", "Correlation", "Autocorrelation"}, locality);

    std::vector<std::vector<std::string>> ident;
    for (const auto& [name, r] : member(doc, "identification").items()) {
      const auto& pc = member(r, "percent");
      ident.push_back({name, std::to_string(member(r, "devices").size()),
                       fixed(pc.value("DETECTED", 0.0), 1) + "%", fixed(pc.value("ERROR", 0.0), 1) + "%",
                       fixed(pc.value("UNKNOWN", 0.0), 1) + "%", std::to_string(r.value("unstable", 0))});
    }
    os << "\nIdentification\n" << table({"Adapter", "Devices", "Detected", "Error", "Unknown", "Unstable"}, ident);
    os << "\nDestinations\n" << table({"Adapter", "Destination", "Party", "Bytes"}, dests);

    const auto& notes = member(doc, "notes");
    if (notes.is_array() && !notes.empty()) {
      os << "\nNotes\n";
      for (const auto& n : notes) os << "- " << n.get<std::string>() << '\n';
    }
  } catch (const json::exception& e) {
    throw BenchError(ErrorCode::MalformedFile, std::string("report: ") + e.what());
  }
  return os.str();
}

std::string render_csv(const json& doc) {
  const auto matrix = matrix_from_json(doc);
  std::ostringstream os;
  os << "kind,adapter,state,latency_s\n";
  for (auto k : matrix.kinds()) {
    for (const auto& a : matrix.adapters()) {
      if (!matrix.has(k, a)) continue;
      const auto& c = matrix.at(k, a);
      os << to_string(k) << ',' << a << ',' << state_name(c.state) << ',';
      if (c.latency) os << fixed(*c.latency, 3);
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace sgbench
