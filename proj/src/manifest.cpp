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

#include "sgbench/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "sgbench/catalog.hpp"

namespace sgbench {

namespace {

[[noreturn]] void fail(const ini::Section& s, const std::string& what) {
  throw BenchError(ErrorCode::ManifestError, "[" + s.header + "] (line " + std::to_string(s.line) + "): " + what);
}

std::string section_name(const ini::Section& s) {
  const auto sp = s.header.find(' ');
  return sp == std::string::npos ? std::string{} : ini::trim(s.header.substr(sp + 1));
}

double number_of(const ini::Section& s, const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    fail(s, key + ": expected a number, got '" + v + "'");
  }
}

bool bool_of(const ini::Section& s, const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  fail(s, key + ": expected true or false, got '" + v + "'");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& v) {
  std::filesystem::path p(v);
  return p.is_absolute() ? p : base / p;
}

std::filesystem::path existing(const ini::Section& s, const std::string& key, const std::filesystem::path& base,
                               const std::string& v) {
  auto p = resolve(base, v);
  if (!std::filesystem::exists(p)) fail(s, key + ": file not found: " + p.string());
  return p;
}

void apply_experiment(const ini::Section& s, ExperimentConfig& e) {
  for (const auto& [k, v] : s.entries) {
    if (k == "iterations") e.iterations = static_cast<int>(number_of(s, k, v));
    else if (k == "wait_after_threat") e.wait_after_threat = from_seconds(number_of(s, k, v));
    else if (k == "id_iterations") e.id_iterations = static_cast<int>(number_of(s, k, v));
    else if (k == "id_wait") e.id_wait = from_seconds(number_of(s, k, v));
    else if (k == "consistency_points") e.consistency_points = static_cast<int>(number_of(s, k, v));
    else if (k == "warmup") e.warmup = from_seconds(number_of(s, k, v));
    else if (k == "profile_window") e.profile_window = from_seconds(number_of(s, k, v));
    else if (k == "identification") e.identification = bool_of(s, k, v);
    else fail(s, "unknown key '" + k + "'");
  }
  try {
    e.validate();
  } catch (const BenchError& err) {
    fail(s, err.what());
  }
}

void apply_harness(const ini::Section& s, HarnessOptions& o) {
  for (const auto& [k, v] : s.entries) {
    if (k == "background_traffic") o.background_traffic = bool_of(s, k, v);
    else if (k == "boot_burst") o.boot_burst = bool_of(s, k, v);
    else if (k == "background_interval_scale") o.background_interval_scale = number_of(s, k, v);
    else if (k == "hop_latency") o.hop_latency = from_seconds(number_of(s, k, v));
    else if (k == "record_captures") o.record_captures = bool_of(s, k, v);
    else fail(s, "unknown key '" + k + "'");
  }
  if (o.background_interval_scale <= 0) fail(s, "background_interval_scale must be positive");
}

}  // namespace

DeviceDescriptor parse_device(const ini::Section& s) {
  DeviceDescriptor d;
  d.id = section_name(s);
  if (d.id.empty()) fail(s, "device sections need a name: [device NAME]");
  bool has_mac = false;
  for (const auto& [k, v] : s.entries) {
    try {
      if (k == "mac") {
        d.mac = MacAddress::parse(v);
        has_mac = true;
      } else if (k == "category") d.category = parse_category(v);
      else if (k == "label") d.true_label = v;
      else if (k == "profile") {
        builtin_profile(v);
        d.profile = v;
      } else if (k == "dhcp_hostname") d.facts.dhcp_hostname = v;
      else if (k == "dhcp_options") {
        std::vector<std::uint8_t> opts;
        std::string item;
        for (char c : v + ";") {
          if (c == ';' || c == ',') {
            if (!ini::trim(item).empty()) opts.push_back(static_cast<std::uint8_t>(std::stoi(item)));
            item.clear();
          } else {
            item.push_back(c);
          }
        }
        d.facts.dhcp_options = opts;
      } else if (k == "dhcp_vendor") d.facts.dhcp_vendor_class = v;
      else if (k == "mdns") d.facts.mdns_services = ini::split_list(v);
      else if (k == "upnp") d.facts.upnp_device_type = v;
      else if (k == "open_ports") {
        for (const auto& p : ini::split_list(v)) {
          const int port = std::stoi(p);
          if (port < 1 || port > 65535) fail(s, "open_ports: bad port " + p);
          d.open_ports.insert(static_cast<std::uint16_t>(port));
        }
      } else {
        fail(s, "unknown key '" + k + "'");
      }
    } catch (const BenchError& e) {
      if (e.code() == ErrorCode::ManifestError) throw;
      fail(s, k + ": " + e.what());
    } catch (const std::exception&) {
      fail(s, k + ": cannot parse '" + v + "'");
    }
  }
  if (!has_mac) fail(s, "mac is required");
  if (d.true_label.empty()) d.true_label = d.id;
  return d;
}

ThreatScenario parse_scenario(const ini::Section& s, const std::filesystem::path& base_dir) {
  ThreatScenario sc;
  sc.name = section_name(s);
  if (sc.name.empty()) fail(s, "scenario sections need a name: [scenario NAME]");
  bool has_kind = false;
  for (const auto& [k, v] : s.entries) {
    try {
      if (k == "kind") {
        sc.kind = parse_threat_kind(v);
        has_kind = true;
      } else if (k == "origin") sc.origin = parse_threat_origin(v);
      else if (k == "targets") sc.targets = ini::split_list(v);
      else if (k == "seed") sc.seed = static_cast<std::uint64_t>(std::stoull(v));
      else if (k == "tag") sc.tag = static_cast<std::uint32_t>(std::stoul(v));
      else if (k == "template" && v.rfind("builtin:", 0) != 0) sc.params[k] = existing(s, k, base_dir, v).string();
      else sc.params[k] = v;
    } catch (const BenchError& e) {
      if (e.code() == ErrorCode::ManifestError) throw;
      fail(s, k + ": " + e.what());
    } catch (const std::exception&) {
      fail(s, k + ": cannot parse '" + v + "'");
    }
  }
  if (!has_kind) fail(s, "kind is required");
  if (sc.tag == 0 || is_benign_followup(sc.tag)) fail(s, "tag must be in 1..2147483647");
  try {
    sc.validate();
  } catch (const BenchError& e) {
    fail(s, e.what());
  }
  return sc;
}

Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir, std::string_view origin) {
  const auto doc = ini::parse(text, origin);
  Manifest m;
  m.base_dir = base_dir;
  static const std::set<std::string> kSingle = {"run", "experiment", "harness", "resources", "topology"};
  for (const auto& s : doc.sections) {
    if (s.line == 0) {
      if (!s.entries.empty()) fail(s, "keys before the first section");
      continue;
    }
    const auto kind = s.header.substr(0, s.header.find(' '));
    if (!kSingle.contains(s.header) && kind != "device" && kind != "adapter" && kind != "scenario") {
      fail(s, "unknown section");
    }
  }

  const auto* run = doc.find("run");
  if (!run) throw BenchError(ErrorCode::ManifestError, "missing [run] section");
  bool has_seed = false;
  for (const auto& [k, v] : run->entries) {
    if (k == "name") m.name = v;
    else if (k == "seed") {
      try {
        m.seed = std::stoull(v);
        has_seed = true;
      } catch (const std::exception&) {
        fail(*run, "seed: expected an integer, got '" + v + "'");
      }
    } else if (k == "output") m.output_dir = resolve(base_dir, v);
    else fail(*run, "unknown key '" + k + "'");
  }
  if (!has_seed) fail(*run, "seed is required");
  m.experiment.seed = m.seed;
  if (const auto* e = doc.find("experiment")) apply_experiment(*e, m.experiment);
  if (const auto* h = doc.find("harness")) apply_harness(*h, m.harness);

  if (const auto* r = doc.find("resources")) {
    for (const auto& [k, v] : r->entries) {
      auto p = existing(*r, k, base_dir, v);
      if (k == "wordlist") m.resources.wordlist = p;
      else if (k == "blocklist") m.resources.blocklist = p;
      else if (k == "pii_profile") m.resources.pii_profile = p;
      else if (k == "party_db") m.resources.party_db = p;
      else if (k == "fingerprint_db") m.resources.fingerprint_db = p;
      else fail(*r, "unknown key '" + k + "'");
    }
  }

  if (const auto* t = doc.find("topology")) {
    for (const auto& [k, v] : t->entries) {
      if (k != "catalog") fail(*t, "unknown key '" + k + "'");
      try {
        auto devs = v == "all" ? device_catalog() : v == "benign-month" ? benign_month_devices()
                                                                          : catalog_subset(ini::split_list(v));
        m.devices.insert(m.devices.end(), devs.begin(), devs.end());
      } catch (const BenchError& e) {
        fail(*t, std::string("catalog: ") + e.what());
      }
    }
  }
  for (const auto* s : doc.find_prefixed("device")) m.devices.push_back(parse_device(*s));
  std::set<std::string> ids;
  std::set<MacAddress> macs;
  for (const auto& d : m.devices) {
    if (!ids.insert(d.id).second) throw BenchError(ErrorCode::ManifestError, "duplicate device id '" + d.id + "'");
    if (!macs.insert(d.mac).second) {
      throw BenchError(ErrorCode::ManifestError, "duplicate MAC " + d.mac.to_string() + " on '" + d.id + "'");
    }
  }

  for (const auto* s : doc.find_prefixed("adapter")) {
    AdapterSpec a;
    a.name = section_name(*s);
    if (a.name.empty()) fail(*s, "adapter sections need a name: [adapter NAME]");
    ini::Section overrides{s->header, s->line, {}};
    std::optional<std::filesystem::path> config_file;
    for (const auto& [k, v] : s->entries) {
      if (k == "type") a.type = v;
      else if (k == "config") config_file = existing(*s, k, base_dir, v);
      else overrides.entries.emplace_back(k, v);
    }
    static const std::set<std::string> kTypes = {"null", "reference", "fsecure-like", "avira-like"};
    if (!kTypes.contains(a.type)) fail(*s, "type: unknown adapter type '" + a.type + "'");
    try {
      if (m.resources.wordlist) a.config.wordlist = load_wordlist(*m.resources.wordlist);
      if (m.resources.blocklist) a.config.blocklist = load_blocklist(*m.resources.blocklist);
      if (m.resources.pii_profile) a.config.pii = load_pii_profile(*m.resources.pii_profile);
      if (m.resources.fingerprint_db) a.config.fingerprints = FingerprintDb::load(*m.resources.fingerprint_db);
      if (config_file) {
        const auto cdoc = ini::parse_file(*config_file);
        const auto* det = cdoc.find("detector");
        if (!det) throw BenchError(ErrorCode::ManifestError, config_file->string() + ": missing [detector] section");
        a.config.apply(*det, config_file->parent_path());
      }
      a.config.apply(overrides, base_dir);
    } catch (const BenchError& e) {
      fail(*s, e.what());
    }
    m.adapters.push_back(std::move(a));
  }

  std::set<std::string> names;
  for (const auto* s : doc.find_prefixed("scenario")) {
    auto sc = parse_scenario(*s, base_dir);
    if (!names.insert(sc.name).second) fail(*s, "duplicate scenario name");
    for (const auto& t : sc.targets) {
      if (!ids.contains(t)) fail(*s, "targets: unknown device '" + t + "'");
    }
    m.scenarios.push_back(std::move(sc));
  }
  if (!m.scenarios.empty() && m.adapters.empty()) {
    throw BenchError(ErrorCode::ManifestError, "scenarios given but no [adapter NAME] section");
  }
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw BenchError(ErrorCode::ManifestError, "cannot read manifest " + path.string());
  }
  const auto doc_text = [&] {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }();
  auto m = parse_manifest(doc_text, path.parent_path(), path.string());
  m.path = path;
  return m;
}

ThreatResources Manifest::load_resources() const {
  ThreatResources r;
  const auto dir = default_data_dir();
  r.wordlist = load_wordlist(resources.wordlist.value_or(dir / "weak_passwords.txt"));
  r.blocklist = load_blocklist(resources.blocklist.value_or(dir / "blocklist.txt"));
  r.pii = load_pii_profile(resources.pii_profile.value_or(dir / "pii_profile.txt"));
  return r;
}

Suite Manifest::suite() const {
  Suite s;
  s.devices = devices;
  s.adapters = adapters;
  s.scenarios = scenarios;
  s.config = experiment;
  s.harness = harness;
  s.resources = load_resources();
  return s;
}

}  // namespace sgbench
