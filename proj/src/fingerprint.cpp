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

#include "sgbench/fingerprint.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "sgbench/ini.hpp"

namespace sgbench {

namespace {

char fold(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

std::string format_options(const std::vector<std::uint8_t>& opts) {
  std::string out;
  for (std::size_t i = 0; i < opts.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(opts[i]);
  }
  return out;
}

}  // namespace

std::string_view to_string(PatternKind kind) {
  switch (kind) {
    case PatternKind::Oui: return "oui";
    case PatternKind::DhcpHostname: return "dhcp_hostname";
    case PatternKind::DhcpOptions: return "dhcp_options";
    case PatternKind::DhcpVendor: return "dhcp_vendor";
    case PatternKind::Mdns: return "mdns";
    case PatternKind::Upnp: return "upnp";
  }
  return "oui";
}

PatternKind parse_pattern_kind(std::string_view text) {
  for (auto k : {PatternKind::Oui, PatternKind::DhcpHostname, PatternKind::DhcpOptions, PatternKind::DhcpVendor,
                 PatternKind::Mdns, PatternKind::Upnp}) {
    if (to_string(k) == text) return k;
  }
  throw BenchError(ErrorCode::InvalidArgument, "unknown fingerprint pattern kind '" + std::string(text) + "'");
}

bool glob_match(std::string_view pattern, std::string_view text) {
  std::size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || fold(pattern[p]) == fold(text[t]))) {
      ++p;
      ++t;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

void FingerprintDb::add(FingerprintEntry entry) {
  if (!(entry.weight > 0)) throw BenchError(ErrorCode::InvalidArgument, "fingerprint weight must be > 0");
  if (entry.label.empty()) throw BenchError(ErrorCode::InvalidArgument, "fingerprint label is empty");
  for (const auto& e : entries_) {
    if (e.kind == entry.kind && e.pattern == entry.pattern && e.label != entry.label) {
      throw BenchError(ErrorCode::InvalidArgument, "pattern '" + entry.pattern + "' already maps to '" + e.label + "'");
    }
  }
  entries_.push_back(std::move(entry));
}

bool FingerprintDb::matches(const FingerprintEntry& e, const ObservedFacts& f) const {
  switch (e.kind) {
    case PatternKind::Oui: return glob_match(e.pattern, f.mac.oui());
    case PatternKind::DhcpHostname: return f.dhcp_hostname && glob_match(e.pattern, *f.dhcp_hostname);
    case PatternKind::DhcpOptions: return f.dhcp_options && format_options(*f.dhcp_options) == e.pattern;
    case PatternKind::DhcpVendor: return f.dhcp_vendor_class && glob_match(e.pattern, *f.dhcp_vendor_class);
    case PatternKind::Mdns: return f.mdns_services.contains(e.pattern);
    case PatternKind::Upnp: return f.upnp_device_type && glob_match(e.pattern, *f.upnp_device_type);
  }
  return false;
}

std::optional<std::string> FingerprintDb::classify(const ObservedFacts& facts) const {
  std::map<std::string, double> score;
  for (const auto& e : entries_) {
    if (matches(e, facts)) score[e.label] += e.weight;
  }
  std::optional<std::string> best;
  double best_score = 0;
  // std::map iterates labels in order, so the first maximum is the smallest label.
  for (const auto& [label, s] : score) {
    if (!best || s > best_score) {
      best = label;
      best_score = s;
    }
  }
  return best;
}

FingerprintDb FingerprintDb::parse(std::string_view text) {
  FingerprintDb db;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto line = ini::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
      const auto comma = line.find(',', pos);
      if (comma == std::string::npos) break;
      cols.push_back(ini::trim(line.substr(pos, comma - pos)));
      pos = comma + 1;
    }
    cols.push_back(ini::trim(line.substr(pos)));
    if (cols.size() != 4) {
      throw BenchError(ErrorCode::InvalidArgument,
                       "fingerprint db line " + std::to_string(lineno) + ": expected kind,pattern,label,weight");
    }
    FingerprintEntry e;
    e.kind = parse_pattern_kind(cols[0]);
    e.pattern = cols[1];
    e.label = cols[2];
    try {
      e.weight = std::stod(cols[3]);
    } catch (const std::exception&) {
      throw BenchError(ErrorCode::InvalidArgument, "fingerprint db line " + std::to_string(lineno) + ": bad weight");
    }
    db.add(std::move(e));
  }
  return db;
}

FingerprintDb FingerprintDb::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw BenchError(ErrorCode::ResourceMissing, "fingerprint db not found: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace sgbench
