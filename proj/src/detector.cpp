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

#include "sgbench/detector.hpp"

#include <algorithm>
#include <cctype>

#include "sgbench/dns.hpp"
#include "sgbench/harness.hpp"
#include "sgbench/profiles.hpp"
#include "sgbench/threatgen.hpp"

namespace sgbench {

using namespace std::chrono_literals;

namespace {

constexpr Duration kForever = std::chrono::hours(24 * 365 * 100);

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_dhcp(const PacketRecord& p) {
  return p.is_udp() && (*p.dst_port == 67 || *p.dst_port == 68) && (*p.src_port == 67 || *p.src_port == 68);
}

std::uint64_t pair_key(Ipv4Address a, Ipv4Address b) { return (std::uint64_t{a.value} << 32) | b.value; }

std::string subject(Ipv4Address a, Ipv4Address b) { return a.to_string() + ">" + b.to_string(); }

Duration seconds_value(const std::string& v) { return from_seconds(std::stod(v)); }

bool bool_value(const std::string& key, const std::string& v) {
  const auto l = lower(v);
  if (l == "true" || l == "yes" || l == "on" || l == "1") return true;
  if (l == "false" || l == "no" || l == "off" || l == "0") return false;
  throw BenchError(ErrorCode::ManifestError, key + ": expected a boolean, got '" + v + "'");
}

std::vector<std::uint16_t> port_list(const std::string& v) {
  std::vector<std::uint16_t> out;
  for (const auto& item : ini::split_list(v)) {
    const int port = std::stoi(item);
    if (port < 1 || port > 65535) throw BenchError(ErrorCode::ManifestError, "bad port '" + item + "'");
    out.push_back(static_cast<std::uint16_t>(port));
  }
  return out;
}

}  // namespace

// ------------------------------------------------------------------ config

std::vector<std::string> DetectorConfig::keys() {
  return {"volumetric_window", "syn_half_open", "http_gets", "dns_queries", "dns_unique_ratio", "frag_incomplete",
          "icmp_unreachable", "udp_sustain", "scan_window", "scan_ports", "scan_diversity", "alert_cooldown",
          "port_scan_mode", "watchlist", "port_scan_delay", "port_probe_gap", "port_scan_period",
          "entropy_threshold", "plaintext_ports", "tls_ports", "unencrypted_dedupe", "blocklist_dedupe", "wordlist",
          "blocklist", "pii_profile", "fingerprint_db", "doh", "doh_resolver", "auto_quarantine",
          "learning_window", "anomaly_window", "weight_new_destination", "weight_divergence", "weight_rate",
          "anomaly_threshold", "upload_z", "onoff_cycles", "onoff_window", "claims"};
}

void DetectorConfig::apply(const ini::Section& section, const std::filesystem::path& base_dir) {
  auto path_of = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };
  for (const auto& [key, v] : section.entries) {
    try {
      if (key == "volumetric_window") volumetric_window = seconds_value(v);
      else if (key == "syn_half_open") syn_half_open = std::stoi(v);
      else if (key == "http_gets") http_gets = std::stoi(v);
      else if (key == "dns_queries") dns_queries = std::stoi(v);
      else if (key == "dns_unique_ratio") dns_unique_ratio = std::stod(v);
      else if (key == "frag_incomplete") frag_incomplete = std::stoi(v);
      else if (key == "icmp_unreachable") icmp_unreachable = std::stoi(v);
      else if (key == "udp_sustain") udp_sustain = seconds_value(v);
      else if (key == "scan_window") scan_window = seconds_value(v);
      else if (key == "scan_ports") scan_ports = std::stoi(v);
      else if (key == "scan_diversity") scan_diversity = std::stoi(v);
      else if (key == "alert_cooldown") alert_cooldown = seconds_value(v);
      else if (key == "port_scan_mode") {
        if (v == "on_connect") port_scan_mode = PortScanMode::OnConnect;
        else if (v == "weekly") port_scan_mode = PortScanMode::Weekly;
        else if (v == "off") port_scan_mode = PortScanMode::Off;
        else throw BenchError(ErrorCode::ManifestError, "port_scan_mode: expected on_connect, weekly or off");
      } else if (key == "watchlist") watchlist = port_list(v);
      else if (key == "port_scan_delay") port_scan_delay = seconds_value(v);
      else if (key == "port_probe_gap") port_probe_gap = seconds_value(v);
      else if (key == "port_scan_period") port_scan_period = seconds_value(v);
      else if (key == "entropy_threshold") entropy_threshold = std::stod(v);
      else if (key == "plaintext_ports") {
        auto l = port_list(v);
        plaintext_ports = {l.begin(), l.end()};
      } else if (key == "tls_ports") {
        auto l = port_list(v);
        tls_ports = {l.begin(), l.end()};
      } else if (key == "unencrypted_dedupe") unencrypted_dedupe = seconds_value(v);
      else if (key == "blocklist_dedupe") blocklist_dedupe = seconds_value(v);
      else if (key == "wordlist") wordlist = load_wordlist(path_of(v));
      else if (key == "blocklist") blocklist = load_blocklist(path_of(v));
      else if (key == "pii_profile") pii = load_pii_profile(path_of(v));
      else if (key == "fingerprint_db") fingerprints = FingerprintDb::load(path_of(v));
      else if (key == "doh") doh_enabled = bool_value(key, v);
      else if (key == "doh_resolver") doh_resolver = Ipv4Address::parse(v);
      else if (key == "auto_quarantine") auto_quarantine = bool_value(key, v);
      else if (key == "learning_window") learning_window = seconds_value(v);
      else if (key == "anomaly_window") anomaly_window = seconds_value(v);
      else if (key == "weight_new_destination") weights.new_destination = std::stod(v);
      else if (key == "weight_divergence") weights.divergence = std::stod(v);
      else if (key == "weight_rate") weights.rate = std::stod(v);
      else if (key == "anomaly_threshold") anomaly_threshold = std::stod(v);
      else if (key == "upload_z") upload_z = std::stod(v);
      else if (key == "onoff_cycles") onoff_cycles = std::stoi(v);
      else if (key == "onoff_window") onoff_window = seconds_value(v);
      else if (key == "claims") {
        claims.clear();
        for (const auto& item : ini::split_list(v)) {
          if (item == "all") {
            claims.insert(kAllThreatKinds.begin(), kAllThreatKinds.end());
          } else if (item != "none") {
            claims.insert(parse_threat_kind(item));
          }
        }
      } else {
        throw BenchError(ErrorCode::ManifestError, "unknown detector setting '" + key + "'");
      }
    } catch (const BenchError& e) {
      if (e.code() == ErrorCode::ManifestError) throw;
      throw BenchError(ErrorCode::ManifestError, key + ": " + e.what());
    } catch (const std::exception&) {
      throw BenchError(ErrorCode::ManifestError, key + ": cannot parse '" + v + "'");
    }
  }
  if (volumetric_window <= Duration::zero() || scan_window <= Duration::zero() ||
      anomaly_window <= Duration::zero()) {
    throw BenchError(ErrorCode::ManifestError, "detector windows must be positive");
  }
}

std::map<std::string, std::string> NullAdapter::identify_devices() const {
  std::map<std::string, std::string> out;
  for (const auto& d : devices_) out[d.id] = std::string(kUnknownLabel);
  return out;
}

// --------------------------------------------------------------- detector

ReferenceDetector::ReferenceDetector(DetectorConfig config, std::string name)
    : name_(std::move(name)), config_(std::move(config)) {
  for (const auto& w : config_.wordlist) wordlist_.insert(w);
  for (const auto& b : config_.blocklist) blocklist_.insert(lower(b));
  pii_name_lower_ = lower(config_.pii.name);
  pii_email_lower_ = lower(config_.pii.email);
}

void ReferenceDetector::attach(const std::vector<AdapterDevice>& devices, const AddressPlan& plan) {
  plan_ = plan;
  devices_.clear();
  for (const auto& d : devices) {
    DeviceState st;
    st.id = d.id;
    st.mac = d.mac;
    st.facts.mac = d.mac;
    devices_.push_back(std::move(st));
  }
  reset();
}

std::optional<std::size_t> ReferenceDetector::device_by_mac(const MacAddress& mac) const {
  for (std::size_t i = 0; i < devices_.size(); ++i) {
    if (devices_[i].mac == mac) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> ReferenceDetector::device_by_ip(Ipv4Address ip) const {
  auto it = ip_index_.find(ip.value);
  if (it == ip_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> ReferenceDetector::subject_of(const PacketRecord& p, Direction dir) const {
  switch (dir) {
    case Direction::LanToWan: {
      if (auto d = device_by_mac(p.src_mac)) return d;
      return device_by_ip(p.src_ip);
    }
    case Direction::WanToLan: return device_by_ip(p.dst_ip);
    case Direction::LanLocal: {
      if (auto d = device_by_mac(p.src_mac)) return d;
      return device_by_ip(p.dst_ip);
    }
  }
  return std::nullopt;
}

std::vector<std::string> ReferenceDetector::devices_of(Ipv4Address a, Ipv4Address b) const {
  std::vector<std::string> out;
  for (auto ip : {a, b}) {
    if (auto d = device_by_ip(ip)) {
      if (std::find(out.begin(), out.end(), devices_[*d].id) == out.end()) out.push_back(devices_[*d].id);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void ReferenceDetector::emit(ThreatKind kind, Timestamp t, std::vector<std::string> devices, std::string detail,
                             const std::string& subj, Duration dedupe) {
  const auto key = std::make_pair(kind, subj);
  if (auto it = last_alert_.find(key); it != last_alert_.end() && t - it->second < dedupe) return;
  last_alert_[key] = t;
  Alert a;
  a.time = t;
  a.category = AlertKind::Threat;
  a.threat = kind;
  a.device_ids = std::move(devices);
  a.detail = std::move(detail);
  alerts_.push_back(a);
}

void ReferenceDetector::emit_finding(Timestamp t, std::size_t device, std::uint16_t port) {
  if (!findings_.insert({device, port}).second) return;
  Alert a;
  a.time = t;
  a.category = AlertKind::OpenPortFinding;
  a.threat = ThreatKind::OpenPort;
  a.device_ids = {devices_[device].id};
  a.detail = "tcp/" + std::to_string(port) + " open";
  alerts_.push_back(std::move(a));
}

ForwardDecision ReferenceDetector::process(const PacketRecord& p, Direction dir) {
  if (!p.is_ipv4()) return ForwardDecision::forward();

  if (dir == Direction::LanLocal) {
    observe_local(p);
    check_scan(p);
    const auto dev = subject_of(p, dir);
    if (dev && quarantined(devices_[*dev].id) && !is_dhcp(p)) return ForwardDecision::drop();
    return ForwardDecision::forward();
  }

  if (dir == Direction::WanToLan) {
    if (auto r = handle_doh(p, dir, std::nullopt)) return *r;
    learn_dns(p);
  }

  const auto dev = subject_of(p, dir);
  if (dev && dir == Direction::LanToWan && plan_.on_iot_lan(p.src_ip) && p.src_ip.value != 0) {
    auto& d = devices_[*dev];
    if (!d.ip || *d.ip != p.src_ip) {
      if (d.ip) ip_index_.erase(d.ip->value);
      d.ip = p.src_ip;
      ip_index_[p.src_ip.value] = *dev;
    }
  }
  if (dev && quarantined(devices_[*dev].id) && !is_dhcp(p)) return ForwardDecision::drop();

  check_volumetric(p);
  check_icmp(p, dir);
  check_scan(p);
  if (dir == Direction::LanToWan && dev) {
    inspect_payload(p, *dev);
    match_destination(p, *dev);
    account_anomaly(p, *dev);
  }
  if (dir == Direction::LanToWan) {
    if (auto r = handle_doh(p, dir, dev)) return *r;
  }
  return ForwardDecision::forward();
}

// ------------------------------------------------------------ LAN chatter

void ReferenceDetector::observe_local(const PacketRecord& p) {
  if (!p.is_udp() && !p.is_tcp()) return;
  if (p.is_udp()) {
    const auto dport = *p.dst_port;
    if (dport == 67 || dport == 68) {
      observe_dhcp(p);
      return;
    }
    const auto dev = device_by_mac(p.src_mac);
    if (!dev) return;
    auto& facts = devices_[*dev].facts;
    if (dport == 5353) {
      if (auto m = dns::decode(p.payload)) {
        for (const auto& rr : m->answers) {
          if (rr.type != dns::kTypePtr) continue;
          auto name = rr.name;
          if (name.size() > 6 && name.compare(name.size() - 6, 6, ".local") == 0) name.resize(name.size() - 6);
          facts.mdns_services.insert(name);
        }
      } else {
        ++malformed_;
      }
    } else if (dport == 1900) {
      if (auto t = ssdp_device_type(p.payload_view())) facts.upnp_device_type = *t;
    }
    return;
  }
  // Answers to our own watchlist probes.
  if (p.dst_ip == plan_.safeguard_lan_ip && p.tcp->has(tcp_flag::kSyn | tcp_flag::kAck) && *p.dst_port >= 61000 &&
      *p.dst_port < 62000) {
    if (auto dev = device_by_ip(p.src_ip)) emit_finding(p.timestamp, *dev, *p.src_port);
  }
}

void ReferenceDetector::observe_dhcp(const PacketRecord& p) {
  const auto m = dhcp::decode(p.payload);
  if (!m) {
    ++malformed_;
    return;
  }
  const auto dev = device_by_mac(m->chaddr);
  if (!dev) return;
  auto& d = devices_[*dev];
  const auto t = p.timestamp;
  if (m->op == 1) {
    if (m->hostname) d.facts.dhcp_hostname = m->hostname;
    if (m->parameter_list) d.facts.dhcp_options = m->parameter_list;
    if (m->vendor_class) d.facts.dhcp_vendor_class = m->vendor_class;
    if (m->type == dhcp::kRequest && d.associated) {
      d.reassociations.push_back(t);
      while (!d.reassociations.empty() && d.reassociations.front() < t - config_.onoff_window) {
        d.reassociations.pop_front();
      }
      if (static_cast<int>(d.reassociations.size()) >= config_.onoff_cycles) {
        emit(ThreatKind::AnomOnOff, t, {d.id},
             std::to_string(d.reassociations.size()) + " DHCP re-associations within " +
                 std::to_string(config_.onoff_window.count() / 1000000) + "s",
             d.id, config_.alert_cooldown);
      }
    }
  } else if (m->type == dhcp::kAck) {
    if (d.ip) ip_index_.erase(d.ip->value);
    d.ip = m->yiaddr;
    ip_index_[m->yiaddr.value] = *dev;
    d.associated = true;
    if (config_.port_scan_mode == DetectorConfig::PortScanMode::OnConnect) {
      schedule_scan(*dev, t + config_.port_scan_delay);
    }
  }
}

// ------------------------------------------------------------- volumetric

void ReferenceDetector::check_volumetric(const PacketRecord& p) {
  const bool tcp = p.is_tcp();
  const bool dns_query = p.is_udp() && *p.dst_port == 53;
  const bool frag = p.is_fragment();
  if (!tcp && !dns_query && !frag) return;
  const auto t = p.timestamp;
  const auto cutoff = t - config_.volumetric_window;
  auto& st = pairs_[pair_key(p.src_ip, p.dst_ip)];
  auto fire = [&](ThreatKind kind, std::string detail) {
    const auto before = alerts_.size();
    emit(kind, t, devices_of(p.src_ip, p.dst_ip), std::move(detail), subject(p.src_ip, p.dst_ip),
         config_.alert_cooldown);
    if (alerts_.size() > before && config_.auto_quarantine) {
      if (auto src = device_by_ip(p.src_ip)) devices_[*src].quarantined_auto = true;
    }
  };

  if (frag) {
    const FragKey k{p.src_ip.value, p.dst_ip.value, p.ip_id, p.ip_protocol};
    if (p.frag_offset == 0 && p.more_fragments) {
      st.frag.add(t, k);
    } else if (p.frag_offset > 0 && !p.more_fragments) {
      st.frag.complete(k);
    }
    st.frag.expire(cutoff);
    if (st.frag.count >= config_.frag_incomplete) {
      fire(ThreatKind::IpfragFlood, std::to_string(st.frag.count) + " incomplete fragment groups from " +
                                        p.src_ip.to_string() + " to " + p.dst_ip.to_string());
    }
    return;
  }
  if (tcp) {
    const auto& tc = *p.tcp;
    const auto flow = flow_of(p);
    if (tc.has(tcp_flag::kSyn) && !tc.has(tcp_flag::kAck)) {
      auto& w = st.syn[*p.dst_port];
      w.add(t, flow);
      w.expire(cutoff);
      if (w.count >= config_.syn_half_open) {
        fire(ThreatKind::SynFlood, std::to_string(w.count) + " half-open connections from " + p.src_ip.to_string() +
                                       " to " + p.dst_ip.to_string() + ":" + std::to_string(*p.dst_port));
      }
      return;
    }
    if (tc.has(tcp_flag::kAck) && !tc.has(tcp_flag::kSyn) && !tc.has(tcp_flag::kRst)) {
      if (auto it = st.syn.find(*p.dst_port); it != st.syn.end()) it->second.complete(flow);
      if (p.payload.size() >= 4 && p.payload_view().substr(0, 4) == "GET ") {
        st.gets.push_back(t);
        while (!st.gets.empty() && st.gets.front() < cutoff) st.gets.pop_front();
        if (static_cast<int>(st.gets.size()) >= config_.http_gets) {
          fire(ThreatKind::HttpFlood, std::to_string(st.gets.size()) + " HTTP GETs from " + p.src_ip.to_string() +
                                          " to " + p.dst_ip.to_string());
        }
      }
    }
    return;
  }
  // DNS query.
  const auto q = dns::decode(p.payload);
  if (!q || q->response || q->questions.empty()) {
    if (!q) ++malformed_;
    return;
  }
  const auto& name = q->questions.front().name;
  auto label = lower(name.substr(0, name.find('.')));
  ++st.dns_labels[label];
  st.dns.emplace_back(t, std::move(label));
  while (!st.dns.empty() && st.dns.front().first < cutoff) {
    auto it = st.dns_labels.find(st.dns.front().second);
    if (it != st.dns_labels.end() && --it->second == 0) st.dns_labels.erase(it);
    st.dns.pop_front();
  }
  const auto n = static_cast<int>(st.dns.size());
  if (n >= config_.dns_queries &&
      static_cast<double>(st.dns_labels.size()) / static_cast<double>(n) > config_.dns_unique_ratio) {
    fire(ThreatKind::DnsFlood, std::to_string(n) + " DNS queries (" + std::to_string(st.dns_labels.size()) +
                                   " distinct labels) from " + p.src_ip.to_string() + " to " + p.dst_ip.to_string());
  }
}

void ReferenceDetector::check_icmp(const PacketRecord& p, Direction dir) {
  if (!p.is_icmp() || p.icmp->type != icmp_type::kUnreachable) return;
  const auto dev = dir == Direction::WanToLan ? device_by_ip(p.dst_ip) : device_by_ip(p.src_ip);
  if (!dev) return;
  auto& d = devices_[*dev];
  d.icmp.push_back(p.timestamp);
  update_icmp(d, p.timestamp);
}

void ReferenceDetector::update_icmp(DeviceState& d, Timestamp now) {
  while (!d.icmp.empty() && d.icmp.front() < now - config_.volumetric_window) d.icmp.pop_front();
  if (static_cast<int>(d.icmp.size()) < config_.icmp_unreachable) {
    d.icmp_sustained_since.reset();
    return;
  }
  if (!d.icmp_sustained_since) d.icmp_sustained_since = now;
  if (now - *d.icmp_sustained_since >= config_.udp_sustain) {
    const auto before = alerts_.size();
    emit(ThreatKind::UdpFlood, now, {d.id},
         std::to_string(d.icmp.size()) + " ICMP port-unreachable per window for " +
             std::to_string((now - *d.icmp_sustained_since).count() / 1000000) + "s",
         d.id, config_.alert_cooldown);
    if (alerts_.size() > before && config_.auto_quarantine) d.quarantined_auto = true;
  }
}

// ------------------------------------------------------------------ scans

void ReferenceDetector::check_scan(const PacketRecord& p) {
  const bool diversity = is_probe_diversity(p);
  bool probe = false;
  if (p.is_tcp()) {
    const auto f = p.tcp->flags;
    probe = !(f & tcp_flag::kAck) && !(f & tcp_flag::kRst);
  }
  if (!probe && !diversity) return;
  const auto t = p.timestamp;
  const auto cutoff = t - config_.scan_window;
  auto& st = pairs_[pair_key(p.src_ip, p.dst_ip)];
  if (probe) {
    st.probes.emplace_back(t, *p.dst_port);
    ++st.probe_ports[*p.dst_port];
  }
  if (diversity) st.diversity.push_back(t);
  while (!st.probes.empty() && st.probes.front().first < cutoff) {
    auto it = st.probe_ports.find(st.probes.front().second);
    if (it != st.probe_ports.end() && --it->second == 0) st.probe_ports.erase(it);
    st.probes.pop_front();
  }
  while (!st.diversity.empty() && st.diversity.front() < cutoff) st.diversity.pop_front();
  const auto ports = static_cast<int>(st.probe_ports.size());
  if (ports < config_.scan_ports) return;
  const auto subj = subject(p.src_ip, p.dst_ip);
  emit(ThreatKind::PortScan, t, devices_of(p.src_ip, p.dst_ip),
       std::to_string(ports) + " distinct ports probed by " + p.src_ip.to_string() + " on " + p.dst_ip.to_string(),
       subj, config_.alert_cooldown);
  if (static_cast<int>(st.diversity.size()) >= config_.scan_diversity) {
    emit(ThreatKind::OsScan, t, devices_of(p.src_ip, p.dst_ip),
         std::to_string(st.diversity.size()) + " fingerprinting probes from " + p.src_ip.to_string(), subj,
         config_.alert_cooldown);
  }
}

void ReferenceDetector::schedule_scan(std::size_t device, Timestamp at) {
  for (std::size_t i = 0; i < config_.watchlist.size(); ++i) {
    ProbeJob job{at + config_.port_probe_gap * static_cast<std::int64_t>(i), device, config_.watchlist[i]};
    auto pos = std::upper_bound(probe_queue_.begin(), probe_queue_.end(), job,
                                [](const ProbeJob& a, const ProbeJob& b) { return a.at < b.at; });
    probe_queue_.insert(pos, job);
  }
}

void ReferenceDetector::request_port_scan(const std::string& device_id, Timestamp at) {
  for (std::size_t i = 0; i < devices_.size(); ++i) {
    if (devices_[i].id != device_id) continue;
    if (!devices_[i].ip) throw BenchError(ErrorCode::DeviceDisconnected, device_id + " is not connected");
    schedule_scan(i, at);
    return;
  }
  throw BenchError(ErrorCode::UnknownDevice, device_id);
}

// ---------------------------------------------------------------- payload

void ReferenceDetector::inspect_payload(const PacketRecord& p, std::size_t device) {
  if (!p.is_tcp() || p.payload.empty()) return;
  const auto port = *p.dst_port;
  if (config_.infrastructure_ports.contains(port)) return;
  const bool plaintext = config_.plaintext_ports.contains(port) ||
                         (!config_.tls_ports.contains(port) && byte_entropy(p.payload) < config_.entropy_threshold);
  if (!plaintext) return;
  const auto& d = devices_[device];
  const auto t = p.timestamp;
  const auto text = p.payload_view();
  emit(ThreatKind::Unencrypted, t, {d.id},
       "plaintext to " + p.dst_ip.to_string() + ":" + std::to_string(port),
       d.id + ">" + p.dst_ip.to_string() + ":" + std::to_string(port), config_.unencrypted_dedupe);

  if (text.substr(0, 5) == "PASS " && !wordlist_.empty()) {
    auto word = std::string(text.substr(5));
    while (!word.empty() && (word.back() == '\r' || word.back() == '\n')) word.pop_back();
    if (wordlist_.contains(word)) {
      emit(ThreatKind::WeakPassword, t, {d.id}, "weak credential sent to " + p.dst_ip.to_string(), d.id,
           config_.alert_cooldown);
    }
  }
  if (!config_.pii.empty()) {
    const auto folded = lower(text);
    const bool hit = (!pii_name_lower_.empty() && folded.find(pii_name_lower_) != std::string::npos) ||
                     (!pii_email_lower_.empty() && folded.find(pii_email_lower_) != std::string::npos) ||
                     (!config_.pii.password.empty() && text.find(config_.pii.password) != std::string_view::npos);
    if (hit) {
      emit(ThreatKind::PiiExposure, t, {d.id}, "account data sent in the clear to " + p.dst_ip.to_string(), d.id,
           config_.alert_cooldown);
    }
  }
}

void ReferenceDetector::learn_dns(const PacketRecord& p) {
  if (!p.is_udp() || *p.src_port != 53) return;
  const auto m = dns::decode(p.payload);
  if (!m) {
    ++malformed_;
    return;
  }
  if (!m->response || m->questions.empty()) return;
  for (const auto& rr : m->answers) {
    if (rr.type == dns::kTypeA) dns_names_[rr.address.value] = lower(m->questions.front().name);
  }
}

void ReferenceDetector::match_destination(const PacketRecord& p, std::size_t device) {
  if (blocklist_.empty()) return;
  if (p.is_udp() && *p.dst_port == 53) return;
  std::string key;
  if (auto it = dns_names_.find(p.dst_ip.value); it != dns_names_.end() && blocklist_.contains(it->second)) {
    key = it->second;
  } else if (auto ip = p.dst_ip.to_string(); blocklist_.contains(ip)) {
    key = ip;
  } else {
    return;
  }
  const auto& d = devices_[device];
  emit(ThreatKind::MaliciousDest, p.timestamp, {d.id}, "contacted blocklisted " + key, d.id + ">" + key,
       config_.blocklist_dedupe);
}

// ---------------------------------------------------------------- anomaly

void ReferenceDetector::roll_window(DeviceState& d, Timestamp now) {
  if (!d.window_open || !d.baseline) return;
  const auto w = config_.anomaly_window;
  const auto end = d.window_start + w;
  if (now < end) return;
  auto& b = *d.baseline;
  if (!b.learned()) {
    b.learn(d.window);
    b.maybe_freeze(end);
  } else if (!d.window.empty()) {
    const auto s = score_anomaly(b, d.window, config_.weights);
    scored_.push_back({d.id, end, s});
    if (s.score >= config_.anomaly_threshold) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "score %.3f (new %.2f, divergence %.2f, z %.1f)", s.score, s.new_destination,
                    s.divergence, std::min(s.z, 1e6));
      emit(ThreatKind::AnomTraffic, end, {d.id}, buf, d.id, config_.alert_cooldown);
      if (s.z > config_.upload_z) emit(ThreatKind::AnomUpload, end, {d.id}, buf, d.id, config_.alert_cooldown);
    }
  }
  d.window_open = false;
  d.window = WindowStats{};
  // Whole idle windows between the closed one and `now`.
  const auto aligned = now - Duration{now.count() % w.count()};
  if (!b.learned() && aligned > end) {
    const auto learning_end = b.first_seen() + b.learning_window();
    const auto idle = (aligned - end) / w;
    const auto until_learned = learning_end > end ? (learning_end - end + w - Duration{1}) / w : 0;
    const auto n = std::min<std::int64_t>(idle, until_learned);
    b.learn_idle(static_cast<std::uint64_t>(n));
    b.maybe_freeze(end + w * n);
  }
}

void ReferenceDetector::account_anomaly(const PacketRecord& p, std::size_t device) {
  auto& d = devices_[device];
  const auto w = config_.anomaly_window;
  const auto t = p.timestamp;
  if (!d.baseline) {
    d.baseline.emplace(d.id, config_.learning_window, t - Duration{t.count() % w.count()});
  }
  roll_window(d, t);
  if (!d.window_open) {
    d.window_start = t - Duration{t.count() % w.count()};
    d.window_open = true;
  }
  d.window.add(p);
}

// -------------------------------------------------------------------- DoH

std::optional<ForwardDecision> ReferenceDetector::handle_doh(const PacketRecord& p, Direction dir,
                                                             std::optional<std::size_t> device) {
  if (!config_.doh_enabled) return std::nullopt;
  if (dir == Direction::WanToLan) {
    if (!p.is_tcp() || p.src_ip != config_.doh_resolver || *p.src_port != 443) return std::nullopt;
    auto it = doh_pending_.find(*p.dst_port);
    if (it == doh_pending_.end()) return std::nullopt;
    const auto pending = it->second;
    doh_pending_.erase(it);
    auto inner = doh_unwrap(p.payload);
    if (!inner) {
      ++malformed_;
      return ForwardDecision::drop();
    }
    PacketRecord answer = make_udp(p.timestamp, Endpoint{plan_.safeguard_lan_mac, pending.resolver, 53},
                                   Endpoint{devices_[pending.device].mac, pending.device_ip, pending.device_port},
                                   *inner);
    learn_dns(answer);
    return ForwardDecision::rewrite({std::move(answer)});
  }
  if (!p.is_udp() || *p.dst_port != 53 || !device) return std::nullopt;
  const auto port = doh_next_port_;
  doh_next_port_ = doh_next_port_ >= 29999 ? 20000 : static_cast<std::uint16_t>(doh_next_port_ + 1);
  doh_pending_[port] = PendingDoh{*device, p.dst_ip, *p.src_port, p.src_ip};
  const auto wrapped = doh_wrap(p.payload, stable_hash(name_) ^ ++doh_nonce_);
  auto out = make_tcp(p.timestamp, Endpoint{plan_.safeguard_wan_mac, plan_.safeguard_wan_ip, port},
                      Endpoint{plan_.gateway_mac, config_.doh_resolver, 443}, tcp_flag::kPsh | tcp_flag::kAck,
                      static_cast<std::uint32_t>(doh_nonce_ * 7919u), 1, wrapped);
  const auto& d = devices_[*device];
  emit(ThreatKind::Doh, p.timestamp, {d.id}, "plain DNS to " + p.dst_ip.to_string() + " moved to DNS-over-HTTPS",
       d.id, kForever);
  return ForwardDecision::rewrite({std::move(out)});
}

// ------------------------------------------------------------------ ticks

std::vector<Emission> ReferenceDetector::on_tick(Timestamp now) {
  last_tick_ = now;
  for (auto& d : devices_) {
    if (d.window_open) roll_window(d, now);
    if (!d.icmp.empty() || d.icmp_sustained_since) update_icmp(d, now);
  }
  if (config_.port_scan_mode == DetectorConfig::PortScanMode::Weekly && now >= next_periodic_scan_) {
    for (std::size_t i = 0; i < devices_.size(); ++i) {
      if (devices_[i].ip) schedule_scan(i, now);
    }
    next_periodic_scan_ = now + config_.port_scan_period;
  }
  std::vector<Emission> out;
  while (!probe_queue_.empty() && probe_queue_.front().at <= now) {
    const auto job = probe_queue_.front();
    probe_queue_.pop_front();
    const auto& d = devices_[job.device];
    if (!d.ip) continue;
    const Endpoint self{plan_.safeguard_lan_mac, plan_.safeguard_lan_ip, probe_port_};
    probe_port_ = probe_port_ >= 61999 ? 61000 : static_cast<std::uint16_t>(probe_port_ + 1);
    out.push_back({false, make_tcp(job.at, self, Endpoint{d.mac, *d.ip, job.port}, tcp_flag::kSyn,
                                   static_cast<std::uint32_t>(stable_hash(d.id) + job.port), 0)});
  }
  if (now.count() % 60000000 == 0) {
    for (auto it = pairs_.begin(); it != pairs_.end();) {
      auto& st = it->second;
      for (auto w = st.syn.begin(); w != st.syn.end();) {
        w->second.expire(now - config_.volumetric_window);
        w = w->second.items.empty() ? st.syn.erase(w) : std::next(w);
      }
      st.frag.expire(now - config_.volumetric_window);
      while (!st.gets.empty() && st.gets.front() < now - config_.volumetric_window) st.gets.pop_front();
      const bool idle = st.syn.empty() && st.frag.items.empty() && st.gets.empty() &&
                        (st.dns.empty() || st.dns.back().first < now - config_.volumetric_window) &&
                        (st.probes.empty() || st.probes.back().first < now - config_.scan_window) &&
                        (st.diversity.empty() || st.diversity.back() < now - config_.scan_window);
      it = idle ? pairs_.erase(it) : std::next(it);
    }
  }
  return out;
}

std::vector<Alert> ReferenceDetector::poll_alerts(Timestamp since) const {
  std::vector<Alert> out;
  for (const auto& a : alerts_) {
    if (a.time >= since) out.push_back(a);
  }
  return out;
}

std::map<std::string, std::string> ReferenceDetector::identify_devices() const {
  std::map<std::string, std::string> out;
  for (const auto& d : devices_) {
    auto label = config_.fingerprints.classify(d.facts);
    out[d.id] = label ? *label : std::string(kUnknownLabel);
  }
  return out;
}

const DeviceBaseline* ReferenceDetector::baseline(const std::string& device_id) const {
  for (const auto& d : devices_) {
    if (d.id == device_id) return d.baseline ? &*d.baseline : nullptr;
  }
  return nullptr;
}

bool ReferenceDetector::quarantined(const std::string& device_id) const {
  for (const auto& d : devices_) {
    if (d.id == device_id) return d.quarantined_manual || d.quarantined_auto;
  }
  return false;
}

void ReferenceDetector::set_quarantine(const std::string& device_id, bool on) {
  for (auto& d : devices_) {
    if (d.id == device_id) {
      d.quarantined_manual = on;
      if (!on) d.quarantined_auto = false;
      return;
    }
  }
  throw BenchError(ErrorCode::UnknownDevice, device_id);
}

void ReferenceDetector::clear_windows() {
  pairs_.clear();
  last_alert_.clear();
  findings_.clear();
  doh_pending_.clear();
  probe_queue_.clear();
  for (auto& d : devices_) {
    d.icmp.clear();
    d.icmp_sustained_since.reset();
    d.reassociations.clear();
    d.quarantined_auto = false;
  }
}

void ReferenceDetector::begin_iteration() { clear_windows(); }

void ReferenceDetector::reset() {
  clear_windows();
  alerts_.clear();
  dns_names_.clear();
  ip_index_.clear();
  scored_.clear();
  malformed_ = 0;
  next_periodic_scan_ = last_tick_ + config_.port_scan_period;
  for (auto& d : devices_) {
    const auto id = d.id;
    const auto mac = d.mac;
    d = DeviceState{};
    d.id = id;
    d.mac = mac;
    d.facts.mac = mac;
  }
}

// ----------------------------------------------------------- cloud adapter

CloudProfile fsecure_like_profile() {
  CloudProfile p;
  p.name = "fsecure-like";
  p.hosts = {"sense-telemetry.fsecure-like.example"};
  p.heartbeat_period = std::chrono::seconds(300);
  p.heartbeat_bytes = 640;
  return p;
}

CloudProfile avira_like_profile() {
  CloudProfile p;
  p.name = "avira-like";
  p.hosts = {"api.avira-like.example",     "update.avira-like.example", "dispatcher.avira-like.example",
             "api.mixpanel.com",           "d2r1yp2w7bby2u.cloudfront.net", "firebaseinstallations.googleapis.com",
             "app-measurement.com",        "ocsp.digicert.com",          "time.cloud-ntp.example",
             "events.avira-like.example"};
  p.heartbeat_period = std::chrono::seconds(120);
  p.heartbeat_bytes = 900;
  return p;
}

CloudTelemetryAdapter::CloudTelemetryAdapter(std::unique_ptr<SafeguardAdapter> inner, CloudProfile profile,
                                             std::uint64_t seed)
    : inner_(std::move(inner)), profile_(std::move(profile)), seed_(seed), rng_(seed) {
  if (!inner_) throw BenchError(ErrorCode::InvalidArgument, "cloud adapter needs an inner adapter");
  if (profile_.hosts.empty()) throw BenchError(ErrorCode::InvalidArgument, "cloud profile has no hosts");
}

void CloudTelemetryAdapter::attach(const std::vector<AdapterDevice>& devices, const AddressPlan& plan) {
  plan_ = plan;
  inner_->attach(devices, plan);
}

void CloudTelemetryAdapter::reset() {
  inner_->reset();
  rng_.seed(seed_);
  next_heartbeat_.reset();
  next_lookup_ = next_mirror_ = Timestamp{0};
  next_host_ = 0;
  mirror_backlog_ = 0;
}

ForwardDecision CloudTelemetryAdapter::process(const PacketRecord& p, Direction dir) {
  if (dir == Direction::WanToLan && p.dst_ip == plan_.safeguard_wan_ip && p.dst_port && *p.dst_port >= 30000 &&
      *p.dst_port < 31000) {
    return ForwardDecision::drop();
  }
  auto d = inner_->process(p, dir);
  if (dir == Direction::LanToWan && d.verdict == ForwardDecision::Verdict::Forward) mirror_backlog_ += p.wire_len;
  return d;
}

PacketRecord CloudTelemetryAdapter::cloud_packet(Timestamp t, const std::string& host, std::uint32_t bytes) {
  const auto idx = static_cast<std::uint16_t>(
      std::find(profile_.hosts.begin(), profile_.hosts.end(), host) - profile_.hosts.begin());
  std::vector<std::uint8_t> payload;
  random_bytes(rng_, payload, bytes);
  return make_tcp(t, Endpoint{plan_.safeguard_wan_mac, plan_.safeguard_wan_ip, static_cast<std::uint16_t>(30000 + idx)},
                  Endpoint{plan_.gateway_mac, InternetModel::address_of(host), 443}, tcp_flag::kPsh | tcp_flag::kAck,
                  static_cast<std::uint32_t>(rng_()), 1, payload);
}

std::vector<Emission> CloudTelemetryAdapter::on_tick(Timestamp now) {
  auto out = inner_->on_tick(now);
  if (now >= next_lookup_) {
    for (std::size_t i = 0; i < profile_.hosts.size(); ++i) {
      const auto q = dns::encode(dns::make_query(dns_id_++, profile_.hosts[i]));
      out.push_back({true, make_udp(now, Endpoint{plan_.safeguard_wan_mac, plan_.safeguard_wan_ip,
                                                  static_cast<std::uint16_t>(30500 + i)},
                                    Endpoint{plan_.gateway_mac, InternetModel::kResolver, 53}, q)});
    }
    next_lookup_ = now + std::chrono::seconds(300);
  }
  if (profile_.heartbeat_period > Duration::zero()) {
    if (!next_heartbeat_) next_heartbeat_ = now;
    if (now >= *next_heartbeat_) {
      const auto& host = profile_.hosts[next_host_++ % profile_.hosts.size()];
      out.push_back({true, cloud_packet(now, host, profile_.heartbeat_bytes)});
      *next_heartbeat_ += profile_.heartbeat_period;
    }
  }
  if (profile_.mirror_fraction > 0 && now >= next_mirror_) {
    auto bytes = static_cast<std::uint64_t>(static_cast<double>(mirror_backlog_) * profile_.mirror_fraction);
    mirror_backlog_ = 0;
    while (bytes > 0) {
      const auto chunk = static_cast<std::uint32_t>(std::min<std::uint64_t>(bytes, 1400));
      out.push_back({true, cloud_packet(now, profile_.hosts.front(), chunk)});
      bytes -= chunk;
    }
    next_mirror_ = now + profile_.mirror_period;
  }
  return out;
}

std::unique_ptr<SafeguardAdapter> make_adapter(const std::string& type, const DetectorConfig& config,
                                               const std::string& name, std::uint64_t seed) {
  const auto label = name.empty() ? type : name;
  if (type == "null") return std::make_unique<NullAdapter>(label);
  if (type == "reference") return std::make_unique<ReferenceDetector>(config, label);
  if (type == "fsecure-like" || type == "avira-like") {
    auto profile = type == "fsecure-like" ? fsecure_like_profile() : avira_like_profile();
    profile.name = label;
    return std::make_unique<CloudTelemetryAdapter>(std::make_unique<NullAdapter>(label), std::move(profile), seed);
  }
  throw BenchError(ErrorCode::ManifestError, "unknown adapter type '" + type + "'");
}

}  // namespace sgbench
