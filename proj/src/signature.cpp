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

#include "sgbench/signature.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>

#include "sgbench/dns.hpp"

namespace sgbench {

SignatureRules SignatureRules::with_blocklist(const std::vector<std::string>& hosts) {
  SignatureRules r;
  for (auto h : hosts) {
    std::transform(h.begin(), h.end(), h.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    r.blocklist.insert(h);
  }
  return r;
}

namespace {

class Counter {
 public:
  explicit Counter(Duration window) : window_(window) {}
  /// Count inside the window after adding `t`.
  std::size_t add(Timestamp t) {
    q_.push_back(t);
    while (q_.front() <= t - window_) q_.pop_front();
    return q_.size();
  }

 private:
  Duration window_;
  std::deque<Timestamp> q_;
};

std::string pair_of(const PacketRecord& p) { return p.src_ip.to_string() + " -> " + p.dst_ip.to_string(); }

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

}  // namespace

std::vector<RuleHit> run_signature_rules(const Trace& trace, const SignatureRules& rules) {
  std::vector<RuleHit> hits;
  std::set<std::string> fired;
  auto hit = [&](const std::string& rule, const PacketRecord& p, const std::string& key, std::string detail) {
    if (fired.insert(rule + "|" + key).second) hits.push_back({rule, p.timestamp, std::move(detail)});
  };
  std::map<std::string, Counter> counters;
  auto count = [&](const std::string& key, Duration w, Timestamp t) {
    return counters.try_emplace(key, w).first->second.add(t);
  };
  std::map<std::string, std::deque<std::pair<Timestamp, std::uint16_t>>> sweeps;

  for (const auto& p : trace.packets) {
    if (!p.is_ipv4()) continue;
    const auto pair = pair_of(p);
    const auto t = p.timestamp;
    if (p.is_fragment()) {
      if (count("frag|" + p.src_ip.to_string(), rules.rate_window, t) >= static_cast<std::size_t>(rules.frag_rate)) {
        hit("frag-rate", p, p.src_ip.to_string(), "fragment rate from " + p.src_ip.to_string());
      }
      continue;
    }
    if (p.is_tcp()) {
      const auto f = p.tcp->flags;
      const bool syn = (f & tcp_flag::kSyn) != 0;
      const bool ack = (f & tcp_flag::kAck) != 0;
      if (f == 0 || (f & 0x29) == 0x29 || (syn && (f & tcp_flag::kFin))) {
        hit("os-probe", p, pair, "malformed flag combination " + pair);
      }
      if (syn && !ack) {
        if (count("syn|" + pair, rules.rate_window, t) >= static_cast<std::size_t>(rules.syn_rate)) {
          hit("syn-rate", p, pair, "SYN rate " + pair);
        }
        auto& q = sweeps[pair];
        q.emplace_back(t, *p.dst_port);
        while (q.front().first <= t - rules.sweep_window) q.pop_front();
        std::set<std::uint16_t> ports;
        for (const auto& [ts, port] : q) ports.insert(port);
        if (ports.size() >= static_cast<std::size_t>(rules.sweep_ports)) hit("port-sweep", p, pair, "port sweep " + pair);
      }
      if (syn && ack && rules.risky_services.contains(*p.src_port) && p.src_ip.in_subnet(Ipv4Address{10, 0, 0, 0}, 8)) {
        hit("exposed-service", p, pair, "device answers on tcp/" + std::to_string(*p.src_port));
      }
      const auto text = p.payload_view();
      if (starts_with(text, "GET ")) {
        if (count("http|" + pair, rules.rate_window, t) >= static_cast<std::size_t>(rules.http_rate)) {
          hit("http-rate", p, pair, "HTTP request rate " + pair);
        }
      }
      if (rules.login_ports.contains(*p.dst_port) && starts_with(text, "PASS ")) {
        hit("cleartext-login", p, pair, "cleartext password to tcp/" + std::to_string(*p.dst_port));
      }
      continue;
    }
    if (p.is_udp()) {
      if (*p.dst_port == 53) {
        if (count("dns|" + p.src_ip.to_string(), rules.rate_window, t) >= static_cast<std::size_t>(rules.dns_rate)) {
          hit("dns-rate", p, p.src_ip.to_string(), "DNS query rate from " + p.src_ip.to_string());
        }
        if (!rules.blocklist.empty()) {
          if (auto m = dns::decode(p.payload); m && !m->response && !m->questions.empty()) {
            auto name = m->questions.front().name;
            std::transform(name.begin(), name.end(), name.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            if (rules.blocklist.contains(name)) hit("blocklist-dns", p, name, "lookup of listed host " + name);
          }
        }
      } else if (*p.src_port != 53) {
        if (count("udp|" + pair, rules.rate_window, t) >= static_cast<std::size_t>(rules.udp_rate)) {
          hit("udp-rate", p, pair, "UDP rate " + pair);
        }
      }
    }
  }
  return hits;
}

}  // namespace sgbench
