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

#include "sgbench/dns.hpp"

namespace sgbench::dns {

namespace {

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_name(std::vector<std::uint8_t>& out, const std::string& name) {
  std::size_t start = 0;
  while (start < name.size()) {
    auto dot = name.find('.', start);
    if (dot == std::string::npos) dot = name.size();
    const auto len = std::min<std::size_t>(dot - start, 63);
    out.push_back(static_cast<std::uint8_t>(len));
    out.insert(out.end(), name.begin() + static_cast<std::ptrdiff_t>(start),
               name.begin() + static_cast<std::ptrdiff_t>(start + len));
    start = dot + 1;
  }
  out.push_back(0);
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

  bool ok() const { return ok_; }
  std::size_t pos() const { return pos_; }

  std::uint16_t u16() {
    if (pos_ + 2 > b_.size()) return fail16();
    const auto v = static_cast<std::uint16_t>((b_[pos_] << 8) | b_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    const std::uint32_t hi = u16();
    return (hi << 16) | u16();
  }
  void skip(std::size_t n) {
    if (pos_ + n > b_.size()) {
      ok_ = false;
      return;
    }
    pos_ += n;
  }

  std::string name() { return name_at(pos_, true, 0); }

 private:
  std::uint16_t fail16() {
    ok_ = false;
    pos_ = b_.size();
    return 0;
  }

  std::string name_at(std::size_t at, bool advance, int depth) {
    std::string out;
    std::size_t p = at;
    while (true) {
      if (p >= b_.size() || depth > 8) {
        ok_ = false;
        return {};
      }
      const auto len = b_[p];
      if ((len & 0xc0) == 0xc0) {
        if (p + 1 >= b_.size()) {
          ok_ = false;
          return {};
        }
        const std::size_t target = ((len & 0x3f) << 8) | b_[p + 1];
        auto rest = name_at(target, false, depth + 1);
        if (!out.empty() && !rest.empty()) out += '.';
        out += rest;
        if (advance) pos_ = p + 2;
        return out;
      }
      if (len == 0) {
        if (advance) pos_ = p + 1;
        return out;
      }
      if (p + 1 + len > b_.size()) {
        ok_ = false;
        return {};
      }
      if (!out.empty()) out += '.';
      out.append(reinterpret_cast<const char*>(b_.data() + p + 1), len);
      p += 1 + len;
    }
  }

  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
  bool ok_ = true;
};

}  // namespace

std::vector<std::uint8_t> encode(const Message& msg) {
  std::vector<std::uint8_t> out;
  put16(out, msg.id);
  std::uint16_t flags = msg.response ? 0x8180 : 0x0100;
  flags |= msg.rcode & 0x0f;
  put16(out, flags);
  put16(out, static_cast<std::uint16_t>(msg.questions.size()));
  put16(out, static_cast<std::uint16_t>(msg.answers.size()));
  put16(out, 0);
  put16(out, 0);
  for (const auto& q : msg.questions) {
    put_name(out, q.name);
    put16(out, q.type);
    put16(out, kClassIn);
  }
  for (const auto& rr : msg.answers) {
    put_name(out, rr.name);
    put16(out, rr.type);
    put16(out, kClassIn);
    put16(out, static_cast<std::uint16_t>(rr.ttl >> 16));
    put16(out, static_cast<std::uint16_t>(rr.ttl));
    if (rr.type == kTypeA) {
      put16(out, 4);
      put16(out, static_cast<std::uint16_t>(rr.address.value >> 16));
      put16(out, static_cast<std::uint16_t>(rr.address.value));
    } else {
      std::vector<std::uint8_t> rdata;
      put_name(rdata, rr.target);
      put16(out, static_cast<std::uint16_t>(rdata.size()));
      out.insert(out.end(), rdata.begin(), rdata.end());
    }
  }
  return out;
}

std::optional<Message> decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) return std::nullopt;
  Reader r(bytes);
  Message msg;
  msg.id = r.u16();
  const auto flags = r.u16();
  msg.response = (flags & 0x8000) != 0;
  msg.rcode = static_cast<std::uint8_t>(flags & 0x0f);
  if (((flags >> 11) & 0x0f) != 0) return std::nullopt;  // only standard queries
  const auto qd = r.u16();
  const auto an = r.u16();
  r.u16();
  r.u16();
  if (qd > 16 || an > 64) return std::nullopt;
  for (int i = 0; i < qd && r.ok(); ++i) {
    Question q;
    q.name = r.name();
    q.type = r.u16();
    r.u16();
    msg.questions.push_back(std::move(q));
  }
  for (int i = 0; i < an && r.ok(); ++i) {
    ResourceRecord rr;
    rr.name = r.name();
    rr.type = r.u16();
    r.u16();
    rr.ttl = r.u32();
    const auto rdlen = r.u16();
    const auto rdata_start = r.pos();
    if (rr.type == kTypeA && rdlen == 4) {
      rr.address = Ipv4Address(r.u32());
    } else if (rr.type == kTypePtr) {
      rr.target = r.name();
      if (r.ok() && r.pos() != rdata_start + rdlen) return std::nullopt;
    } else {
      r.skip(rdlen);
    }
    msg.answers.push_back(std::move(rr));
  }
  if (!r.ok()) return std::nullopt;
  return msg;
}

Message make_query(std::uint16_t id, std::string name) {
  Message m;
  m.id = id;
  m.questions.push_back({std::move(name), kTypeA});
  return m;
}

Message make_a_response(const Message& query, std::span<const Ipv4Address> addresses, std::uint32_t ttl) {
  Message m;
  m.id = query.id;
  m.response = true;
  m.questions = query.questions;
  if (addresses.empty()) m.rcode = 3;
  const std::string name = query.questions.empty() ? std::string{} : query.questions.front().name;
  for (const auto& a : addresses) {
    ResourceRecord rr;
    rr.name = name;
    rr.type = kTypeA;
    rr.ttl = ttl;
    rr.address = a;
    m.answers.push_back(rr);
  }
  return m;
}

Correlation correlate_dns(const Trace& trace) {
  Correlation out;
  for (const auto& p : trace.packets) {
    if (!p.is_udp() || p.src_port != 53) continue;
    auto msg = decode(p.payload);
    if (!msg) {
      ++out.skipped;
      continue;
    }
    if (!msg->response || msg->questions.empty()) continue;
    for (const auto& rr : msg->answers) {
      if (rr.type == kTypeA) out.ip_to_name[rr.address] = msg->questions.front().name;
    }
  }
  return out;
}

}  // namespace sgbench::dns
