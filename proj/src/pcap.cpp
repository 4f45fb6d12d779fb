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

#include "sgbench/pcap.hpp"

#include <fstream>
#include <iterator>

namespace sgbench {

namespace {

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}
void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  put16(out, static_cast<std::uint16_t>(v >> 16));
  put16(out, static_cast<std::uint16_t>(v));
}
void put32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put16le(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

std::uint16_t get16(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint16_t>((b[off] << 8) | b[off + 1]);
}
std::uint32_t get32(std::span<const std::uint8_t> b, std::size_t off) {
  return (std::uint32_t{get16(b, off)} << 16) | get16(b, off + 2);
}
std::uint32_t get32le(std::span<const std::uint8_t> b, std::size_t off) {
  return std::uint32_t{b[off]} | (std::uint32_t{b[off + 1]} << 8) | (std::uint32_t{b[off + 2]} << 16) |
         (std::uint32_t{b[off + 3]} << 24);
}
std::uint16_t get16le(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

std::uint32_t checksum_add(std::uint32_t sum, std::span<const std::uint8_t> data) {
  std::size_t i = 0;
  for (; i + 1 < data.size(); i += 2) sum += static_cast<std::uint32_t>((data[i] << 8) | data[i + 1]);
  if (i < data.size()) sum += static_cast<std::uint32_t>(data[i] << 8);
  return sum;
}

std::uint16_t checksum_fold(std::uint32_t sum) {
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return static_cast<std::uint16_t>(~sum);
}

[[noreturn]] void malformed(const std::string& why) { throw BenchError(ErrorCode::MalformedFile, why); }

}  // namespace

std::vector<std::uint8_t> encode_frame(const PacketRecord& p) {
  std::vector<std::uint8_t> out;
  out.reserve(p.wire_len);
  out.insert(out.end(), p.dst_mac.bytes.begin(), p.dst_mac.bytes.end());
  out.insert(out.end(), p.src_mac.bytes.begin(), p.src_mac.bytes.end());
  put16(out, p.ethertype);

  if (!p.is_ipv4()) {
    out.insert(out.end(), p.payload.begin(), p.payload.end());
  } else {
    const std::size_t ip_start = out.size();
    const std::uint32_t datagram_len = p.header_length() - 14 + static_cast<std::uint32_t>(p.payload.size());
    out.push_back(0x45);
    out.push_back(0);
    put16(out, static_cast<std::uint16_t>(datagram_len));
    put16(out, p.ip_id);
    std::uint16_t frag = p.frag_offset & 0x1fff;
    if (p.dont_fragment) frag |= 0x4000;
    if (p.more_fragments) frag |= 0x2000;
    put16(out, frag);
    out.push_back(p.ttl);
    out.push_back(p.ip_protocol);
    put16(out, 0);
    put32(out, p.src_ip.value);
    put32(out, p.dst_ip.value);
    const auto ip_sum = checksum_fold(checksum_add(0, std::span(out).subspan(ip_start, 20)));
    out[ip_start + 10] = static_cast<std::uint8_t>(ip_sum >> 8);
    out[ip_start + 11] = static_cast<std::uint8_t>(ip_sum);

    const std::size_t l4_start = out.size();
    const bool first_fragment = p.frag_offset == 0;
    const bool checksummed = first_fragment && !p.more_fragments;
    auto pseudo = [&](std::uint32_t l4_len) {
      std::uint32_t s = 0;
      s += p.src_ip.value >> 16;
      s += p.src_ip.value & 0xffff;
      s += p.dst_ip.value >> 16;
      s += p.dst_ip.value & 0xffff;
      s += p.ip_protocol;
      s += l4_len;
      return s;
    };
    if (first_fragment && p.ip_protocol == ip_proto::kTcp && p.tcp) {
      put16(out, p.src_port.value_or(0));
      put16(out, p.dst_port.value_or(0));
      put32(out, p.tcp->seq);
      put32(out, p.tcp->ack);
      const auto words = static_cast<std::uint8_t>((20 + p.tcp->options.size()) / 4);
      out.push_back(static_cast<std::uint8_t>(words << 4));
      out.push_back(p.tcp->flags);
      put16(out, p.tcp->window);
      put16(out, 0);
      put16(out, 0);
      out.insert(out.end(), p.tcp->options.begin(), p.tcp->options.end());
      out.insert(out.end(), p.payload.begin(), p.payload.end());
      if (checksummed) {
        const auto l4 = std::span(out).subspan(l4_start);
        const auto sum = checksum_fold(checksum_add(pseudo(static_cast<std::uint32_t>(l4.size())), l4));
        out[l4_start + 16] = static_cast<std::uint8_t>(sum >> 8);
        out[l4_start + 17] = static_cast<std::uint8_t>(sum);
      }
    } else if (first_fragment && p.ip_protocol == ip_proto::kUdp && p.src_port) {
      put16(out, *p.src_port);
      put16(out, p.dst_port.value_or(0));
      put16(out, static_cast<std::uint16_t>(8 + p.payload.size()));
      put16(out, 0);
      out.insert(out.end(), p.payload.begin(), p.payload.end());
      if (checksummed) {
        const auto l4 = std::span(out).subspan(l4_start);
        auto sum = checksum_fold(checksum_add(pseudo(static_cast<std::uint32_t>(l4.size())), l4));
        if (sum == 0) sum = 0xffff;
        out[l4_start + 6] = static_cast<std::uint8_t>(sum >> 8);
        out[l4_start + 7] = static_cast<std::uint8_t>(sum);
      }
    } else if (first_fragment && p.ip_protocol == ip_proto::kIcmp && p.icmp) {
      out.push_back(p.icmp->type);
      out.push_back(p.icmp->code);
      put16(out, 0);
      put32(out, p.icmp->rest);
      out.insert(out.end(), p.payload.begin(), p.payload.end());
      const auto sum = checksum_fold(checksum_add(0, std::span(out).subspan(l4_start)));
      out[l4_start + 2] = static_cast<std::uint8_t>(sum >> 8);
      out[l4_start + 3] = static_cast<std::uint8_t>(sum);
    } else {
      out.insert(out.end(), p.payload.begin(), p.payload.end());
    }
  }
  if (out.size() > p.wire_len) {
    throw BenchError(ErrorCode::InvalidArgument, "wire_len smaller than serialized headers and payload");
  }
  out.resize(p.wire_len, 0);
  return out;
}

PacketRecord decode_frame(std::span<const std::uint8_t> b, Timestamp timestamp, std::uint32_t orig_len,
                          CapturePoint point) {
  if (b.size() < 14) malformed("frame shorter than Ethernet header");
  PacketRecord p;
  p.timestamp = timestamp;
  p.capture_point = point;
  p.wire_len = orig_len;
  std::copy_n(b.begin(), 6, p.dst_mac.bytes.begin());
  std::copy_n(b.begin() + 6, 6, p.src_mac.bytes.begin());
  p.ethertype = get16(b, 12);
  if (!p.is_ipv4()) {
    p.payload.assign(b.begin() + 14, b.end());
    return p;
  }
  if (b.size() < 34) malformed("frame shorter than IPv4 header");
  const auto ip = b.subspan(14);
  const std::size_t ihl = (ip[0] & 0x0f) * 4u;
  const std::size_t total = get16(ip, 2);
  if ((ip[0] >> 4) != 4 || ihl < 20 || total < ihl || total > ip.size()) malformed("bad IPv4 header");
  p.ip_id = get16(ip, 4);
  const auto frag = get16(ip, 6);
  p.dont_fragment = (frag & 0x4000) != 0;
  p.more_fragments = (frag & 0x2000) != 0;
  p.frag_offset = frag & 0x1fff;
  p.ttl = ip[8];
  p.ip_protocol = ip[9];
  p.src_ip = Ipv4Address(get32(ip, 12));
  p.dst_ip = Ipv4Address(get32(ip, 16));
  const auto l4 = ip.subspan(ihl, total - ihl);

  if (p.frag_offset != 0) {
    p.payload.assign(l4.begin(), l4.end());
  } else if (p.ip_protocol == ip_proto::kTcp) {
    if (l4.size() < 20) malformed("truncated TCP header");
    const std::size_t doff = (l4[12] >> 4) * 4u;
    if (doff < 20 || doff > l4.size()) malformed("bad TCP data offset");
    p.src_port = get16(l4, 0);
    p.dst_port = get16(l4, 2);
    TcpInfo tcp;
    tcp.seq = get32(l4, 4);
    tcp.ack = get32(l4, 8);
    tcp.flags = l4[13];
    tcp.window = get16(l4, 14);
    tcp.options.assign(l4.begin() + 20, l4.begin() + static_cast<std::ptrdiff_t>(doff));
    p.tcp = std::move(tcp);
    p.payload.assign(l4.begin() + static_cast<std::ptrdiff_t>(doff), l4.end());
  } else if (p.ip_protocol == ip_proto::kUdp) {
    if (l4.size() < 8) malformed("truncated UDP header");
    p.src_port = get16(l4, 0);
    p.dst_port = get16(l4, 2);
    p.payload.assign(l4.begin() + 8, l4.end());
  } else if (p.ip_protocol == ip_proto::kIcmp) {
    if (l4.size() < 8) malformed("truncated ICMP header");
    p.icmp = IcmpInfo{l4[0], l4[1], get32(l4, 4)};
    p.payload.assign(l4.begin() + 8, l4.end());
  } else {
    p.payload.assign(l4.begin(), l4.end());
  }
  return p;
}

std::vector<std::uint8_t> serialize_trace(const Trace& trace) {
  std::vector<std::uint8_t> out;
  put32le(out, kPcapMagic);
  put16le(out, 2);
  put16le(out, 4);
  put32le(out, 0);
  put32le(out, 0);
  put32le(out, 65535);
  put32le(out, kLinktypeEthernet);
  for (const auto& p : trace.packets) {
    const auto frame = encode_frame(p);
    const auto us = p.timestamp.count();
    if (us < 0) throw BenchError(ErrorCode::InvalidArgument, "negative timestamp");
    put32le(out, static_cast<std::uint32_t>(us / 1000000));
    put32le(out, static_cast<std::uint32_t>(us % 1000000));
    put32le(out, static_cast<std::uint32_t>(frame.size()));
    put32le(out, p.wire_len);
    out.insert(out.end(), frame.begin(), frame.end());
  }
  return out;
}

Trace parse_trace(std::span<const std::uint8_t> bytes, CapturePoint point) {
  if (bytes.size() < kPcapGlobalHeaderLen) malformed("file shorter than pcap global header");
  if (get32le(bytes, 0) != kPcapMagic) malformed("bad pcap magic");
  if (get16le(bytes, 4) != 2) malformed("unsupported pcap version");
  if (get32le(bytes, 20) != kLinktypeEthernet) {
    throw BenchError(ErrorCode::UnsupportedLinktype, "linktype " + std::to_string(get32le(bytes, 20)));
  }
  Trace trace;
  trace.metadata.capture_point = point;
  std::size_t off = kPcapGlobalHeaderLen;
  while (off < bytes.size()) {
    if (bytes.size() - off < kPcapRecordHeaderLen) malformed("truncated record header");
    const auto sec = get32le(bytes, off);
    const auto usec = get32le(bytes, off + 4);
    const auto incl = get32le(bytes, off + 8);
    const auto orig = get32le(bytes, off + 12);
    off += kPcapRecordHeaderLen;
    if (usec >= 1000000 || incl > bytes.size() - off) malformed("truncated record");
    const Timestamp ts{std::int64_t{sec} * 1000000 + usec};
    trace.packets.push_back(decode_frame(bytes.subspan(off, incl), ts, orig, point));
    off += incl;
  }
  if (!trace.packets.empty()) {
    trace.metadata.start = trace.packets.front().timestamp;
    trace.metadata.end = trace.packets.back().timestamp;
  }
  return trace;
}

Trace read_trace(const std::filesystem::path& path, CapturePoint point) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BenchError(ErrorCode::MalformedFile, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_trace(bytes, point);
  } catch (const BenchError& e) {
    std::string msg = e.what();
    msg.erase(0, msg.find(": ") + 2);  // drop the code prefix; the new error adds it back
    throw BenchError(e.code(), path.string() + ": " + msg);
  }
}

void write_trace(const Trace& trace, const std::filesystem::path& path) {
  const auto bytes = serialize_trace(trace);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw BenchError(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw BenchError(ErrorCode::IoError, "short write to " + path.string());
}

}  // namespace sgbench
