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
#include <span>
#include <vector>

#include "sgbench/packet.hpp"

namespace sgbench {

inline constexpr std::uint32_t kPcapMagic = 0xa1b2c3d4;
inline constexpr std::uint32_t kLinktypeEthernet = 1;
inline constexpr std::size_t kPcapGlobalHeaderLen = 24;
inline constexpr std::size_t kPcapRecordHeaderLen = 16;

/// Serializes one record to an Ethernet frame of exactly wire_len bytes
/// (zero-padded past the IP datagram). Checksums are computed.
std::vector<std::uint8_t> encode_frame(const PacketRecord& packet);

/// Inverse of encode_frame. `orig_len` becomes wire_len.
PacketRecord decode_frame(std::span<const std::uint8_t> frame, Timestamp timestamp, std::uint32_t orig_len,
                          CapturePoint point);

/// Reads a classic microsecond pcap with Ethernet linktype. Every record is
/// stamped with `point` since pcap carries no capture-point field.
Trace read_trace(const std::filesystem::path& path, CapturePoint point = CapturePoint::Gateway);

void write_trace(const Trace& trace, const std::filesystem::path& path);

/// In-memory variant used for byte comparisons.
std::vector<std::uint8_t> serialize_trace(const Trace& trace);
Trace parse_trace(std::span<const std::uint8_t> bytes, CapturePoint point = CapturePoint::Gateway);

}  // namespace sgbench
