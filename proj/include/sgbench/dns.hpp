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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgbench/packet.hpp"

namespace sgbench::dns {

inline constexpr std::uint16_t kTypeA = 1;
inline constexpr std::uint16_t kTypePtr = 12;
inline constexpr std::uint16_t kTypeTxt = 16;
inline constexpr std::uint16_t kClassIn = 1;

struct Question {
  std::string name;
  std::uint16_t type = kTypeA;
};

struct ResourceRecord {
  std::string name;
  std::uint16_t type = kTypeA;
  std::uint32_t ttl = 300;
  /// Set for A records.
  Ipv4Address address;
  /// Set for PTR records.
  std::string target;
};

struct Message {
  std::uint16_t id = 0;
  bool response = false;
  std::uint8_t rcode = 0;
  std::vector<Question> questions;
  std::vector<ResourceRecord> answers;
};

std::vector<std::uint8_t> encode(const Message& msg);
/// Returns nullopt for anything that is not a well-formed DNS message.
std::optional<Message> decode(std::span<const std::uint8_t> bytes);

Message make_query(std::uint16_t id, std::string name);
Message make_a_response(const Message& query, std::span<const Ipv4Address> addresses, std::uint32_t ttl = 300);

struct Correlation {
  std::map<Ipv4Address, std::string> ip_to_name;
  /// Port-53 UDP payloads that failed to parse.
  std::size_t skipped = 0;
};

/// Maps every A-record answer seen in port-53 responses to the queried name.
/// Later answers for the same address overwrite earlier ones.
Correlation correlate_dns(const Trace& trace);

}  // namespace sgbench::dns
