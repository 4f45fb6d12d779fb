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

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sgbench::ini {

/// One `[header]` block. Entries keep file order; keys may repeat.
struct Section {
  std::string header;
  /// Line of the header; 0 for the implicit leading section.
  int line = 0;
  std::vector<std::pair<std::string, std::string>> entries;

  std::optional<std::string> get(std::string_view key) const;
  std::vector<std::string> get_all(std::string_view key) const;
  bool has(std::string_view key) const { return get(key).has_value(); }
};

struct Document {
  std::vector<Section> sections;

  /// First section with this exact header.
  const Section* find(std::string_view header) const;
  /// Sections whose header starts with `prefix` followed by a space.
  std::vector<const Section*> find_prefixed(std::string_view prefix) const;
};

/// Line-oriented `key = value` text with `[section]` headers and `#`/`;`
/// comments. Throws MANIFEST_ERROR with the offending line number.
Document parse(std::string_view text, std::string_view origin = "<input>");
Document parse_file(const std::filesystem::path& path);

std::string trim(std::string_view s);
/// Splits on commas, trimming items and dropping empty ones.
std::vector<std::string> split_list(std::string_view s);

}  // namespace sgbench::ini
