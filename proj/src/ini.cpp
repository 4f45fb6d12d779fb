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

#include "sgbench/ini.hpp"

#include <fstream>
#include <sstream>

#include "sgbench/net_types.hpp"

namespace sgbench::ini {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto comma = s.find(',', pos);
    if (comma == std::string_view::npos) comma = s.size();
    auto item = trim(s.substr(pos, comma - pos));
    if (!item.empty()) out.push_back(std::move(item));
    pos = comma + 1;
  }
  return out;
}

std::optional<std::string> Section::get(std::string_view key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::vector<std::string> Section::get_all(std::string_view key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries) {
    if (k == key) out.push_back(v);
  }
  return out;
}

const Section* Document::find(std::string_view header) const {
  for (const auto& s : sections) {
    if (s.header == header) return &s;
  }
  return nullptr;
}

std::vector<const Section*> Document::find_prefixed(std::string_view prefix) const {
  std::vector<const Section*> out;
  for (const auto& s : sections) {
    if (s.header.size() > prefix.size() && s.header.compare(0, prefix.size(), prefix) == 0 &&
        s.header[prefix.size()] == ' ') {
      out.push_back(&s);
    }
  }
  return out;
}

Document parse(std::string_view text, std::string_view origin) {
  Document doc;
  doc.sections.push_back(Section{});
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw BenchError(ErrorCode::ManifestError,
                         std::string(origin) + ":" + std::to_string(lineno) + ": unterminated section header");
      }
      doc.sections.push_back(Section{trim(line.substr(1, line.size() - 2)), lineno, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw BenchError(ErrorCode::ManifestError,
                       std::string(origin) + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    auto key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw BenchError(ErrorCode::ManifestError, std::string(origin) + ":" + std::to_string(lineno) + ": empty key");
    }
    doc.sections.back().entries.emplace_back(std::move(key), trim(line.substr(eq + 1)));
  }
  return doc;
}

Document parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw BenchError(ErrorCode::ManifestError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

}  // namespace sgbench::ini
