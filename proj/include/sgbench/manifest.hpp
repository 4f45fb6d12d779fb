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
#include <vector>

#include "sgbench/experiments.hpp"
#include "sgbench/ini.hpp"

namespace sgbench {

struct ResourcePaths {
  std::optional<std::filesystem::path> wordlist;
  std::optional<std::filesystem::path> blocklist;
  std::optional<std::filesystem::path> pii_profile;
  std::optional<std::filesystem::path> party_db;
  std::optional<std::filesystem::path> fingerprint_db;
};

struct Manifest {
  std::filesystem::path path;
  std::filesystem::path base_dir;
  std::string name;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> output_dir;
  std::vector<DeviceDescriptor> devices;
  std::vector<AdapterSpec> adapters;
  std::vector<ThreatScenario> scenarios;
  ExperimentConfig experiment;
  HarnessOptions harness;
  ResourcePaths resources;

  /// Wordlist, blocklist and PII profile, falling back to the bundled data.
  ThreatResources load_resources() const;
  Suite suite() const;
};

/// Throws MANIFEST_ERROR naming the offending section and field.
Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir,
                        std::string_view origin = "<manifest>");
Manifest load_manifest(const std::filesystem::path& path);

/// A `[scenario NAME]` section; unknown keys become kind parameters.
ThreatScenario parse_scenario(const ini::Section& section, const std::filesystem::path& base_dir);
DeviceDescriptor parse_device(const ini::Section& section);

}  // namespace sgbench
