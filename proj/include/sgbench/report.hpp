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

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgbench/experiments.hpp"

namespace sgbench {

/// Everything one `run` produces, before serialization.
struct RunReport {
  std::string name;
  std::uint64_t seed = 0;
  ExperimentConfig config;
  std::vector<AdapterSpec> adapters;
  std::vector<ThreatScenario> scenarios;
  SuiteResult result;
  std::map<std::string, TrafficProfile> profiles;
  std::map<std::string, IdentificationResult> identification;
  std::vector<std::string> notes;
};

/// Modeling assumptions every report carries.
std::vector<std::string> standard_notes();

/// Deterministic for a given RunReport; `metadata` is stored verbatim under
/// the "metadata" key and is the only part allowed to vary between runs.
nlohmann::json report_to_json(const RunReport& report, const nlohmann::json& metadata = nlohmann::json::object());

/// Throws MALFORMED_FILE when the document does not look like a report.
DetectionMatrix matrix_from_json(const nlohmann::json& doc);

std::string render_text(const nlohmann::json& doc);
/// kind,adapter,state,latency_s with one row per matrix cell.
std::string render_csv(const nlohmann::json& doc);

}  // namespace sgbench
