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
#include <ostream>
#include <string>

namespace sgbench::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitManifest = 2;
inline constexpr int kExitAdapterFault = 3;
inline constexpr int kExitValidation = 4;

inline constexpr const char* kOutputEnv = "SAFEGUARD_BENCH_OUT";

struct RunOptions {
  std::filesystem::path manifest;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

/// --out, then $SAFEGUARD_BENCH_OUT, then the manifest's output, then "out".
std::filesystem::path output_dir(const std::optional<std::filesystem::path>& flag,
                                 const std::optional<std::filesystem::path>& manifest_output);

/// Every scenario against every adapter: report.json, matrix.txt and the
/// first-iteration captures under pcaps/.
int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);

/// One bridge-side pcap plus a JSON sidecar per scenario, and benign.pcap.
int cmd_gen_corpus(const RunOptions& opts, std::ostream& out, std::ostream& err);

/// Runs the signature rules over every pcap in `dir`.
int cmd_validate(const std::filesystem::path& dir, std::ostream& out, std::ostream& err);

/// `format` is text or csv.
int cmd_report(const std::filesystem::path& report, const std::string& format, std::ostream& out, std::ostream& err);

}  // namespace sgbench::cli
