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

#include <string>
#include <vector>

#include "sgbench/harness.hpp"

namespace sgbench {

/// The 79-device lab: 12 cameras, 39 home-automation devices, 10 hubs,
/// 13 speakers and 5 video devices. All disconnected.
std::vector<DeviceDescriptor> device_catalog();

/// The 12 devices used for the month-long benign run.
std::vector<DeviceDescriptor> benign_month_devices();

/// Catalog entries by id, in the order given. Throws UNKNOWN_DEVICE.
std::vector<DeviceDescriptor> catalog_subset(const std::vector<std::string>& ids);

/// "Amazon Echo Spot" -> "amazon-echo-spot".
std::string slugify(std::string_view label);

}  // namespace sgbench
