// Copyright 2026 The chanpred Authors
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
#include <iosfwd>

#include "chanpred/channel_model.hpp"

namespace chanpred {

/// Binary trajectory dump: "CPTRJ" magic, version byte, kind byte, then
/// little-endian u64 start_slot, slot count, rows, cols, followed by every
/// slot's coefficients (column-major, re/im doubles).
void save_trajectory(const ChannelTrajectory& traj, std::ostream& out);
ChannelTrajectory load_trajectory(std::istream& in);
void save_trajectory(const ChannelTrajectory& traj, const std::filesystem::path& path);
ChannelTrajectory load_trajectory(const std::filesystem::path& path);

}  // namespace chanpred
