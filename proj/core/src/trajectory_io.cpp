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

#include "chanpred/trajectory_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace chanpred {

namespace {

constexpr std::array<char, 5> kMagic{'C', 'P', 'T', 'R', 'J'};
constexpr std::uint8_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "trajectory serialisation assumes a little-endian host");

void put_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw std::runtime_error("load_trajectory: truncated stream");
  return v;
}

}  // namespace

void save_trajectory(const ChannelTrajectory& traj, std::ostream& out) {
  out.write(kMagic.data(), kMagic.size());
  out.put(static_cast<char>(kVersion));
  out.put(traj.kind == TrajectoryKind::kTrue ? 0 : 1);
  put_u64(out, traj.start_slot);
  put_u64(out, traj.size());
  put_u64(out, static_cast<std::uint64_t>(traj.rows()));
  put_u64(out, static_cast<std::uint64_t>(traj.cols()));
  for (const CMatrix& h : traj.slots) {
    if (h.rows() != traj.rows() || h.cols() != traj.cols()) {
      throw std::invalid_argument("save_trajectory: slots differ in shape");
    }
    // std::complex<double> is layout-compatible with double[2].
    out.write(reinterpret_cast<const char*>(h.data()),
              static_cast<std::streamsize>(h.size() * static_cast<Eigen::Index>(sizeof(Complex))));
  }
  if (!out) throw std::runtime_error("save_trajectory: write failed");
}

ChannelTrajectory load_trajectory(std::istream& in) {
  std::array<char, 5> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw std::runtime_error("load_trajectory: bad magic");
  if (in.get() != kVersion) throw std::runtime_error("load_trajectory: unsupported version");
  const int kind = in.get();
  if (kind != 0 && kind != 1) throw std::runtime_error("load_trajectory: bad kind tag");

  ChannelTrajectory traj;
  traj.kind = kind == 0 ? TrajectoryKind::kTrue : TrajectoryKind::kEstimated;
  traj.start_slot = get_u64(in);
  const std::uint64_t count = get_u64(in);
  const auto rows = static_cast<Eigen::Index>(get_u64(in));
  const auto cols = static_cast<Eigen::Index>(get_u64(in));
  if (rows < 0 || cols < 0 || count > (std::uint64_t{1} << 32)) {
    throw std::runtime_error("load_trajectory: implausible header");
  }
  traj.slots.reserve(count);
  for (std::uint64_t n = 0; n < count; ++n) {
    CMatrix h(rows, cols);
    in.read(reinterpret_cast<char*>(h.data()),
            static_cast<std::streamsize>(h.size() * static_cast<Eigen::Index>(sizeof(Complex))));
    if (!in) throw std::runtime_error("load_trajectory: truncated stream");
    traj.slots.push_back(std::move(h));
  }
  return traj;
}

void save_trajectory(const ChannelTrajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_trajectory: cannot open " + path.string());
  save_trajectory(traj, out);
}

ChannelTrajectory load_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_trajectory: cannot open " + path.string());
  return load_trajectory(in);
}

}  // namespace chanpred
