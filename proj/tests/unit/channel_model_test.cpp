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

#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "chanpred/channel_model.hpp"

namespace chanpred {
namespace {

ScenarioConfig small_scenario() {
  ScenarioConfig c;
  c.num_subcarriers = 16;
  c.num_paths = 8;
  c.path_loss_db = 0.0;
  return c;
}

ArrayGeometry small_geometry() {
  ArrayGeometry g;
  g.bs_rows = 2;
  g.bs_cols = 3;
  g.ue_antennas = 2;
  return g;
}

TEST(SteeringVector, BroadsideIsAllOnes) {
  const CVector a = steering_vector(ArrayGeometry{}, ArraySide::kBs, {0.0, 0.0});
  ASSERT_EQ(a.size(), 64);
  EXPECT_NEAR((a - CVector::Ones(64)).norm(), 0.0, 1e-12);
}

TEST(SteeringVector, MatchesPlanarPhaseFormula) {
  ArrayGeometry g = small_geometry();
  g.spacing_bs = 0.3;
  const double az = 0.7, el = -0.4;
  const CVector a = steering_vector(g, ArraySide::kBs, {az, el});
  for (std::size_t r = 0; r < g.bs_rows; ++r) {
    for (std::size_t c = 0; c < g.bs_cols; ++c) {
      const double phase = -2.0 * kPi * 0.3 * (c * std::sin(az) * std::cos(el) + r * std::sin(el));
      const Complex expected(std::cos(phase), std::sin(phase));
      EXPECT_NEAR(std::abs(a(r * g.bs_cols + c) - expected), 0.0, 1e-12);
    }
  }
  const CVector u = steering_vector(g, ArraySide::kUe, {az, 0.0});
  EXPECT_NEAR(std::arg(u(1)), std::remainder(-2.0 * kPi * 0.5 * std::sin(az), 2.0 * kPi), 1e-12);
}

TEST(SteeringVector, UnitModulus) {
  const CVector a = steering_vector(ArrayGeometry{}, ArraySide::kBs, {1.1, 0.3});
  EXPECT_NEAR(a.cwiseAbs().maxCoeff(), 1.0, 1e-12);
  EXPECT_NEAR(a.cwiseAbs().minCoeff(), 1.0, 1e-12);
}

TEST(ScenarioConfig, DefaultsMatchReferenceSetup) {
  const ScenarioConfig c;
  EXPECT_DOUBLE_EQ(c.carrier_hz, 2.53e9);
  EXPECT_DOUBLE_EQ(c.subcarrier_spacing_hz, 40e3);
  EXPECT_EQ(c.num_subcarriers, 128u);
  EXPECT_DOUBLE_EQ(c.slot_duration_s, 2e-3);
  const ArrayGeometry g;
  EXPECT_EQ(g.antenna_pairs(), 128u);
  // 20 km/h at 2.53 GHz: about 46.9 Hz.
  EXPECT_NEAR(c.max_doppler_hz(), 20.0 / 3.6 * 2.53e9 / kSpeedOfLight, 1e-9);
}

TEST(ScenarioConfig, SubcarrierOffsetsAreCentred) {
  ScenarioConfig c = small_scenario();
  double sum = 0.0;
  for (std::size_t l = 0; l < c.num_subcarriers; ++l) sum += c.subcarrier_offset_hz(l);
  EXPECT_NEAR(sum, 0.0, 1e-6);
  EXPECT_DOUBLE_EQ(c.subcarrier_offset_hz(1) - c.subcarrier_offset_hz(0), c.subcarrier_spacing_hz);
}

TEST(ScenarioConfig, RejectsInvalidValues) {
  ScenarioConfig c;
  c.num_paths = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = ScenarioConfig{};
  c.ue_speed_mps = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = ScenarioConfig{};
  c.carrier_hz = 1e6;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(GeneratePaths, UnitPowerAndBoundedDelays) {
  ScenarioConfig c = small_scenario();
  Rng rng(3);
  const PathSet paths = generate_paths(c, rng);
  ASSERT_EQ(paths.size(), c.num_paths);
  double power = 0.0;
  for (const Path& p : paths) {
    power += std::norm(p.gain);
    EXPECT_GE(p.delay_s, 0.0);
    EXPECT_LE(p.delay_s, 4.0 * c.delay_spread_s + 1e-15);
    EXPECT_LE(std::abs(p.doppler_hz), c.max_doppler_hz() + 1e-9);
    EXPECT_GE(p.aoa_el, -kPi / 2);
    EXPECT_LE(p.aoa_el, kPi / 2);
  }
  EXPECT_NEAR(power, 1.0, 1e-12);
}

TEST(GeneratePaths, PathLossScalesPower) {
  ScenarioConfig c = small_scenario();
  c.path_loss_db = 30.0;
  Rng rng(3);
  double power = 0.0;
  for (const Path& p : generate_paths(c, rng)) power += std::norm(p.gain);
  EXPECT_NEAR(power, 1e-3, 1e-15);
}

TEST(GeneratePaths, StaticUeHasNoDoppler) {
  ScenarioConfig c = small_scenario();
  c.ue_speed_mps = 0.0;
  Rng rng(9);
  for (const Path& p : generate_paths(c, rng)) EXPECT_EQ(p.doppler_hz, 0.0);
}

TEST(GeneratePaths, TravelAnglesMarginallyUniformInBothModels) {
  // E[cos(alpha)] = 0 and E[cos^2(alpha)] = 1/2 for a uniform angle.
  for (DopplerModel model : {DopplerModel::kIsotropic, DopplerModel::kClustered}) {
    ScenarioConfig c = small_scenario();
    c.doppler_model = model;
    double m1 = 0.0, m2 = 0.0;
    int count = 0;
    for (std::uint64_t s = 0; s < 4000; ++s) {
      Rng rng(derive_seed(s, Stream::kPaths));
      for (const Path& p : generate_paths(c, rng)) {
        const double x = p.doppler_hz / c.max_doppler_hz();
        m1 += x;
        m2 += x * x;
        ++count;
      }
    }
    EXPECT_NEAR(m1 / count, 0.0, 0.02);
    EXPECT_NEAR(m2 / count, 0.5, 0.02);
  }
}

TEST(ChannelAt, SinglePathClosedForm) {
  const ArrayGeometry g = small_geometry();
  ScenarioConfig c = small_scenario();
  Path p{Complex(0.6, -0.8), 0.4, 0.2, -0.9, 50e-9, 30.0};
  const std::size_t n = 7, l = 5;
  const CVector h = channel_at({p}, g, c, n, l);
  const CVector bs = steering_vector(g, ArraySide::kBs, {p.aoa_az, p.aoa_el});
  const CVector ue = steering_vector(g, ArraySide::kUe, {p.aod, 0.0});
  const double phase = 2.0 * kPi * (p.doppler_hz * n * c.slot_duration_s -
                                    c.subcarrier_offset_hz(l) * p.delay_s);
  const Complex scale = p.gain * Complex(std::cos(phase), std::sin(phase));
  for (Eigen::Index u = 0; u < ue.size(); ++u) {
    for (Eigen::Index b = 0; b < bs.size(); ++b) {
      EXPECT_NEAR(std::abs(h(u * bs.size() + b) - scale * bs(b) * ue(u)), 0.0, 1e-12);
    }
  }
  EXPECT_THROW(channel_at({p}, g, c, 0, c.num_subcarriers), std::out_of_range);
}

TEST(SynthesizeTrajectory, AgreesWithPerEntryRoute) {
  const ArrayGeometry g = small_geometry();
  ScenarioConfig c = small_scenario();
  c.ue_speed_mps = kmh_to_mps(60.0);
  Rng rng(11);
  const PathSet paths = generate_paths(c, rng);
  const ChannelTrajectory traj = synthesize_trajectory(paths, g, c, 5, 100);
  ASSERT_EQ(traj.size(), 5u);
  EXPECT_EQ(traj.rows(), 12);
  EXPECT_EQ(traj.cols(), 16);
  for (std::size_t n = 0; n < traj.size(); ++n) {
    for (std::size_t l = 0; l < c.num_subcarriers; ++l) {
      const CVector direct = channel_at(paths, g, c, 100 + n, l);
      EXPECT_LT((traj.slots[n].col(static_cast<Eigen::Index>(l)) - direct).norm(), 1e-12);
    }
  }
}

TEST(GenerateTrajectory, DeterministicAndPrefixConsistent) {
  const ArrayGeometry g = small_geometry();
  const ScenarioConfig c = small_scenario();
  const auto a = generate_trajectory(c, g, 20);
  const auto b = generate_trajectory(c, g, 30);
  for (std::size_t n = 0; n < 20; ++n) EXPECT_EQ(a.slots[n], b.slots[n]);
  const auto w = b.window(10, 5);
  EXPECT_EQ(w.start_slot, 10u);
  EXPECT_EQ(w.slots[0], b.slots[10]);
  EXPECT_THROW(b.window(28, 5), std::out_of_range);
}

TEST(GenerateTrajectory, StaticChannelIsConstant) {
  ScenarioConfig c = small_scenario();
  c.ue_speed_mps = 0.0;
  const auto t = generate_trajectory(c, small_geometry(), 10);
  for (const CMatrix& h : t.slots) EXPECT_EQ(h, t.slots.front());
}

TEST(GenerateTrajectory, AveragePowerPerCoefficientIsPathGainPower) {
  // Unit total path power gives E|h|^2 = 1 per antenna pair and subcarrier.
  ScenarioConfig c = small_scenario();
  double power = 0.0;
  int count = 0;
  for (std::uint64_t s = 1; s <= 200; ++s) {
    c.seed = s;
    const auto t = generate_trajectory(c, small_geometry(), 1);
    power += t.slots[0].squaredNorm();
    count += static_cast<int>(t.slots[0].size());
  }
  EXPECT_NEAR(power / count, 1.0, 0.1);
}

}  // namespace
}  // namespace chanpred
