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

#include <algorithm>
#include <filesystem>
#include <limits>

#include <gtest/gtest.h>

#include "chanpred/estimation.hpp"
#include "chanpred/metrics.hpp"
#include "chanpred/predictors.hpp"

namespace chanpred {
namespace {

ArrayGeometry tiny_geometry() {
  ArrayGeometry g;
  g.bs_rows = 2;
  g.bs_cols = 2;
  g.ue_antennas = 1;
  return g;
}

ChannelTrajectory tiny_trajectory(double speed_kmh, std::size_t slots, std::uint64_t seed = 1) {
  ScenarioConfig c;
  c.num_subcarriers = 6;
  c.num_paths = 5;
  c.ue_speed_mps = kmh_to_mps(speed_kmh);
  c.seed = seed;
  return generate_trajectory(c, tiny_geometry(), slots);
}

TrainConfig quick(std::size_t epochs = 20) {
  TrainConfig t;
  t.epochs = epochs;
  return t;
}

TEST(PredictorKind, NamesRoundTrip) {
  for (const char* name : {"AL-AD", "AL-FD", "SL-AD", "SL-FD", "SL-AD-FLIP", "SL-FD-FLIP", "OUT"}) {
    EXPECT_EQ(PredictorKind::parse(name).name(), name);
  }
  EXPECT_THROW(PredictorKind::parse("AL-AD-FLIP"), std::invalid_argument);
  EXPECT_THROW(PredictorKind::parse("JL-AD"), std::invalid_argument);
  EXPECT_THROW(PredictorKind::parse("SL-XD"), std::invalid_argument);
}

TEST(TrainPredictor, ModelCountsFollowKind) {
  const auto t = tiny_trajectory(20, 10);  // M = 4, L = 6
  EXPECT_EQ(train_predictor(PredictorKind::parse("AL-AD"), t, 2, 1, quick()).models.size(), 1u);
  EXPECT_EQ(train_predictor(PredictorKind::parse("SL-AD"), t, 2, 1, quick()).models.size(), 6u);
  EXPECT_EQ(train_predictor(PredictorKind::parse("SL-FD"), t, 2, 1, quick()).models.size(), 4u);
  EXPECT_TRUE(train_predictor(PredictorKind::parse("OUT"), t, 2, 1, quick()).models.empty());
  EXPECT_THROW(train_predictor(PredictorKind::parse("AL-FD"), t.window(0, 3), 2, 1, quick()),
               std::invalid_argument);
}

TEST(TrainPredictor, SlModelsIndependentOfParallelism) {
  const auto t = tiny_trajectory(30, 12);
  const auto kind = PredictorKind::parse("SL-FD-FLIP");
  const auto serial = train_predictor(kind, t, 2, 1, quick(), 1);
  const auto parallel = train_predictor(kind, t, 2, 1, quick(), 3);
  ASSERT_EQ(serial.models.size(), parallel.models.size());
  for (std::size_t i = 0; i < serial.models.size(); ++i) {
    for (std::size_t k = 0; k < serial.models[i].layers.size(); ++k) {
      EXPECT_EQ(serial.models[i].layers[k].weights, parallel.models[i].layers[k].weights);
    }
  }
  // Networks of different sub-channels start from different initialisations.
  EXPECT_NE(serial.models[0].layers[0].weights, serial.models[1].layers[0].weights);
  EXPECT_GT(serial.timing.serial_seconds, 0.0);
}

TEST(Predict, OutIsIdentityOnLatestEstimate) {
  const auto t = tiny_trajectory(40, 10);
  const auto out = train_predictor(PredictorKind::parse("OUT"), t, 3, 1, quick());
  const std::vector<CMatrix> recent(t.slots.begin() + 4, t.slots.begin() + 7);
  EXPECT_EQ(predict_next(out, recent), t.slots[6]);
}

TEST(Predict, ShapesAndHorizon) {
  const auto t = tiny_trajectory(40, 12);
  const auto al = train_predictor(PredictorKind::parse("AL-FD"), t, 2, 3, quick());
  const std::vector<CMatrix> recent(t.slots.end() - 2, t.slots.end());
  const auto horizon = predict_horizon(al, recent);
  ASSERT_EQ(horizon.size(), 3u);
  for (const CMatrix& h : horizon) {
    EXPECT_EQ(h.rows(), 4);
    EXPECT_EQ(h.cols(), 6);
  }
  EXPECT_EQ(predict_next(al, recent), horizon.front());
  const std::vector<CMatrix> too_few(t.slots.end() - 1, t.slots.end());
  EXPECT_THROW(predict_next(al, too_few), std::invalid_argument);
  const std::vector<CMatrix> wrong_shape(2, CMatrix::Zero(6, 4));
  EXPECT_THROW(predict_next(al, wrong_shape), std::invalid_argument);
}

TEST(Predict, AlOutputIsPerSubchannelReconstruction) {
  const auto t = tiny_trajectory(40, 10);
  for (const char* name : {"AL-AD", "AL-FD"}) {
    const auto kind = PredictorKind::parse(name);
    const auto al = train_predictor(kind, t, 2, 1, quick());
    const std::vector<CMatrix> recent(t.slots.end() - 2, t.slots.end());
    const auto shape = subchannel_shape(kind.domain, 4, 6);
    std::vector<CVector> parts;
    for (std::size_t i = 0; i < shape.count; ++i) {
      const std::vector<CVector> steps{extract_subchannel(recent[0], kind.domain, i),
                                       extract_subchannel(recent[1], kind.domain, i)};
      const RVector y = predict(al.models[0], pack_vectors(steps));
      parts.push_back(unpack_complex(y, shape.length, 1)[0]);
    }
    EXPECT_LT((predict_next(al, recent) - reconstruct(parts, kind.domain)).norm(), 1e-12) << name;
  }
}

TEST(Predict, ArrayAndFrequencyDomainsDiffer) {
  const auto t = tiny_trajectory(40, 10);
  const std::vector<CMatrix> recent(t.slots.end() - 2, t.slots.end());
  const auto ad = train_predictor(PredictorKind::parse("AL-AD"), t, 2, 1, quick());
  const auto fd = train_predictor(PredictorKind::parse("AL-FD"), t, 2, 1, quick());
  EXPECT_GT((predict_next(ad, recent) - predict_next(fd, recent)).norm(), 1e-6);
}

TEST(Predict, StaticChannelPersistenceAllSteps) {
  const auto t = tiny_trajectory(0, 12);
  const auto al = train_predictor(PredictorKind::parse("AL-FD"), t, 2, 2, quick(800));
  const std::vector<CMatrix> recent(t.slots.end() - 2, t.slots.end());
  for (const CMatrix& h : predict_horizon(al, recent)) {
    EXPECT_LT(nmse(std::span<const CMatrix>(&h, 1), std::span<const CMatrix>(&t.slots[0], 1)).db, -30.0);
  }
}

TEST(Bundle, SaveLoadRoundTrip) {
  const auto t = tiny_trajectory(20, 10);
  const auto dir = std::filesystem::temp_directory_path() / "chanpred_bundle_test";
  std::filesystem::remove_all(dir);
  const auto sl = train_predictor(PredictorKind::parse("SL-AD-FLIP"), t, 2, 1, quick());
  save_predictor(sl, dir);
  const auto back = load_predictor(dir);
  EXPECT_EQ(back.kind, sl.kind);
  EXPECT_EQ(back.models.size(), sl.models.size());
  EXPECT_EQ(back.input_order, 2u);
  const std::vector<CMatrix> recent(t.slots.end() - 2, t.slots.end());
  EXPECT_EQ(predict_next(back, recent), predict_next(sl, recent));
  std::filesystem::remove_all(dir);
  EXPECT_THROW(load_predictor(dir), std::runtime_error);
}

}  // namespace
}  // namespace chanpred
