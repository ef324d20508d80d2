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

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chanpred/channel_model.hpp"
#include "chanpred/dataset.hpp"
#include "chanpred/neural.hpp"

namespace chanpred {

enum class Approach {
  kAggregated,  // AL: one network on the pooled sub-channel data
  kSeparate,    // SL: one network per sub-channel
  kOutdated,    // OUT: reuse the latest estimate
};

struct PredictorKind {
  Approach approach = Approach::kAggregated;
  Domain domain = Domain::kFrequency;
  bool flip = false;

  /// "AL-AD", "AL-FD", "SL-AD", "SL-FD", "SL-AD-FLIP", "SL-FD-FLIP", "OUT".
  std::string name() const;
  static PredictorKind parse(std::string_view name);
  void validate() const;

  bool operator==(const PredictorKind&) const = default;
};

/// Measured training time. serial = sum over networks; wall = elapsed.
struct TrainingTiming {
  double serial_seconds = 0.0;
  double wall_seconds = 0.0;
};

struct TrainedPredictor {
  PredictorKind kind;
  std::vector<MlpModel> models;  // 1 for AL, K2 for SL, none for OUT
  std::size_t input_order = 0;
  std::size_t prediction_order = 1;
  Eigen::Index rows = 0;  // M
  Eigen::Index cols = 0;  // L
  TrainingTiming timing;
};

/// Trains on an estimated trajectory of at least I + p + 1 slots. SL network i
/// uses derive_seed(config.seed, kTraining, i), so training order and
/// parallelism do not affect any model. `jobs` bounds SL parallelism.
TrainedPredictor train_predictor(const PredictorKind& kind, const ChannelTrajectory& estimated,
                                 std::size_t input_order, std::size_t prediction_order,
                                 const TrainConfig& config, std::size_t jobs = 1);

/// Direct multi-output prediction from the last I estimates (oldest first).
/// Returns p matrices.
std::vector<CMatrix> predict_horizon(const TrainedPredictor& predictor,
                                     std::span<const CMatrix> recent);

/// One-step prediction; the first block of predict_horizon.
CMatrix predict_next(const TrainedPredictor& predictor, std::span<const CMatrix> recent);

/// Directory bundle: predictor.json plus model_NNNNN.bin per network.
void save_predictor(const TrainedPredictor& predictor, const std::filesystem::path& dir);
TrainedPredictor load_predictor(const std::filesystem::path& dir);

}  // namespace chanpred
