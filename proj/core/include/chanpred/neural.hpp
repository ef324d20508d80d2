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
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "chanpred/dataset.hpp"
#include "chanpred/rng.hpp"
#include "chanpred/types.hpp"

namespace chanpred {

struct MlpArch {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden_dims;
  std::size_t output_dim = 1;

  /// Input 2 I K1, two hidden layers of N_node = 2 I K1, output 2 p K1.
  static MlpArch for_subchannel(std::size_t k1, std::size_t input_order,
                                std::size_t prediction_order);

  /// input, hidden..., output
  std::vector<std::size_t> layer_dims() const;
  void validate() const;

  bool operator==(const MlpArch&) const = default;
};

struct DenseLayer {
  RMatrix weights;  // out x in
  RVector bias;     // out
};

/// ReLU on hidden layers, identity on the output layer. `input_scale`
/// divides inputs and multiplies outputs in predict().
struct MlpModel {
  MlpArch arch;
  std::vector<DenseLayer> layers;
  double input_scale = 1.0;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 16;
  std::size_t epochs = 150;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 1;

  void validate() const;
};

struct AdamState {
  std::vector<DenseLayer> first_moment;
  std::vector<DenseLayer> second_moment;
  std::uint64_t step = 0;

  static AdamState zeros_like(const MlpModel& model);
};

/// Glorot-uniform weights on +-sqrt(6 / (fan_in + fan_out)), zero biases.
MlpModel init_model(const MlpArch& arch, Rng& rng);

std::size_t param_count(const MlpArch& arch);

RVector forward(const MlpModel& model, const RVector& x);

/// Column-per-sample forward pass.
RMatrix forward_batch(const MlpModel& model, const RMatrix& inputs);

/// forward() on x / input_scale, output multiplied by input_scale.
RVector predict(const MlpModel& model, const RVector& x);
RMatrix predict_batch(const MlpModel& model, const RMatrix& inputs);

struct LossAndGrad {
  double loss = 0.0;
  std::vector<DenseLayer> grads;
};

/// Mean over the batch of ||y - f(x)||^2 and its gradient by backpropagation.
LossAndGrad loss_and_grad(const MlpModel& model, std::span<const PackedSample> batch);

/// Same as above for column-per-sample matrices.
LossAndGrad loss_and_grad(const MlpModel& model, const RMatrix& inputs, const RMatrix& labels);

/// One bias-corrected ADAM update.
void adam_step(MlpModel& model, const std::vector<DenseLayer>& grads, AdamState& state,
               const TrainConfig& config);

/// Trains on already-normalised samples. `scale` is stored in the model.
/// epochs x ceil(n / batch) steps; samples reshuffled every epoch; the last
/// partial batch is kept.
MlpModel train_packed(std::span<const PackedSample> samples, const MlpArch& arch,
                      const TrainConfig& config, double scale);

/// Normalises by feature_scale(dataset) and trains.
MlpModel train(const Dataset& dataset, const MlpArch& arch, const TrainConfig& config);

/// Binary format: "CPMLP" magic, version byte, little-endian u64 dims, then
/// every weight (column-major) and bias as IEEE-754 doubles, then input_scale.
void save_model(const MlpModel& model, std::ostream& out);
MlpModel load_model(std::istream& in);
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace chanpred
