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
#include <sstream>

#include <gtest/gtest.h>

#include "chanpred/neural.hpp"
#include "oracles.hpp"

namespace chanpred {
namespace {

MlpArch toy_arch() { return MlpArch{5, {7, 6}, 3}; }

bool same_model(const MlpModel& a, const MlpModel& b) {
  if (!(a.arch == b.arch) || a.layers.size() != b.layers.size() || a.input_scale != b.input_scale) return false;
  for (std::size_t k = 0; k < a.layers.size(); ++k) {
    if (a.layers[k].weights != b.layers[k].weights || a.layers[k].bias != b.layers[k].bias) return false;
  }
  return true;
}

TEST(MlpArch, SubchannelFamily) {
  const MlpArch a = MlpArch::for_subchannel(128, 3, 1);
  EXPECT_EQ(a.input_dim, 768u);
  EXPECT_EQ(a.hidden_dims, (std::vector<std::size_t>{768, 768}));
  EXPECT_EQ(a.output_dim, 256u);
  EXPECT_EQ(MlpArch::for_subchannel(4, 2, 3).output_dim, 24u);
  EXPECT_THROW((MlpArch{0, {3}, 1}).validate(), std::invalid_argument);
}

TEST(ParamCount, TableTwoConfiguration) {
  const std::size_t count = param_count(MlpArch::for_subchannel(128, 3, 1));
  EXPECT_EQ(count, 1378048u);
  EXPECT_LE(count - 1378044u, 4u);
  Rng rng(1);
  const MlpModel m = init_model(toy_arch(), rng);
  std::size_t actual = 0;
  for (const DenseLayer& l : m.layers) actual += l.weights.size() + l.bias.size();
  EXPECT_EQ(actual, param_count(toy_arch()));
}

TEST(InitModel, GlorotBoundsAndZeroBias) {
  Rng rng(4);
  const MlpModel m = init_model(MlpArch{40, {60}, 20}, rng);
  ASSERT_EQ(m.layers.size(), 2u);
  EXPECT_EQ(m.layers[0].weights.rows(), 60);
  EXPECT_EQ(m.layers[0].weights.cols(), 40);
  EXPECT_LE(m.layers[0].weights.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 100.0));
  EXPECT_EQ(m.layers[0].bias, RVector::Zero(60));
  // Uniform(-b, b) has variance b^2 / 3 = 2 / (in + out).
  const double var = m.layers[0].weights.squaredNorm() / m.layers[0].weights.size();
  EXPECT_NEAR(var, 2.0 / 100.0, 0.004);
}

TEST(Forward, BatchMatchesSingleAndReferenceLoss) {
  Rng rng(2);
  const MlpModel m = init_model(toy_arch(), rng);
  const RMatrix x = RMatrix::Random(5, 4);
  const RMatrix y = RMatrix::Random(3, 4);
  const RMatrix out = forward_batch(m, x);
  for (Eigen::Index c = 0; c < 4; ++c) EXPECT_LT((out.col(c) - forward(m, x.col(c))).norm(), 1e-14);
  EXPECT_NEAR(loss_and_grad(m, x, y).loss, oracle::reference_loss(m, x, y), 1e-12);
  EXPECT_THROW(forward(m, RVector::Zero(4)), std::invalid_argument);
}

TEST(Gradient, MatchesCentralDifferences) {
  for (std::uint64_t draw = 0; draw < 5; ++draw) {
    Rng rng(100 + draw);
    MlpModel m = init_model(toy_arch(), rng);
    for (DenseLayer& l : m.layers) l.bias = RVector::Random(l.bias.size()) * 0.3;
    const RMatrix x = RMatrix::Random(5, 6);
    const RMatrix y = RMatrix::Random(3, 6);
    const auto analytic = loss_and_grad(m, x, y).grads;
    const auto numeric = oracle::numeric_gradient(m, x, y, 1e-6);
    EXPECT_LT(oracle::max_relative_error(analytic, numeric, 1e-9), 1e-5) << "draw " << draw;
  }
}

TEST(Gradient, SpanOverloadAgrees) {
  Rng rng(3);
  const MlpModel m = init_model(toy_arch(), rng);
  std::vector<PackedSample> batch;
  RMatrix x(5, 3), y(3, 3);
  for (int i = 0; i < 3; ++i) {
    batch.push_back({RVector::Random(5), RVector::Random(3)});
    x.col(i) = batch.back().x;
    y.col(i) = batch.back().y;
  }
  const auto a = loss_and_grad(m, batch);
  const auto b = loss_and_grad(m, x, y);
  EXPECT_EQ(a.loss, b.loss);
  EXPECT_EQ(a.grads[1].weights, b.grads[1].weights);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  // With bias correction the first update is lr * g / (|g| + eps) per entry.
  Rng rng(5);
  MlpModel m = init_model(MlpArch{2, {}, 1}, rng);
  const MlpModel before = m;
  std::vector<DenseLayer> grads{{RMatrix::Constant(1, 2, 0.5), RVector::Constant(1, -2.0)}};
  AdamState state = AdamState::zeros_like(m);
  TrainConfig cfg;
  adam_step(m, grads, state, cfg);
  EXPECT_EQ(state.step, 1u);
  EXPECT_NEAR(m.layers[0].weights(0, 0) - before.layers[0].weights(0, 0), -1e-3 * 0.5 / (0.5 + 1e-8), 1e-15);
  EXPECT_NEAR(m.layers[0].bias(0), 1e-3 * 2.0 / (2.0 + 1e-8), 1e-15);
}

TEST(Adam, MatchesScalarRecursion) {
  Rng rng(6);
  MlpModel m = init_model(MlpArch{1, {}, 1}, rng);
  double w = m.layers[0].weights(0, 0), mom = 0.0, vel = 0.0;
  AdamState state = AdamState::zeros_like(m);
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  for (int t = 1; t <= 20; ++t) {
    const double g = std::sin(t);
    std::vector<DenseLayer> grads{{RMatrix::Constant(1, 1, g), RVector::Zero(1)}};
    adam_step(m, grads, state, cfg);
    mom = 0.9 * mom + 0.1 * g;
    vel = 0.999 * vel + 0.001 * g * g;
    w -= 0.01 * (mom / (1 - std::pow(0.9, t))) / (std::sqrt(vel / (1 - std::pow(0.999, t))) + 1e-8);
  }
  EXPECT_NEAR(m.layers[0].weights(0, 0), w, 1e-12);
}

TEST(Train, LearnsIdentityMapAndIsDeterministic) {
  std::vector<PackedSample> samples;
  Rng data(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 64; ++i) {
    RVector x(4);
    for (Eigen::Index j = 0; j < 4; ++j) x(j) = u(data);
    samples.push_back({x, x.head(2)});
  }
  const MlpArch arch{4, {16, 16}, 2};
  TrainConfig cfg;
  cfg.epochs = 300;
  cfg.learning_rate = 3e-3;
  const MlpModel m = train_packed(samples, arch, cfg, 1.0);
  double mse = 0.0;
  for (const auto& s : samples) mse += (forward(m, s.x) - s.y).squaredNorm();
  EXPECT_LT(mse / samples.size(), 1e-3);
  EXPECT_TRUE(same_model(m, train_packed(samples, arch, cfg, 1.0)));
  cfg.seed = 2;
  EXPECT_FALSE(same_model(m, train_packed(samples, arch, cfg, 1.0)));
}

TEST(Train, PredictUndoesScale) {
  Rng rng(1);
  MlpModel m = init_model(toy_arch(), rng);
  const RVector x = RVector::Random(5);
  m.input_scale = 4.0;
  EXPECT_LT((predict(m, x) - 4.0 * forward(m, x / 4.0)).norm(), 1e-14);
}

TEST(Train, RejectsBadInput) {
  TrainConfig cfg;
  std::vector<PackedSample> none;
  EXPECT_THROW(train_packed(none, toy_arch(), cfg, 1.0), std::invalid_argument);
  std::vector<PackedSample> wrong{{RVector::Zero(4), RVector::Zero(3)}};
  EXPECT_THROW(train_packed(wrong, toy_arch(), cfg, 1.0), std::invalid_argument);
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Persistence, RoundTripIsBitExact) {
  Rng rng(8);
  MlpModel m = init_model(toy_arch(), rng);
  m.input_scale = 0.123456789;
  std::stringstream buf;
  save_model(m, buf);
  const MlpModel back = load_model(buf);
  EXPECT_TRUE(same_model(m, back));

  std::stringstream bad("XXXXX");
  EXPECT_THROW(load_model(bad), std::runtime_error);
  std::string bytes;
  {
    std::stringstream again;
    save_model(m, again);
    bytes = again.str();
  }
  std::stringstream truncated(bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(load_model(truncated), std::runtime_error);
}

}  // namespace
}  // namespace chanpred
