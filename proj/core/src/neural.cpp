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

#include "chanpred/neural.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace chanpred {

MlpArch MlpArch::for_subchannel(std::size_t k1, std::size_t input_order,
                                std::size_t prediction_order) {
  const std::size_t n_node = 2 * input_order * k1;
  return MlpArch{n_node, {n_node, n_node}, 2 * prediction_order * k1};
}

std::vector<std::size_t> MlpArch::layer_dims() const {
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(output_dim);
  return dims;
}

void MlpArch::validate() const {
  for (std::size_t d : layer_dims()) {
    if (d == 0) throw std::invalid_argument("MlpArch: every layer dimension must be >= 1");
  }
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
  if (batch_size == 0) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (epochs == 0) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("TrainConfig: ADAM betas must be in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("TrainConfig: epsilon must be > 0");
}

namespace {

std::vector<DenseLayer> zero_layers(const MlpModel& model) {
  std::vector<DenseLayer> out;
  out.reserve(model.layers.size());
  for (const DenseLayer& l : model.layers) {
    out.push_back({RMatrix::Zero(l.weights.rows(), l.weights.cols()), RVector::Zero(l.bias.size())});
  }
  return out;
}

void check_input(const MlpModel& model, Eigen::Index rows) {
  if (rows != static_cast<Eigen::Index>(model.arch.input_dim)) {
    throw std::invalid_argument("MLP input has dimension " + std::to_string(rows) +
                                ", model expects " + std::to_string(model.arch.input_dim));
  }
}

}  // namespace

AdamState AdamState::zeros_like(const MlpModel& model) {
  return {zero_layers(model), zero_layers(model), 0};
}

MlpModel init_model(const MlpArch& arch, Rng& rng) {
  arch.validate();
  MlpModel model;
  model.arch = arch;
  const auto dims = arch.layer_dims();
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const auto in = static_cast<Eigen::Index>(dims[k]);
    const auto out = static_cast<Eigen::Index>(dims[k + 1]);
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> uniform(-bound, bound);
    DenseLayer layer{RMatrix(out, in), RVector::Zero(out)};
    for (Eigen::Index c = 0; c < in; ++c) {
      for (Eigen::Index r = 0; r < out; ++r) layer.weights(r, c) = uniform(rng);
    }
    model.layers.push_back(std::move(layer));
  }
  return model;
}

std::size_t param_count(const MlpArch& arch) {
  const auto dims = arch.layer_dims();
  std::size_t total = 0;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) total += dims[k] * dims[k + 1] + dims[k + 1];
  return total;
}

RMatrix forward_batch(const MlpModel& model, const RMatrix& inputs) {
  check_input(model, inputs.rows());
  RMatrix a = inputs;
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    const DenseLayer& layer = model.layers[k];
    RMatrix z = layer.weights * a;
    z.colwise() += layer.bias;
    if (k + 1 < model.layers.size()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

RVector forward(const MlpModel& model, const RVector& x) {
  return forward_batch(model, x);
}

RMatrix predict_batch(const MlpModel& model, const RMatrix& inputs) {
  return forward_batch(model, inputs / model.input_scale) * model.input_scale;
}

RVector predict(const MlpModel& model, const RVector& x) { return predict_batch(model, x); }

LossAndGrad loss_and_grad(const MlpModel& model, const RMatrix& inputs, const RMatrix& labels) {
  if (inputs.cols() == 0) throw std::invalid_argument("loss_and_grad: empty batch");
  check_input(model, inputs.rows());
  if (labels.rows() != static_cast<Eigen::Index>(model.arch.output_dim) ||
      labels.cols() != inputs.cols()) {
    throw std::invalid_argument("loss_and_grad: label shape does not match model output");
  }

  const std::size_t depth = model.layers.size();
  // activations[k] is the input of layer k; pre[k] its pre-activation.
  std::vector<RMatrix> activations(depth + 1);
  std::vector<RMatrix> pre(depth);
  activations[0] = inputs;
  for (std::size_t k = 0; k < depth; ++k) {
    pre[k] = model.layers[k].weights * activations[k];
    pre[k].colwise() += model.layers[k].bias;
    activations[k + 1] = k + 1 < depth ? RMatrix(pre[k].cwiseMax(0.0)) : pre[k];
  }

  const double batch = static_cast<double>(inputs.cols());
  const RMatrix residual = activations[depth] - labels;
  LossAndGrad result;
  result.loss = residual.squaredNorm() / batch;
  result.grads = zero_layers(model);

  RMatrix delta = (2.0 / batch) * residual;
  for (std::size_t k = depth; k-- > 0;) {
    if (k + 1 < depth) delta = delta.cwiseProduct((pre[k].array() > 0.0).cast<double>().matrix());
    result.grads[k].weights.noalias() = delta * activations[k].transpose();
    result.grads[k].bias = delta.rowwise().sum();
    if (k > 0) delta = model.layers[k].weights.transpose() * delta;
  }
  return result;
}

LossAndGrad loss_and_grad(const MlpModel& model, std::span<const PackedSample> batch) {
  if (batch.empty()) throw std::invalid_argument("loss_and_grad: empty batch");
  RMatrix x(batch.front().x.size(), static_cast<Eigen::Index>(batch.size()));
  RMatrix y(batch.front().y.size(), static_cast<Eigen::Index>(batch.size()));
  for (std::size_t b = 0; b < batch.size(); ++b) {
    if (batch[b].x.size() != x.rows() || batch[b].y.size() != y.rows()) {
      throw std::invalid_argument("loss_and_grad: samples differ in dimension");
    }
    x.col(static_cast<Eigen::Index>(b)) = batch[b].x;
    y.col(static_cast<Eigen::Index>(b)) = batch[b].y;
  }
  return loss_and_grad(model, x, y);
}

void adam_step(MlpModel& model, const std::vector<DenseLayer>& grads, AdamState& state,
               const TrainConfig& config) {
  if (grads.size() != model.layers.size() || state.first_moment.size() != model.layers.size() ||
      state.second_moment.size() != model.layers.size()) {
    throw std::invalid_argument("adam_step: gradient/state layer count does not match model");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);

  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    if (grad.rows() != param.rows() || grad.cols() != param.cols()) {
      throw std::invalid_argument("adam_step: gradient shape does not match parameter");
    }
    m = config.beta1 * m + (1.0 - config.beta1) * grad;
    v = config.beta2 * v + (1.0 - config.beta2) * grad.cwiseAbs2();
    param.array() -= config.learning_rate * (m.array() / correction1) /
                     ((v.array() / correction2).sqrt() + config.epsilon);
  };
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    update(model.layers[k].weights, grads[k].weights, state.first_moment[k].weights,
           state.second_moment[k].weights);
    update(model.layers[k].bias, grads[k].bias, state.first_moment[k].bias,
           state.second_moment[k].bias);
  }
}

MlpModel train_packed(std::span<const PackedSample> samples, const MlpArch& arch,
                      const TrainConfig& config, double scale) {
  config.validate();
  if (samples.empty()) throw std::invalid_argument("train: empty dataset");
  if (!(scale > 0.0)) throw std::invalid_argument("train: scale must be > 0");

  const auto n = static_cast<Eigen::Index>(samples.size());
  RMatrix x(static_cast<Eigen::Index>(arch.input_dim), n);
  RMatrix y(static_cast<Eigen::Index>(arch.output_dim), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const PackedSample& s = samples[static_cast<std::size_t>(i)];
    if (s.x.size() != x.rows() || s.y.size() != y.rows()) {
      throw std::invalid_argument("train: sample dimensions do not match the architecture");
    }
    x.col(i) = s.x;
    y.col(i) = s.y;
  }

  Rng rng(config.seed);
  MlpModel model = init_model(arch, rng);
  model.input_scale = scale;
  AdamState state = AdamState::zeros_like(model);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto batch = static_cast<Eigen::Index>(config.batch_size);
  RMatrix bx, by;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index start = 0; start < n; start += batch) {
      const Eigen::Index count = std::min(batch, n - start);
      bx.resize(x.rows(), count);
      by.resize(y.rows(), count);
      for (Eigen::Index b = 0; b < count; ++b) {
        const Eigen::Index src = order[static_cast<std::size_t>(start + b)];
        bx.col(b) = x.col(src);
        by.col(b) = y.col(src);
      }
      adam_step(model, loss_and_grad(model, bx, by).grads, state, config);
    }
  }
  return model;
}

MlpModel train(const Dataset& dataset, const MlpArch& arch, const TrainConfig& config) {
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  const double scale = feature_scale(dataset);
  const std::vector<PackedSample> packed = pack_dataset(dataset, scale);
  return train_packed(packed, arch, config, scale);
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

constexpr std::array<char, 5> kModelMagic{'C', 'P', 'M', 'L', 'P'};
constexpr std::uint8_t kModelVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "model serialisation assumes a little-endian host");

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw std::runtime_error("load_model: truncated stream");
  return v;
}

void write_doubles(std::ostream& out, const double* data, Eigen::Index count) {
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * static_cast<Eigen::Index>(sizeof(double))));
}

void read_doubles(std::istream& in, double* data, Eigen::Index count) {
  in.read(reinterpret_cast<char*>(data),
          static_cast<std::streamsize>(count * static_cast<Eigen::Index>(sizeof(double))));
  if (!in) throw std::runtime_error("load_model: truncated stream");
}

}  // namespace

void save_model(const MlpModel& model, std::ostream& out) {
  out.write(kModelMagic.data(), kModelMagic.size());
  out.put(static_cast<char>(kModelVersion));
  const auto dims = model.arch.layer_dims();
  write_u64(out, dims.size());
  for (std::size_t d : dims) write_u64(out, d);
  for (const DenseLayer& l : model.layers) {
    write_doubles(out, l.weights.data(), l.weights.size());
    write_doubles(out, l.bias.data(), l.bias.size());
  }
  write_doubles(out, &model.input_scale, 1);
  if (!out) throw std::runtime_error("save_model: write failed");
}

MlpModel load_model(std::istream& in) {
  std::array<char, 5> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kModelMagic) throw std::runtime_error("load_model: bad magic");
  const int version = in.get();
  if (version != kModelVersion) {
    throw std::runtime_error("load_model: unsupported version " + std::to_string(version));
  }
  const std::uint64_t count = read_u64(in);
  if (count < 2 || count > 64) throw std::runtime_error("load_model: implausible layer count");
  std::vector<std::size_t> dims(count);
  for (auto& d : dims) d = read_u64(in);

  MlpModel model;
  model.arch.input_dim = dims.front();
  model.arch.output_dim = dims.back();
  model.arch.hidden_dims.assign(dims.begin() + 1, dims.end() - 1);
  model.arch.validate();
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    DenseLayer l{RMatrix(static_cast<Eigen::Index>(dims[k + 1]), static_cast<Eigen::Index>(dims[k])),
                 RVector(static_cast<Eigen::Index>(dims[k + 1]))};
    read_doubles(in, l.weights.data(), l.weights.size());
    read_doubles(in, l.bias.data(), l.bias.size());
    model.layers.push_back(std::move(l));
  }
  read_doubles(in, &model.input_scale, 1);
  return model;
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_model: cannot open " + path.string());
  save_model(model, out);
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_model: cannot open " + path.string());
  return load_model(in);
}

}  // namespace chanpred
