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

#include "chanpred/predictors.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "chanpred/parallel.hpp"

namespace chanpred {

std::string PredictorKind::name() const {
  if (approach == Approach::kOutdated) return "OUT";
  std::string out = approach == Approach::kAggregated ? "AL-" : "SL-";
  out += domain == Domain::kArray ? "AD" : "FD";
  if (flip) out += "-FLIP";
  return out;
}

PredictorKind PredictorKind::parse(std::string_view name) {
  if (name == "OUT") return {Approach::kOutdated, Domain::kFrequency, false};
  PredictorKind kind;
  if (name.starts_with("AL-")) {
    kind.approach = Approach::kAggregated;
  } else if (name.starts_with("SL-")) {
    kind.approach = Approach::kSeparate;
  } else {
    throw std::invalid_argument("unknown predictor '" + std::string(name) + "'");
  }
  std::string_view rest = name.substr(3);
  if (rest.ends_with("-FLIP")) {
    kind.flip = true;
    rest.remove_suffix(5);
  }
  if (rest == "AD") {
    kind.domain = Domain::kArray;
  } else if (rest == "FD") {
    kind.domain = Domain::kFrequency;
  } else {
    throw std::invalid_argument("unknown predictor '" + std::string(name) + "'");
  }
  kind.validate();
  return kind;
}

void PredictorKind::validate() const {
  if (flip && approach != Approach::kSeparate) {
    throw std::invalid_argument("FLIP augmentation is only defined for SL predictors");
  }
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_recent(const TrainedPredictor& predictor, std::span<const CMatrix> recent) {
  if (recent.size() != predictor.input_order) {
    throw std::invalid_argument("predict: expected " + std::to_string(predictor.input_order) +
                                " recent estimates, got " + std::to_string(recent.size()));
  }
  for (const CMatrix& g : recent) {
    if (g.rows() != predictor.rows || g.cols() != predictor.cols) {
      throw std::invalid_argument("predict: estimate shape does not match the trained predictor");
    }
  }
}

}  // namespace

TrainedPredictor train_predictor(const PredictorKind& kind, const ChannelTrajectory& estimated,
                                 std::size_t input_order, std::size_t prediction_order,
                                 const TrainConfig& config, std::size_t jobs) {
  kind.validate();
  config.validate();
  if (input_order == 0 || prediction_order == 0) {
    throw std::invalid_argument("train_predictor: I and p must be >= 1");
  }
  if (estimated.size() < input_order + prediction_order + 1) {
    throw std::invalid_argument("train_predictor: need at least I + p + 1 = " +
                                std::to_string(input_order + prediction_order + 1) +
                                " slots, got " + std::to_string(estimated.size()));
  }

  TrainedPredictor out;
  out.kind = kind;
  out.input_order = input_order;
  out.prediction_order = prediction_order;
  out.rows = estimated.rows();
  out.cols = estimated.cols();
  if (kind.approach == Approach::kOutdated) return out;

  const std::vector<RawPair> raw = build_raw(estimated, input_order, prediction_order);
  const SubchannelShape shape = subchannel_shape(kind.domain, out.rows, out.cols);
  const MlpArch arch = MlpArch::for_subchannel(shape.length, input_order, prediction_order);

  const auto wall_start = Clock::now();
  if (kind.approach == Approach::kAggregated) {
    out.models.push_back(train(aggregate_al(raw, kind.domain), arch, config));
    out.timing.serial_seconds = seconds_since(wall_start);
  } else {
    std::vector<Dataset> datasets = sl_datasets(raw, kind.domain);
    out.models.resize(datasets.size());
    std::vector<double> durations(datasets.size(), 0.0);
    parallel_for(datasets.size(), jobs, [&](std::size_t i) {
      const auto start = Clock::now();
      TrainConfig local = config;
      local.seed = derive_seed(config.seed, Stream::kTraining, i);
      const Dataset data = kind.flip ? flip_augment(datasets[i]) : std::move(datasets[i]);
      out.models[i] = train(data, arch, local);
      durations[i] = seconds_since(start);
    });
    for (double d : durations) out.timing.serial_seconds += d;
  }
  out.timing.wall_seconds = seconds_since(wall_start);
  return out;
}

std::vector<CMatrix> predict_horizon(const TrainedPredictor& predictor,
                                     std::span<const CMatrix> recent) {
  check_recent(predictor, recent);
  const std::size_t p = predictor.prediction_order;
  if (predictor.kind.approach == Approach::kOutdated) {
    return std::vector<CMatrix>(p, recent.back());
  }

  const Domain domain = predictor.kind.domain;
  const SubchannelShape shape = subchannel_shape(domain, predictor.rows, predictor.cols);
  const std::size_t expected_models =
      predictor.kind.approach == Approach::kAggregated ? 1 : shape.count;
  if (predictor.models.size() != expected_models) {
    throw std::logic_error("predict: predictor holds " + std::to_string(predictor.models.size()) +
                           " models, expected " + std::to_string(expected_models));
  }

  const auto k2 = static_cast<Eigen::Index>(shape.count);
  RMatrix features(static_cast<Eigen::Index>(2 * predictor.input_order * shape.length), k2);
  std::vector<CVector> steps(recent.size());
  for (Eigen::Index i = 0; i < k2; ++i) {
    for (std::size_t t = 0; t < recent.size(); ++t) {
      steps[t] = extract_subchannel(recent[t], domain, static_cast<std::size_t>(i));
    }
    features.col(i) = pack_vectors(steps);
  }

  RMatrix outputs;
  if (predictor.kind.approach == Approach::kAggregated) {
    outputs = predict_batch(predictor.models.front(), features);
  } else {
    outputs.resize(static_cast<Eigen::Index>(2 * p * shape.length), k2);
    for (Eigen::Index i = 0; i < k2; ++i) {
      outputs.col(i) = predict(predictor.models[static_cast<std::size_t>(i)], features.col(i));
    }
  }

  // per_step[j][i]: sub-channel i at horizon j.
  std::vector<std::vector<CVector>> per_step(p, std::vector<CVector>(shape.count));
  for (Eigen::Index i = 0; i < k2; ++i) {
    std::vector<CVector> blocks = unpack_complex(outputs.col(i), shape.length, p);
    for (std::size_t j = 0; j < p; ++j) per_step[j][static_cast<std::size_t>(i)] = std::move(blocks[j]);
  }
  std::vector<CMatrix> result;
  result.reserve(p);
  for (const auto& subs : per_step) result.push_back(reconstruct(subs, domain));
  return result;
}

CMatrix predict_next(const TrainedPredictor& predictor, std::span<const CMatrix> recent) {
  return predict_horizon(predictor, recent).front();
}

void save_predictor(const TrainedPredictor& predictor, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const nlohmann::json meta = {
      {"format", "chanpred-predictor"},
      {"version", 1},
      {"kind", predictor.kind.name()},
      {"input_order", predictor.input_order},
      {"prediction_order", predictor.prediction_order},
      {"rows", predictor.rows},
      {"cols", predictor.cols},
      {"num_models", predictor.models.size()},
      {"timing", {{"serial_seconds", predictor.timing.serial_seconds},
                  {"wall_seconds", predictor.timing.wall_seconds}}},
  };
  {
    std::ofstream out(dir / "predictor.json");
    if (!out) throw std::runtime_error("save_predictor: cannot write " + (dir / "predictor.json").string());
    out << meta.dump(2) << '\n';
  }
  for (std::size_t i = 0; i < predictor.models.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "model_%05zu.bin", i);
    save_model(predictor.models[i], dir / name);
  }
}

TrainedPredictor load_predictor(const std::filesystem::path& dir) {
  std::ifstream in(dir / "predictor.json");
  if (!in) throw std::runtime_error("load_predictor: cannot read " + (dir / "predictor.json").string());
  const nlohmann::json meta = nlohmann::json::parse(in);
  if (meta.value("format", "") != "chanpred-predictor") {
    throw std::runtime_error("load_predictor: " + dir.string() + " is not a predictor bundle");
  }
  TrainedPredictor out;
  out.kind = PredictorKind::parse(meta.at("kind").get<std::string>());
  out.input_order = meta.at("input_order").get<std::size_t>();
  out.prediction_order = meta.at("prediction_order").get<std::size_t>();
  out.rows = meta.at("rows").get<Eigen::Index>();
  out.cols = meta.at("cols").get<Eigen::Index>();
  out.timing.serial_seconds = meta.at("timing").at("serial_seconds").get<double>();
  out.timing.wall_seconds = meta.at("timing").at("wall_seconds").get<double>();
  const auto count = meta.at("num_models").get<std::size_t>();
  for (std::size_t i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "model_%05zu.bin", i);
    out.models.push_back(load_model(dir / name));
  }
  return out;
}

}  // namespace chanpred
