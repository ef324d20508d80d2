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

#include "chanpred/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace chanpred {

std::string_view to_string(Domain domain) {
  return domain == Domain::kArray ? "array" : "frequency";
}

Domain parse_domain(std::string_view text) {
  if (text == "array" || text == "AD") return Domain::kArray;
  if (text == "frequency" || text == "FD") return Domain::kFrequency;
  throw std::invalid_argument("unknown domain '" + std::string(text) + "'");
}

SubchannelShape subchannel_shape(Domain domain, Eigen::Index rows, Eigen::Index cols) {
  const auto m = static_cast<std::size_t>(rows);
  const auto l = static_cast<std::size_t>(cols);
  return domain == Domain::kArray ? SubchannelShape{m, l} : SubchannelShape{l, m};
}

CVector extract_subchannel(const CMatrix& matrix, Domain domain, std::size_t index) {
  const auto i = static_cast<Eigen::Index>(index);
  if (domain == Domain::kArray) {
    if (i >= matrix.cols()) throw std::out_of_range("extract_subchannel: column index out of range");
    return matrix.col(i);
  }
  if (i >= matrix.rows()) throw std::out_of_range("extract_subchannel: row index out of range");
  return matrix.row(i).transpose();
}

std::vector<RawPair> build_raw(const ChannelTrajectory& traj, std::size_t input_order,
                               std::size_t prediction_order) {
  if (input_order == 0 || prediction_order == 0) {
    throw std::invalid_argument("build_raw: input and prediction order must be >= 1");
  }
  const std::size_t n = traj.size();
  if (n < input_order + prediction_order) {
    throw std::invalid_argument("build_raw: insufficient collection time: " + std::to_string(n) +
                                " slots < I + p = " +
                                std::to_string(input_order + prediction_order));
  }
  std::vector<RawPair> pairs;
  pairs.reserve(n - input_order - prediction_order + 1);
  for (std::size_t last = input_order - 1; last + prediction_order < n; ++last) {
    RawPair pair;
    pair.base_slot = traj.start_slot + last;
    for (std::size_t k = last + 1 - input_order; k <= last; ++k) pair.inputs.push_back(traj.slots[k]);
    for (std::size_t k = last + 1; k <= last + prediction_order; ++k) {
      pair.labels.push_back(traj.slots[k]);
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<SubSample> split(const RawPair& pair, Domain domain) {
  if (pair.inputs.empty() || pair.labels.empty()) {
    throw std::invalid_argument("split: pair has no inputs or labels");
  }
  const Eigen::Index rows = pair.inputs.front().rows();
  const Eigen::Index cols = pair.inputs.front().cols();
  auto same_shape = [&](const CMatrix& m) { return m.rows() == rows && m.cols() == cols; };
  if (!std::all_of(pair.inputs.begin(), pair.inputs.end(), same_shape) ||
      !std::all_of(pair.labels.begin(), pair.labels.end(), same_shape)) {
    throw std::invalid_argument("split: inconsistent matrix shapes within a pair");
  }

  const SubchannelShape shape = subchannel_shape(domain, rows, cols);
  std::vector<SubSample> out(shape.count);
  for (std::size_t i = 0; i < shape.count; ++i) {
    SubSample& s = out[i];
    s.subchannel = i;
    s.base_slot = pair.base_slot;
    s.feature.reserve(pair.inputs.size());
    for (const CMatrix& g : pair.inputs) s.feature.push_back(extract_subchannel(g, domain, i));
    s.label.reserve(pair.labels.size());
    for (const CMatrix& g : pair.labels) s.label.push_back(extract_subchannel(g, domain, i));
  }
  return out;
}

namespace {

Dataset empty_like(std::span<const RawPair> pairs, Domain domain, Provenance provenance) {
  if (pairs.empty()) throw std::invalid_argument("dataset construction needs at least one pair");
  const RawPair& first = pairs.front();
  const SubchannelShape shape =
      subchannel_shape(domain, first.inputs.front().rows(), first.inputs.front().cols());
  Dataset d;
  d.domain = domain;
  d.input_order = first.inputs.size();
  d.prediction_order = first.labels.size();
  d.k1 = shape.length;
  d.k2 = shape.count;
  d.provenance = provenance;
  return d;
}

}  // namespace

Dataset aggregate_al(std::span<const RawPair> pairs, Domain domain) {
  Dataset d = empty_like(pairs, domain, Provenance::kAggregated);
  d.samples.reserve(pairs.size() * d.k2);
  for (const RawPair& pair : pairs) {
    for (SubSample& s : split(pair, domain)) d.samples.push_back(std::move(s));
  }
  return d;
}

std::vector<Dataset> sl_datasets(std::span<const RawPair> pairs, Domain domain) {
  const Dataset proto = empty_like(pairs, domain, Provenance::kSeparate);
  std::vector<Dataset> out(proto.k2, proto);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].subchannel = i;
    out[i].samples.reserve(pairs.size());
  }
  for (const RawPair& pair : pairs) {
    for (SubSample& s : split(pair, domain)) out[s.subchannel].samples.push_back(std::move(s));
  }
  return out;
}

Dataset flip_augment(const Dataset& dataset) {
  Dataset out = dataset;
  out.samples.reserve(2 * dataset.size());
  for (const SubSample& s : dataset.samples) {
    SubSample flipped = s;
    for (CVector& v : flipped.feature) v.reverseInPlace();
    for (CVector& v : flipped.label) v.reverseInPlace();
    out.samples.push_back(std::move(flipped));
  }
  return out;
}

RVector pack_vectors(std::span<const CVector> vectors) {
  if (vectors.empty()) return {};
  const Eigen::Index k1 = vectors.front().size();
  RVector out(2 * k1 * static_cast<Eigen::Index>(vectors.size()));
  Eigen::Index offset = 0;
  for (const CVector& v : vectors) {
    if (v.size() != k1) throw std::invalid_argument("pack_vectors: vectors differ in length");
    out.segment(offset, k1) = v.real();
    out.segment(offset + k1, k1) = v.imag();
    offset += 2 * k1;
  }
  return out;
}

PackedSample pack_real(const SubSample& sample) {
  return {pack_vectors(sample.feature), pack_vectors(sample.label)};
}

std::vector<CVector> unpack_complex(const RVector& packed, std::size_t k1, std::size_t steps) {
  const auto len = static_cast<Eigen::Index>(k1);
  if (packed.size() != 2 * len * static_cast<Eigen::Index>(steps)) {
    throw std::invalid_argument("unpack_complex: length " + std::to_string(packed.size()) +
                                " != 2 * K1 * steps = " + std::to_string(2 * k1 * steps));
  }
  std::vector<CVector> out(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    const Eigen::Index offset = 2 * len * static_cast<Eigen::Index>(s);
    CVector v(len);
    v.real() = packed.segment(offset, len);
    v.imag() = packed.segment(offset + len, len);
    out[s] = std::move(v);
  }
  return out;
}

CMatrix reconstruct(std::span<const CVector> predictions, Domain domain) {
  if (predictions.empty()) throw std::invalid_argument("reconstruct: no sub-channel predictions");
  const Eigen::Index k1 = predictions.front().size();
  const auto k2 = static_cast<Eigen::Index>(predictions.size());
  CMatrix out = domain == Domain::kArray ? CMatrix(k1, k2) : CMatrix(k2, k1);
  for (Eigen::Index i = 0; i < k2; ++i) {
    const CVector& v = predictions[static_cast<std::size_t>(i)];
    if (v.size() != k1) throw std::invalid_argument("reconstruct: sub-channel lengths differ");
    if (domain == Domain::kArray) {
      out.col(i) = v;
    } else {
      out.row(i) = v.transpose();
    }
  }
  return out;
}

double feature_scale(const Dataset& dataset) {
  double scale = 0.0;
  for (const SubSample& s : dataset.samples) {
    for (const CVector& v : s.feature) {
      if (v.size() > 0) scale = std::max(scale, v.cwiseAbs().maxCoeff());
    }
  }
  return scale > 0.0 ? scale : 1.0;
}

std::vector<PackedSample> pack_dataset(const Dataset& dataset, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("pack_dataset: scale must be > 0");
  std::vector<PackedSample> out;
  out.reserve(dataset.size());
  for (const SubSample& s : dataset.samples) {
    PackedSample p = pack_real(s);
    p.x /= scale;
    p.y /= scale;
    out.push_back(std::move(p));
  }
  return out;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& dataset, double scale) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_dataset_csv: cannot open " + path.string());
  const nlohmann::json header = {
      {"domain", to_string(dataset.domain)}, {"input_order", dataset.input_order},
      {"prediction_order", dataset.prediction_order}, {"k1", dataset.k1},
      {"k2", dataset.k2}, {"scale", scale}, {"samples", dataset.size()}};
  out << "# " << header.dump() << '\n';
  char buf[32];
  for (const PackedSample& p : pack_dataset(dataset, scale)) {
    bool first = true;
    for (const RVector* v : {&p.x, &p.y}) {
      for (Eigen::Index i = 0; i < v->size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", (*v)(i));
        out << (first ? "" : ",") << buf;
        first = false;
      }
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_dataset_csv: write failed for " + path.string());
}

LoadedDataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_dataset_csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw std::runtime_error("read_dataset_csv: missing JSON header in " + path.string());
  }
  const auto header = nlohmann::json::parse(line.substr(2));
  LoadedDataset d;
  d.domain = parse_domain(header.at("domain").get<std::string>());
  d.input_order = header.at("input_order").get<std::size_t>();
  d.prediction_order = header.at("prediction_order").get<std::size_t>();
  d.k1 = header.at("k1").get<std::size_t>();
  d.k2 = header.at("k2").get<std::size_t>();
  d.scale = header.at("scale").get<double>();

  const auto nx = static_cast<Eigen::Index>(2 * d.input_order * d.k1);
  const auto ny = static_cast<Eigen::Index>(2 * d.prediction_order * d.k1);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> values;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
    if (static_cast<Eigen::Index>(values.size()) != nx + ny) {
      throw std::runtime_error("read_dataset_csv: row has " + std::to_string(values.size()) +
                               " values, expected " + std::to_string(nx + ny));
    }
    PackedSample p;
    p.x = Eigen::Map<const RVector>(values.data(), nx);
    p.y = Eigen::Map<const RVector>(values.data() + nx, ny);
    d.samples.push_back(std::move(p));
  }
  return d;
}

}  // namespace chanpred
