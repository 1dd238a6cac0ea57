// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "posefuse/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "posefuse/error.hpp"
#include "posefuse/json_io.hpp"
#include "posefuse/tensor_io.hpp"

namespace posefuse {

std::string to_string(Activation a) {
  return a == Activation::kRelu ? "relu" : "identity";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "identity") return Activation::kIdentity;
  fail(ErrorCode::kParse, "unknown activation '" + s + "'");
}

void MlpWeights::validate() const {
  if (layers.empty()) fail(ErrorCode::kInvalidArgument, "MLP has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const DenseLayer& layer = layers[l];
    if (layer.weight.size() != layer.in * layer.out || layer.bias.size() != layer.out) {
      fail(ErrorCode::kDimsMismatch, "MLP layer " + std::to_string(l) + " has inconsistent shapes");
    }
    if (l > 0 && layers[l - 1].out != layer.in) {
      fail(ErrorCode::kDimsMismatch, "MLP layer " + std::to_string(l) + " input does not chain");
    }
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(layer.weight.begin(), layer.weight.end(), finite) ||
        !std::all_of(layer.bias.begin(), layer.bias.end(), finite)) {
      fail(ErrorCode::kInvalidArgument, "MLP layer " + std::to_string(l) + " has non-finite values");
    }
  }
}

std::vector<double> mlp_forward(const MlpWeights& weights, std::span<const double> input) {
  if (weights.layers.empty()) fail(ErrorCode::kInvalidArgument, "MLP has no layers");
  if (input.size() != weights.input_size()) {
    fail(ErrorCode::kDimsMismatch, "MLP input has " + std::to_string(input.size()) +
                                       " values, first layer expects " +
                                       std::to_string(weights.input_size()));
  }
  std::vector<double> x(input.begin(), input.end());
  std::vector<double> y;
  for (const DenseLayer& layer : weights.layers) {
    if (x.size() != layer.in || layer.weight.size() != layer.in * layer.out ||
        layer.bias.size() != layer.out) {
      fail(ErrorCode::kDimsMismatch, "MLP layer shapes do not chain");
    }
    y.assign(layer.out, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
      double acc = layer.bias[o];
      const double* row = layer.weight.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) acc += row[i] * x[i];
      y[o] = layer.activation == Activation::kRelu ? std::max(0.0, acc) : acc;
    }
    x.swap(y);
  }
  return x;
}

MlpWeights load_mlp(const std::filesystem::path& header) {
  const json j = read_json(header);
  if (j.value("format", std::string()) != "posefuse-mlp") {
    fail(ErrorCode::kParse, header.string() + ": not a posefuse-mlp header");
  }
  const auto dir = header.parent_path();
  MlpWeights w;
  try {
    for (const auto& lj : j.at("layers")) {
      DenseLayer layer;
      layer.in = lj.at("in").get<std::size_t>();
      layer.out = lj.at("out").get<std::size_t>();
      layer.activation = activation_from_string(lj.at("activation").get<std::string>());
      const Tensor wt = read_tensor(dir / lj.at("weight").get<std::string>());
      const Tensor bt = read_tensor(dir / lj.at("bias").get<std::string>());
      if (wt.dims() != std::vector<std::size_t>{layer.out, layer.in} ||
          bt.dims() != std::vector<std::size_t>{layer.out}) {
        fail(ErrorCode::kDimsMismatch, "MLP tensor shapes disagree with the header");
      }
      layer.weight.assign(wt.data().begin(), wt.data().end());
      layer.bias.assign(bt.data().begin(), bt.data().end());
      w.layers.push_back(std::move(layer));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, header.string() + ": " + e.what());
  }
  w.validate();
  return w;
}

void save_mlp(const std::filesystem::path& header, const MlpWeights& weights) {
  weights.validate();
  const auto dir = header.parent_path();
  const auto stem = header.stem().string();
  json layers = json::array();
  for (std::size_t l = 0; l < weights.layers.size(); ++l) {
    const DenseLayer& layer = weights.layers[l];
    const std::string wname = stem + ".l" + std::to_string(l) + ".weight.ptns";
    const std::string bname = stem + ".l" + std::to_string(l) + ".bias.ptns";
    write_tensor(dir / wname, Tensor({layer.out, layer.in},
                                     std::vector<float>(layer.weight.begin(), layer.weight.end())));
    write_tensor(dir / bname,
                 Tensor({layer.out}, std::vector<float>(layer.bias.begin(), layer.bias.end())));
    layers.push_back({{"in", layer.in},
                      {"out", layer.out},
                      {"activation", to_string(layer.activation)},
                      {"weight", wname},
                      {"bias", bname}});
  }
  write_json(header, json{{"format", "posefuse-mlp"}, {"version", 1}, {"layers", layers}});
}

}  // namespace posefuse
