// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace posefuse {

enum class Activation { kIdentity, kRelu };

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weight;  // out x in, row-major
  std::vector<double> bias;    // out
  Activation activation = Activation::kIdentity;
};

/// Inference-only fully connected network. Depth and widths come from the
/// weight bundle.
struct MlpWeights {
  std::vector<DenseLayer> layers;

  std::size_t input_size() const { return layers.empty() ? 0 : layers.front().in; }
  std::size_t output_size() const { return layers.empty() ? 0 : layers.back().out; }
  /// Layer dims chain and every value is finite.
  void validate() const;
};

std::vector<double> mlp_forward(const MlpWeights& weights, std::span<const double> input);

// Bundle layout: a JSON header
//   {"format": "posefuse-mlp", "version": 1,
//    "layers": [{"in": I, "out": O, "activation": "relu"|"identity",
//                "weight": "<file>.ptns", "bias": "<file>.ptns"}, ...]}
// with weight tensors (O x I) and bias tensors (O) stored next to it.
MlpWeights load_mlp(const std::filesystem::path& header);
void save_mlp(const std::filesystem::path& header, const MlpWeights& weights);

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

}  // namespace posefuse
