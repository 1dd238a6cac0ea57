// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "posefuse/graph.hpp"

#include <algorithm>
#include <cmath>

#include "posefuse/error.hpp"

namespace posefuse {

Adjacency gcn_adjacency(const Tensor& heatmaps, const Skeleton& skeleton) {
  if (heatmaps.ndim() != 3) {
    fail(ErrorCode::kDimsMismatch, "heatmaps must be a K x H x W tensor");
  }
  const std::size_t k_count = skeleton.joint_count();
  if (heatmaps.dim(0) != k_count) {
    fail(ErrorCode::kDimsMismatch, "heatmap channel count " + std::to_string(heatmaps.dim(0)) +
                                       " does not match skeleton K=" + std::to_string(k_count));
  }
  if (heatmaps.dim(1) * heatmaps.dim(2) == 0) {
    fail(ErrorCode::kEmptyInput, "heatmaps have no pixels");
  }

  Adjacency a(k_count, k_count);
  for (std::size_t i = 0; i < k_count; ++i) {
    const auto ch = heatmaps.channel(i);
    const double confidence = *std::max_element(ch.begin(), ch.end());
    for (std::size_t j = 0; j < k_count; ++j) {
      a(i, j) = i == j ? confidence
                       : confidence * std::exp(-static_cast<double>(skeleton.hop_distance(
                                          static_cast<int>(i), static_cast<int>(j))));
    }
  }
  return a;
}

}  // namespace posefuse
