// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "posefuse/match.hpp"
#include "posefuse/mlp.hpp"
#include "posefuse/types.hpp"

namespace posefuse {

struct PosePair {
  std::optional<Pose3D> td;
  std::optional<Pose3D> bu;
  double similarity = 0.0;

  friend bool operator==(const PosePair&, const PosePair&) = default;
};

/// Keeps the top-down root-relative pose and replaces its root depth with
/// the bottom-up one, sliding the root along its viewing ray.
Pose3D hard_fuse(const PosePair& pair, int root_index);

/// Confidence-weighted per-joint average of the two sides.
Pose3D linear_fuse(const PosePair& pair);

/// Network input: [TD xyz (3K), TD conf (K), BU xyz (3K), BU conf (K)],
/// an absent side zero-filled, plus the pair similarity when requested.
std::vector<double> integration_input(const PosePair& pair, std::size_t joint_count,
                                      bool include_similarity);

/// hard_fuse plus the network's per-joint residual (3K outputs).
Pose3D learned_fuse(const PosePair& pair, const MlpWeights& weights, int root_index,
                    bool include_similarity = false);

/// (1/K) sum_k |P_k - P~_k|^2.
double integration_loss(const Pose3D& predicted, const Pose3D& ground_truth);

struct AugmentParams {
  double mask_probability = 0.2;
  Point3 shift_sigma_mm{20.0, 20.0, 20.0};
  double zeroing_probability = 0.1;
};

/// Training-time corruption of a pose pair: one side may be zeroed, joints
/// masked (zero coordinates, zero confidence) and the rest shifted by
/// Gaussian noise. Deterministic in rng_seed.
PosePair augment_pair(const PosePair& pair, std::uint64_t rng_seed, const AugmentParams& params);

using PoseScorer = std::function<double(const Pose3D&)>;
using PairScorer = std::function<double(const Pose3D&, const Pose3D&)>;

/// C = 0.25 (D1(a) + D1(b)) + 0.5 D2(a, b). Scorer outputs must lie in [0,1].
double discriminator_score(const PoseScorer& d1, const PairScorer& d2, const Pose3D& pose_a,
                           const Pose3D& pose_b);

/// log(C_real) + log(1 - C_fake).
double discriminator_loss(double c_real, double c_fake);

/// D1 backed by an MLP over the root-relative joint coordinates, squashed
/// through a sigmoid.
PoseScorer make_single_pose_scorer(MlpWeights weights, int root_index);
/// D2 backed by an MLP over both camera-centric poses concatenated.
PairScorer make_pair_scorer(MlpWeights weights);

enum class FuseStrategy { kHard, kLinear, kMlp };

/// Applies one strategy to every matched pair and passes unmatched poses
/// through. Output order: pairs (by bu index), unmatched td, unmatched bu.
std::vector<Pose3D> fuse_matches(std::span<const Pose3D> bu, std::span<const Pose3D> td,
                                 const MatchResult& matches, FuseStrategy strategy,
                                 int root_index, const MlpWeights* weights = nullptr);

}  // namespace posefuse
