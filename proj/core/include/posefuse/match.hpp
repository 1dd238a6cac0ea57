// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "posefuse/hungarian.hpp"
#include "posefuse/types.hpp"

namespace posefuse {

/// Rows index the bottom-up set, columns the top-down set.
using SimMatrix = DenseMatrix;

/// exp(-d^2 / (2 s^2 sigma^2)) for the Euclidean distance d between a and b.
double oks(const Point3& a, const Point3& b, double s, double sigma);

inline constexpr double kMinPersonScaleMm = 100.0;

/// Cube root of the axis-aligned bounding volume of the present joints,
/// floored at kMinPersonScaleMm.
double person_scale(const Pose3D& pose);

struct SimilarityParams {
  double sigma = 0.5;
  /// Overrides sigma joint-by-joint when non-empty (length K).
  std::vector<double> per_joint_sigma;
  /// When set, used as s for every pair instead of the top-down person scale.
  std::optional<double> global_scale;
};

/// Sim(i, j) = sum_k min(c_bu[i][k], c_td[j][k]) * OKS(P_bu[i][k], P_td[j][k]).
SimMatrix sim_matrix(std::span<const Pose3D> bu, std::span<const Pose3D> td,
                     const SimilarityParams& params);

struct MatchParams {
  SimilarityParams similarity;
  /// Pairs below this similarity are split. Defaults to 0.1 * K.
  std::optional<double> threshold;
};

struct MatchPair {
  int bu = 0;
  int td = 0;
  double similarity = 0.0;

  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

struct MatchResult {
  std::vector<MatchPair> pairs;  // ascending bu index
  std::vector<int> unmatched_bu;
  std::vector<int> unmatched_td;

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

MatchResult match_pose_sets(std::span<const Pose3D> bu, std::span<const Pose3D> td,
                            const MatchParams& params);

}  // namespace posefuse
