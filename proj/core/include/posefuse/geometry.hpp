// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "posefuse/types.hpp"

namespace posefuse {

Point2 project_point(const Point3& p, const CameraIntrinsics& camera);
Point3 backproject_point(const Point2& pixel, double depth, const CameraIntrinsics& camera);

/// Pinhole projection of every present joint; absent joints map to an
/// invisible (0, 0).
Pose2D project(const Pose3D& pose, const CameraIntrinsics& camera);

/// depths has one entry per joint; invisible joints are left at the origin
/// with zero confidence.
Pose3D backproject(const Pose2D& pose, std::span<const double> depths,
                   const CameraIntrinsics& camera);

/// R = Z / fx.
double normalized_root_depth(double depth_mm, const CameraIntrinsics& camera);
double denormalize_root_depth(double normalized, const CameraIntrinsics& camera);

/// Rotation by theta about the vertical (y) axis through `center`:
/// x' = x cos + z sin, z' = -x sin + z cos on center-relative offsets.
Point3 rotate_about_vertical(const Point3& p, const Point3& center, double theta);
/// Rotation about the vertical axis through the root joint.
Pose3D rotate_about_vertical(const Pose3D& pose, double theta, int root_index);

/// (1/K) sum_k C_k |project(X3D_k) - X2D_k|^2 with C_k from the 2D pose.
/// Joints with C_k = 0 are skipped entirely.
double reprojection_error(const Pose3D& pose3d, const Pose2D& pose2d,
                          const CameraIntrinsics& camera);

using Repredictor = std::function<Pose3D(const Pose2D&)>;

/// Rotate, reproject, re-predict, rotate back, and take the mean squared 3D
/// joint deviation from the original.
double multi_perspective_error(const Pose3D& pose, double theta, const Repredictor& repredict,
                               const CameraIntrinsics& camera, int root_index);

enum class SoftmaxSign {
  kNegative,  // softmax(-E/r): low-error samples weigh more early on
  kLiteral,   // softmax(+E/r)
};

/// w_b = softmax_b(s E_rep / r) + softmax_b(s E_mp / r) over the batch.
std::vector<double> ssl_weight(std::span<const double> e_rep, std::span<const double> e_mp,
                               double epoch, SoftmaxSign sign = SoftmaxSign::kNegative);

/// w (E_rep + E_mp) + L_dis.
double ssl_loss(double weight, double e_rep, double e_mp, double l_dis);

struct SslScore {
  double e_rep = 0.0;
  double e_mp = 0.0;
  double weight_w = 0.0;
  double l_ssl = 0.0;
};

}  // namespace posefuse
