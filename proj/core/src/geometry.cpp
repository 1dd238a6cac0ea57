// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "posefuse/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "posefuse/error.hpp"

namespace posefuse {

Point2 project_point(const Point3& p, const CameraIntrinsics& camera) {
  if (!(p.z > 0.0)) {
    fail(ErrorCode::kNonPositiveDepth, "cannot project a point with Z <= 0");
  }
  return {camera.fx() * p.x / p.z + camera.cx(), camera.fy() * p.y / p.z + camera.cy()};
}

Point3 backproject_point(const Point2& pixel, double depth, const CameraIntrinsics& camera) {
  if (!(depth > 0.0)) fail(ErrorCode::kNonPositiveDepth, "back-projection depth must be positive");
  return {(pixel.x - camera.cx()) * depth / camera.fx(),
          (pixel.y - camera.cy()) * depth / camera.fy(), depth};
}

Pose2D project(const Pose3D& pose, const CameraIntrinsics& camera) {
  Pose2D out = Pose2D::empty(pose.size());
  for (std::size_t k = 0; k < pose.size(); ++k) {
    if (!pose.joint_present(k)) continue;
    out.joints[k] = project_point(pose.joints[k], camera);
    out.confidence[k] = pose.confidence[k];
    out.visible[k] = true;
  }
  return out;
}

Pose3D backproject(const Pose2D& pose, std::span<const double> depths,
                   const CameraIntrinsics& camera) {
  if (depths.size() != pose.size()) {
    fail(ErrorCode::kDimsMismatch, "backproject needs one depth per joint");
  }
  Pose3D out = Pose3D::empty(pose.size());
  for (std::size_t k = 0; k < pose.size(); ++k) {
    if (!pose.visible[k]) continue;
    out.joints[k] = backproject_point(pose.joints[k], depths[k], camera);
    out.confidence[k] = pose.confidence[k];
  }
  return out;
}

double normalized_root_depth(double depth_mm, const CameraIntrinsics& camera) {
  if (!(depth_mm > 0.0)) fail(ErrorCode::kNonPositiveDepth, "root depth must be positive");
  return depth_mm / camera.fx();
}

double denormalize_root_depth(double normalized, const CameraIntrinsics& camera) {
  return normalized * camera.fx();
}

Point3 rotate_about_vertical(const Point3& p, const Point3& center, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const Point3 d = p - center;
  return center + Point3{d.x * c + d.z * s, d.y, -d.x * s + d.z * c};
}

Pose3D rotate_about_vertical(const Pose3D& pose, double theta, int root_index) {
  if (root_index < 0 || static_cast<std::size_t>(root_index) >= pose.size()) {
    fail(ErrorCode::kIndexOutOfRange, "root index out of range");
  }
  const Point3 center = pose.joints[root_index];
  Pose3D out = pose;
  for (std::size_t k = 0; k < pose.size(); ++k) {
    if (static_cast<int>(k) == root_index || !pose.joint_present(k)) continue;
    out.joints[k] = rotate_about_vertical(pose.joints[k], center, theta);
  }
  return out;
}

double reprojection_error(const Pose3D& pose3d, const Pose2D& pose2d,
                          const CameraIntrinsics& camera) {
  if (pose3d.size() != pose2d.size()) {
    fail(ErrorCode::kDimsMismatch, "reprojection_error poses disagree on joint count");
  }
  if (pose3d.size() == 0) fail(ErrorCode::kEmptyInput, "reprojection_error of empty poses");
  double sum = 0.0;
  for (std::size_t k = 0; k < pose3d.size(); ++k) {
    const double c = pose2d.confidence[k];
    if (c == 0.0) continue;
    sum += c * squared_distance(project_point(pose3d.joints[k], camera), pose2d.joints[k]);
  }
  return sum / static_cast<double>(pose3d.size());
}

double multi_perspective_error(const Pose3D& pose, double theta, const Repredictor& repredict,
                               const CameraIntrinsics& camera, int root_index) {
  const Pose3D rotated = rotate_about_vertical(pose, theta, root_index);
  const Pose3D repredicted = repredict(project(rotated, camera));
  if (repredicted.size() != pose.size()) {
    fail(ErrorCode::kDimsMismatch, "re-predicted pose has a different joint count");
  }
  // The inverse rotation is an isometry, so the deviation from the original
  // pose equals the deviation from its rotated copy; measuring in the
  // rotated frame avoids a second rounding pass.
  double sum = 0.0;
  for (std::size_t k = 0; k < pose.size(); ++k) {
    if (!pose.joint_present(k)) continue;
    sum += squared_norm(repredicted.joints[k] - rotated.joints[k]);
  }
  return sum / static_cast<double>(pose.size());
}

std::vector<double> ssl_weight(std::span<const double> e_rep, std::span<const double> e_mp,
                               double epoch, SoftmaxSign sign) {
  if (e_rep.empty()) fail(ErrorCode::kEmptyInput, "ssl_weight of an empty batch");
  if (e_rep.size() != e_mp.size()) {
    fail(ErrorCode::kDimsMismatch, "E_rep and E_mp batches differ in size");
  }
  if (!(epoch >= 1.0)) fail(ErrorCode::kInvalidArgument, "epoch count r must be >= 1");

  const double s = sign == SoftmaxSign::kNegative ? -1.0 : 1.0;
  const auto softmax = [&](std::span<const double> e) {
    std::vector<double> z(e.size());
    for (std::size_t b = 0; b < e.size(); ++b) z[b] = s * e[b] / epoch;
    const double m = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (double& v : z) {
      v = std::exp(v - m);
      total += v;
    }
    for (double& v : z) v /= total;
    return z;
  };
  auto w = softmax(e_rep);
  const auto w_mp = softmax(e_mp);
  for (std::size_t b = 0; b < w.size(); ++b) w[b] += w_mp[b];
  return w;
}

double ssl_loss(double weight, double e_rep, double e_mp, double l_dis) {
  if (!(weight >= 0.0)) fail(ErrorCode::kInvalidArgument, "SSL weight must be non-negative");
  return weight * (e_rep + e_mp) + l_dis;
}

}  // namespace posefuse
