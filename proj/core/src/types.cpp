// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "posefuse/types.hpp"

#include <limits>

#include "posefuse/error.hpp"

namespace posefuse {

CameraIntrinsics CameraIntrinsics::make(double fx, double fy, double cx, double cy,
                                        int width, int height) {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "camera focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    fail(ErrorCode::kInvalidArgument, "camera image size must be positive");
  }
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    fail(ErrorCode::kInvalidArgument, "camera principal point must lie inside the image");
  }
  CameraIntrinsics c;
  c.fx_ = fx;
  c.fy_ = fy;
  c.cx_ = cx;
  c.cy_ = cy;
  c.width_ = width;
  c.height_ = height;
  return c;
}

Pose2D Pose2D::empty(std::size_t joint_count) {
  Pose2D p;
  p.joints.assign(joint_count, Point2{});
  p.confidence.assign(joint_count, 0.0);
  p.visible.assign(joint_count, false);
  return p;
}

void Pose2D::validate() const {
  if (confidence.size() != joints.size() || visible.size() != joints.size()) {
    fail(ErrorCode::kInvalidArgument, "Pose2D field lengths disagree");
  }
  for (std::size_t k = 0; k < joints.size(); ++k) {
    if (!(confidence[k] >= 0.0 && confidence[k] <= 1.0)) {
      fail(ErrorCode::kInvalidArgument, "Pose2D confidence outside [0,1]");
    }
    if (!visible[k] && confidence[k] != 0.0) {
      fail(ErrorCode::kInvalidArgument, "invisible Pose2D joint with non-zero confidence");
    }
  }
}

Pose3D Pose3D::empty(std::size_t joint_count) {
  Pose3D p;
  p.joints.assign(joint_count, Point3{});
  p.confidence.assign(joint_count, 0.0);
  return p;
}

void Pose3D::validate() const {
  if (confidence.size() != joints.size()) {
    fail(ErrorCode::kInvalidArgument, "Pose3D field lengths disagree");
  }
  for (std::size_t k = 0; k < joints.size(); ++k) {
    if (!(confidence[k] >= 0.0 && confidence[k] <= 1.0)) {
      fail(ErrorCode::kInvalidArgument, "Pose3D confidence outside [0,1]");
    }
    if (confidence[k] > 0.0 && !(joints[k].z > 0.0)) {
      fail(ErrorCode::kNonPositiveDepth,
           "Pose3D joint " + std::to_string(k) + " is present but not in front of the camera");
    }
  }
}

void Detection::validate(const CameraIntrinsics& camera) const {
  if (!(x_min < x_max) || !(y_min < y_max)) {
    fail(ErrorCode::kInvalidArgument, "detection box has non-positive extent");
  }
  if (!(score >= 0.0 && score <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "detection score outside [0,1]");
  }
  if (x_max <= 0.0 || y_max <= 0.0 || x_min >= camera.width() || y_min >= camera.height()) {
    fail(ErrorCode::kOutOfBounds, "detection box does not intersect the image");
  }
}

namespace {

std::size_t checked_product(const std::vector<std::size_t>& dims) {
  if (dims.size() > Tensor::kMaxDims) {
    fail(ErrorCode::kDimOverflow, "tensor rank exceeds 4");
  }
  std::size_t n = 1;
  for (std::size_t d : dims) {
    if (d != 0 && n > std::numeric_limits<std::size_t>::max() / d) {
      fail(ErrorCode::kDimOverflow, "tensor element count overflows");
    }
    n *= d;
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> dims, float fill) : dims_(std::move(dims)) {
  data_.assign(checked_product(dims_), fill);
}

Tensor::Tensor(std::vector<std::size_t> dims, std::vector<float> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  if (checked_product(dims_) != data_.size()) {
    fail(ErrorCode::kDimsMismatch, "tensor payload length does not match its dims");
  }
}

std::span<const float> Tensor::channel(std::size_t c) const {
  if (dims_.size() != 3 || c >= dims_[0]) {
    fail(ErrorCode::kIndexOutOfRange, "tensor channel index out of range");
  }
  const std::size_t plane = dims_[1] * dims_[2];
  return std::span<const float>(data_).subspan(c * plane, plane);
}

}  // namespace posefuse
