// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace posefuse {

// Units are fixed library-wide: millimeters for 3D, pixels for 2D.

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Point3& operator+=(const Point3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Point3& operator-=(const Point3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  friend Point3 operator+(Point3 a, const Point3& b) { return a += b; }
  friend Point3 operator-(Point3 a, const Point3& b) { return a -= b; }
  friend Point3 operator*(double s, const Point3& p) { return {s * p.x, s * p.y, s * p.z}; }
  friend bool operator==(const Point3&, const Point3&) = default;
};

inline double squared_norm(const Point3& p) { return p.x * p.x + p.y * p.y + p.z * p.z; }
inline double norm(const Point3& p) { return std::sqrt(squared_norm(p)); }
inline double distance(const Point3& a, const Point3& b) { return norm(a - b); }
inline double squared_distance(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

/// Pinhole intrinsics. Construct through make() to get the invariants checked.
class CameraIntrinsics {
 public:
  CameraIntrinsics() = default;

  static CameraIntrinsics make(double fx, double fy, double cx, double cy, int width, int height);

  double fx() const { return fx_; }
  double fy() const { return fy_; }
  double cx() const { return cx_; }
  double cy() const { return cy_; }
  int width() const { return width_; }
  int height() const { return height_; }

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;

 private:
  double fx_ = 1000.0;
  double fy_ = 1000.0;
  double cx_ = 960.0;
  double cy_ = 540.0;
  int width_ = 1920;
  int height_ = 1080;
};

struct Pose2D {
  std::vector<Point2> joints;
  std::vector<double> confidence;
  std::vector<bool> visible;

  static Pose2D empty(std::size_t joint_count);

  std::size_t size() const { return joints.size(); }
  /// Throws kInvalidArgument when lengths disagree, a confidence leaves
  /// [0,1], or an invisible joint carries non-zero confidence.
  void validate() const;

  friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

/// Camera-centric skeleton. A joint with confidence 0 is treated as absent.
struct Pose3D {
  std::vector<Point3> joints;
  std::vector<double> confidence;
  std::optional<int> person_id;

  static Pose3D empty(std::size_t joint_count);

  std::size_t size() const { return joints.size(); }
  bool joint_present(std::size_t k) const { return confidence[k] > 0.0; }
  /// Length agreement, confidence range and Z > 0 for present joints.
  void validate() const;

  friend bool operator==(const Pose3D&, const Pose3D&) = default;
};

struct Detection {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  double score = 1.0;

  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }
  void validate(const CameraIntrinsics& camera) const;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Dense row-major float32 array with at most four dimensions.
class Tensor {
 public:
  static constexpr std::size_t kMaxDims = 4;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims, float fill = 0.0f);
  Tensor(std::vector<std::size_t> dims, std::vector<float> data);

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t ndim() const { return dims_.size(); }
  std::size_t dim(std::size_t i) const { return dims_.at(i); }
  std::size_t size() const { return data_.size(); }

  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  float at(std::size_t y, std::size_t x) const { return data_[y * dims_[1] + x]; }
  float& at(std::size_t y, std::size_t x) { return data_[y * dims_[1] + x]; }
  float at(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * dims_[1] + y) * dims_[2] + x];
  }
  float& at(std::size_t c, std::size_t y, std::size_t x) {
    return data_[(c * dims_[1] + y) * dims_[2] + x];
  }

  /// Contiguous view of channel c of a 3-D tensor.
  std::span<const float> channel(std::size_t c) const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> dims_;
  std::vector<float> data_;
};

}  // namespace posefuse
