// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "posefuse/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "posefuse/error.hpp"
#include "posefuse/geometry.hpp"

namespace posefuse {

namespace {

void require_3d(const Tensor& t, const char* what) {
  if (t.ndim() != 3) {
    fail(ErrorCode::kDimsMismatch, std::string(what) + " must be a K x H x W tensor");
  }
}

bool candidate_before(const Peak& a, const Peak& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.px != b.px) return a.px < b.px;
  return a.py < b.py;
}

// Nearest map pixel for an image-space coordinate.
std::pair<std::size_t, std::size_t> map_pixel(const Point2& image_xy, int stride,
                                              std::size_t width, std::size_t height,
                                              std::size_t joint) {
  const double u = std::round(image_xy.x / stride);
  const double v = std::round(image_xy.y / stride);
  if (!(u >= 0.0 && v >= 0.0 && u < static_cast<double>(width) &&
        v < static_cast<double>(height))) {
    fail(ErrorCode::kOutOfBounds, "joint " + std::to_string(joint) + " at (" +
                                      std::to_string(image_xy.x) + ", " +
                                      std::to_string(image_xy.y) + ") lies outside the maps");
  }
  return {static_cast<std::size_t>(v), static_cast<std::size_t>(u)};
}

Tensor crop(const Tensor& t, std::size_t y0, std::size_t y1, std::size_t x0, std::size_t x1) {
  const std::size_t k = t.dim(0);
  Tensor out({k, y1 - y0, x1 - x0});
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t y = y0; y < y1; ++y) {
      for (std::size_t x = x0; x < x1; ++x) out.at(c, y - y0, x - x0) = t.at(c, y, x);
    }
  }
  return out;
}

}  // namespace

void BottomUpMaps::validate() const {
  require_3d(joint_heatmaps, "joint heatmaps");
  require_3d(tag_maps, "tag maps");
  require_3d(rel_depth, "relative depth maps");
  if (tag_maps.dims() != joint_heatmaps.dims() || rel_depth.dims() != joint_heatmaps.dims()) {
    fail(ErrorCode::kDimsMismatch, "heatmap, tag and relative depth maps disagree in shape");
  }
  if (root_depth.ndim() != 2 || root_depth.dim(0) != height() || root_depth.dim(1) != width()) {
    fail(ErrorCode::kDimsMismatch, "root depth map must be H x W matching the heatmaps");
  }
  if (stride < 1) fail(ErrorCode::kInvalidArgument, "map stride must be >= 1");
}

PeakSet extract_peaks(const Tensor& heatmaps, const Tensor& tag_maps, double min_score,
                      int max_people) {
  require_3d(heatmaps, "heatmaps");
  if (tag_maps.dims() != heatmaps.dims()) {
    fail(ErrorCode::kDimsMismatch, "heatmaps and tag maps differ in shape");
  }
  if (!(min_score > 0.0 && min_score < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "min_score must lie in (0, 1)");
  }
  if (max_people < 1) fail(ErrorCode::kInvalidArgument, "max_people must be >= 1");

  const auto k_count = heatmaps.dim(0);
  const auto h = static_cast<long>(heatmaps.dim(1));
  const auto w = static_cast<long>(heatmaps.dim(2));
  PeakSet out;
  out.per_joint.resize(k_count);

  for (std::size_t k = 0; k < k_count; ++k) {
    auto& peaks = out.per_joint[k];
    for (long y = 0; y < h; ++y) {
      for (long x = 0; x < w; ++x) {
        const float v = heatmaps.at(k, y, x);
        if (!(v >= min_score)) continue;
        bool is_max = true;
        for (long dy = -1; dy <= 1 && is_max; ++dy) {
          for (long dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const long ny = y + dy;
            const long nx = x + dx;
            if (ny < 0 || nx < 0 || ny >= h || nx >= w) continue;
            if (!(v > heatmaps.at(k, ny, nx))) {
              is_max = false;
              break;
            }
          }
        }
        if (!is_max) continue;

        // Quarter-pixel shift toward the larger 4-neighbour on each axis.
        double rx = static_cast<double>(x);
        double ry = static_cast<double>(y);
        if (x > 0 && x + 1 < w) {
          const float left = heatmaps.at(k, y, x - 1);
          const float right = heatmaps.at(k, y, x + 1);
          if (right > left) rx += 0.25;
          if (right < left) rx -= 0.25;
        }
        if (y > 0 && y + 1 < h) {
          const float up = heatmaps.at(k, y - 1, x);
          const float down = heatmaps.at(k, y + 1, x);
          if (down > up) ry += 0.25;
          if (down < up) ry -= 0.25;
        }
        peaks.push_back(Peak{rx, ry, static_cast<int>(x), static_cast<int>(y),
                             static_cast<double>(v), static_cast<double>(tag_maps.at(k, y, x))});
      }
    }
    std::sort(peaks.begin(), peaks.end(), candidate_before);
    if (peaks.size() > static_cast<std::size_t>(max_people)) peaks.resize(max_people);
  }
  return out;
}

std::vector<GroupedPerson> group_by_tags(const PeakSet& peaks, double tag_gap) {
  if (!(tag_gap > 0.0)) fail(ErrorCode::kInvalidArgument, "tag_gap must be positive");
  const std::size_t k_count = peaks.per_joint.size();

  struct Building {
    Pose2D pose;
    double tag_sum = 0.0;
    int tag_count = 0;
    double mean() const { return tag_sum / tag_count; }
  };
  std::vector<Building> persons;

  for (std::size_t k = 0; k < k_count; ++k) {
    auto candidates = peaks.per_joint[k];
    std::stable_sort(candidates.begin(), candidates.end(), candidate_before);
    for (const Peak& c : candidates) {
      int best = -1;
      double best_gap = std::numeric_limits<double>::infinity();
      for (std::size_t p = 0; p < persons.size(); ++p) {
        if (persons[p].pose.visible[k]) continue;
        const double gap = std::abs(persons[p].mean() - c.tag);
        if (gap <= tag_gap && gap < best_gap) {
          best = static_cast<int>(p);
          best_gap = gap;
        }
      }
      if (best < 0) {
        persons.push_back(Building{Pose2D::empty(k_count)});
        best = static_cast<int>(persons.size()) - 1;
      }
      Building& person = persons[best];
      person.pose.joints[k] = Point2{c.x, c.y};
      person.pose.confidence[k] = std::clamp(c.score, 0.0, 1.0);
      person.pose.visible[k] = person.pose.confidence[k] > 0.0;
      if (!person.pose.visible[k]) person.pose.joints[k] = Point2{};
      person.tag_sum += c.tag;
      ++person.tag_count;
    }
  }

  std::vector<GroupedPerson> out;
  out.reserve(persons.size());
  for (auto& p : persons) out.push_back(GroupedPerson{std::move(p.pose), p.mean()});
  return out;
}

Pose3D retrieve_depths(const Pose2D& pose, const BottomUpMaps& maps,
                       const CameraIntrinsics& camera, int root_index) {
  maps.validate();
  const std::size_t k_count = maps.joint_count();
  if (pose.size() != k_count) {
    fail(ErrorCode::kDimsMismatch, "pose joint count does not match the depth maps");
  }
  if (root_index < 0 || static_cast<std::size_t>(root_index) >= k_count) {
    fail(ErrorCode::kIndexOutOfRange, "root index out of range");
  }
  if (!pose.visible[root_index]) {
    fail(ErrorCode::kInvalidArgument, "root joint is not visible; no root depth to read");
  }

  const auto [rv, ru] =
      map_pixel(pose.joints[root_index], maps.stride, maps.width(), maps.height(), root_index);
  const double z_root = maps.root_depth.at(rv, ru);
  if (!(z_root > 0.0)) {
    fail(ErrorCode::kNonPositiveDepth,
         "root depth " + std::to_string(z_root) + " mm is not in front of the camera");
  }

  Pose3D out = Pose3D::empty(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    if (!pose.visible[k]) continue;
    double z = z_root;
    if (static_cast<int>(k) != root_index) {
      const auto [v, u] = map_pixel(pose.joints[k], maps.stride, maps.width(), maps.height(), k);
      z = z_root + static_cast<double>(maps.rel_depth.at(k, v, u));
      if (!(z > 0.0)) {
        fail(ErrorCode::kNonPositiveDepth,
             "joint " + std::to_string(k) + " depth is not in front of the camera");
      }
    }
    out.joints[k] = backproject_point(pose.joints[k], z, camera);
    out.confidence[k] = pose.confidence[k];
  }
  return out;
}

std::vector<Pose3D> decode_bottom_up(const BottomUpMaps& maps, const CameraIntrinsics& camera,
                                     const Skeleton& skeleton, const DecodeParams& params) {
  maps.validate();
  if (maps.joint_count() != skeleton.joint_count()) {
    fail(ErrorCode::kDimsMismatch, "map channel count does not match the skeleton");
  }
  const auto peaks =
      extract_peaks(maps.joint_heatmaps, maps.tag_maps, params.min_score, params.max_people);
  const auto groups = group_by_tags(peaks, params.tag_gap);
  const int root = skeleton.root_index();

  std::vector<Pose3D> out;
  for (const auto& g : groups) {
    if (!g.pose.visible[root]) continue;
    Pose2D image = g.pose;
    for (std::size_t k = 0; k < image.size(); ++k) {
      if (!image.visible[k]) continue;
      image.joints[k].x *= maps.stride;
      image.joints[k].y *= maps.stride;
    }
    out.push_back(retrieve_depths(image, maps, camera, root));
  }
  return out;
}

std::vector<Pose2D> decode_topdown(const Tensor& heatmaps, const Tensor& tag_maps,
                                   const Detection& detection, double enlarge_ratio,
                                   const CameraIntrinsics& camera, int stride,
                                   const DecodeParams& params) {
  if (!(enlarge_ratio >= 1.0)) fail(ErrorCode::kInvalidArgument, "enlarge_ratio must be >= 1");
  if (stride < 1) fail(ErrorCode::kInvalidArgument, "stride must be >= 1");
  require_3d(heatmaps, "heatmaps");
  if (tag_maps.dims() != heatmaps.dims()) {
    fail(ErrorCode::kDimsMismatch, "heatmaps and tag maps differ in shape");
  }
  detection.validate(camera);

  const double half_w = 0.5 * (detection.x_max - detection.x_min) * enlarge_ratio;
  const double half_h = 0.5 * (detection.y_max - detection.y_min) * enlarge_ratio;
  const double x0 = std::max(0.0, detection.center_x() - half_w);
  const double y0 = std::max(0.0, detection.center_y() - half_h);
  const double x1 = std::min<double>(camera.width(), detection.center_x() + half_w);
  const double y1 = std::min<double>(camera.height(), detection.center_y() + half_h);

  const auto map_w = static_cast<double>(heatmaps.dim(2));
  const auto map_h = static_cast<double>(heatmaps.dim(1));
  const double mx0 = std::clamp(std::floor(x0 / stride), 0.0, map_w);
  const double my0 = std::clamp(std::floor(y0 / stride), 0.0, map_h);
  const double mx1 = std::clamp(std::ceil(x1 / stride), 0.0, map_w);
  const double my1 = std::clamp(std::ceil(y1 / stride), 0.0, map_h);
  if (!(x0 < x1 && y0 < y1 && mx0 < mx1 && my0 < my1)) {
    fail(ErrorCode::kOutOfBounds, "detection box has no overlap with the image after clipping");
  }

  const auto cx0 = static_cast<std::size_t>(mx0);
  const auto cy0 = static_cast<std::size_t>(my0);
  const Tensor hm = crop(heatmaps, cy0, static_cast<std::size_t>(my1), cx0,
                         static_cast<std::size_t>(mx1));
  const Tensor tags = crop(tag_maps, cy0, static_cast<std::size_t>(my1), cx0,
                           static_cast<std::size_t>(mx1));
  const auto groups =
      group_by_tags(extract_peaks(hm, tags, params.min_score, params.max_people), params.tag_gap);

  std::vector<Pose2D> out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    Pose2D p = g.pose;
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (!p.visible[k]) continue;
      p.joints[k].x = (p.joints[k].x + mx0) * stride;
      p.joints[k].y = (p.joints[k].y + my0) * stride;
    }
    out.push_back(std::move(p));
  }
  return out;
}

double heatmap_loss(const Tensor& predicted, const Tensor& ground_truth) {
  if (predicted.dims() != ground_truth.dims()) {
    fail(ErrorCode::kDimsMismatch, "heatmap_loss operands differ in shape");
  }
  if (predicted.size() == 0) fail(ErrorCode::kEmptyInput, "heatmap_loss of empty tensors");
  const auto a = predicted.data();
  const auto b = ground_truth.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

double depth_loss(const Tensor& depth_maps, std::span<const std::vector<Point2>> locations,
                  std::span<const std::vector<double>> gt_depths) {
  require_3d(depth_maps, "depth maps");
  if (locations.size() != gt_depths.size()) {
    fail(ErrorCode::kDimsMismatch, "depth_loss needs one location row per ground-truth row");
  }
  if (locations.empty()) fail(ErrorCode::kEmptyInput, "depth_loss with no persons");
  const std::size_t k_count = depth_maps.dim(0);
  double sum = 0.0;
  for (std::size_t n = 0; n < locations.size(); ++n) {
    if (locations[n].size() != k_count || gt_depths[n].size() != k_count) {
      fail(ErrorCode::kDimsMismatch, "depth_loss rows must have K entries");
    }
    for (std::size_t k = 0; k < k_count; ++k) {
      const auto [v, u] = map_pixel(locations[n][k], 1, depth_maps.dim(2), depth_maps.dim(1), k);
      const double d = static_cast<double>(depth_maps.at(k, v, u)) - gt_depths[n][k];
      sum += d * d;
    }
  }
  return sum / static_cast<double>(locations.size() * k_count);
}

}  // namespace posefuse
