// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "posefuse/skeleton.hpp"
#include "posefuse/types.hpp"

namespace posefuse {

/// The four bottom-up network outputs for one frame. Maps may be
/// downsampled relative to the image: map pixel (u, v) corresponds to image
/// pixel (u * stride, v * stride).
///
/// rel_depth holds z_k - z_root in millimeters, so z_k = z_root + rel.
struct BottomUpMaps {
  Tensor joint_heatmaps;  // K x H x W, values in [0, 1]
  Tensor tag_maps;        // K x H x W
  Tensor root_depth;      // H x W, millimeters
  Tensor rel_depth;       // K x H x W, millimeters relative to root
  int stride = 1;

  std::size_t joint_count() const { return joint_heatmaps.dim(0); }
  std::size_t height() const { return joint_heatmaps.dim(1); }
  std::size_t width() const { return joint_heatmaps.dim(2); }

  /// Shapes agree and stride >= 1. Heatmap range is not scanned here.
  void validate() const;
};

struct Peak {
  double x = 0.0;  // refined map coordinates
  double y = 0.0;
  int px = 0;      // integer pixel the peak was found at
  int py = 0;
  double score = 0.0;
  double tag = 0.0;
};

/// Candidates per joint, sorted by (score desc, x asc, y asc).
struct PeakSet {
  std::vector<std::vector<Peak>> per_joint;
};

struct GroupedPerson {
  Pose2D pose;  // map coordinates
  double mean_tag = 0.0;
};

struct DecodeParams {
  double min_score = 0.1;
  int max_people = 30;
  double tag_gap = 1.0;
};

PeakSet extract_peaks(const Tensor& heatmaps, const Tensor& tag_maps, double min_score,
                      int max_people);

/// Greedy associative-embedding grouping. Joints are visited in index order;
/// each candidate joins the person (lacking that joint) whose running mean
/// tag is nearest and within tag_gap, otherwise it starts a new person.
std::vector<GroupedPerson> group_by_tags(const PeakSet& peaks, double tag_gap);

/// Lifts a 2D pose (image pixels) to camera space by reading the root depth
/// map at the root joint and the relative depth maps at every other joint.
Pose3D retrieve_depths(const Pose2D& pose, const BottomUpMaps& maps,
                       const CameraIntrinsics& camera, int root_index);

/// Full bottom-up decode: peaks, grouping, stride rescale, depth retrieval.
/// Persons whose root joint was not detected are dropped.
std::vector<Pose3D> decode_bottom_up(const BottomUpMaps& maps, const CameraIntrinsics& camera,
                                     const Skeleton& skeleton, const DecodeParams& params);

/// Groups joints inside an enlarged detection box. Heatmaps and tags are
/// full-frame maps at the given stride; returned poses are in image pixels.
std::vector<Pose2D> decode_topdown(const Tensor& heatmaps, const Tensor& tag_maps,
                                   const Detection& detection, double enlarge_ratio,
                                   const CameraIntrinsics& camera, int stride,
                                   const DecodeParams& params);

/// Mean squared difference over all elements.
double heatmap_loss(const Tensor& predicted, const Tensor& ground_truth);

/// (1/NK) sum_n sum_k |h_k(x_nk, y_nk) - d_nk|^2 over a K x H x W depth
/// tensor. Locations are map pixels, read at the nearest integer pixel.
double depth_loss(const Tensor& depth_maps, std::span<const std::vector<Point2>> locations,
                  std::span<const std::vector<double>> gt_depths);

}  // namespace posefuse
