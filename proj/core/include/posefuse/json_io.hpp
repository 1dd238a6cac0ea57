// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "posefuse/fuse.hpp"
#include "posefuse/geometry.hpp"
#include "posefuse/graph.hpp"
#include "posefuse/match.hpp"
#include "posefuse/metrics.hpp"
#include "posefuse/skeleton.hpp"
#include "posefuse/types.hpp"

namespace posefuse {

using json = nlohmann::json;

std::string read_text_file(const std::filesystem::path& path);
/// Write to "<path>.tmp.<pid>" and rename over path.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

json read_json(const std::filesystem::path& path);
/// Objects keep sorted keys; floating values are printed fixed with six
/// decimals.
std::string dump_canonical(const json& value);
void write_json(const std::filesystem::path& path, const json& value);

json camera_to_json(const CameraIntrinsics& camera);
CameraIntrinsics camera_from_json(const json& j);

json skeleton_to_json(const Skeleton& skeleton);
Skeleton skeleton_from_json(const json& j);

json pose3d_to_json(const Pose3D& pose);
Pose3D pose3d_from_json(const json& j);
json pose_set_to_json(const std::vector<Pose3D>& poses);
std::vector<Pose3D> pose_set_from_json(const json& j);

json pose2d_to_json(const Pose2D& pose);
Pose2D pose2d_from_json(const json& j);
json pose2d_set_to_json(const std::vector<Pose2D>& poses);
std::vector<Pose2D> pose2d_set_from_json(const json& j);

json detections_to_json(const std::vector<Detection>& detections);
std::vector<Detection> detections_from_json(const json& j);

json match_result_to_json(const MatchResult& result);
MatchResult match_result_from_json(const json& j);

json metric_report_to_json(const MetricReport& report);
json adjacency_to_json(const Adjacency& adjacency, const Skeleton& skeleton);
json ssl_score_to_json(const SslScore& score);

/// One frame's inputs. Paths are absolute after load_manifest resolves them
/// against the manifest's directory; save_manifest writes them relative.
struct SceneManifest {
  std::string sequence_id = "seq0";
  std::int64_t frame_index = 0;
  CameraIntrinsics camera;
  std::filesystem::path skeleton;
  int stride = 1;
  std::filesystem::path heatmaps;
  std::filesystem::path tag_maps;
  std::filesystem::path root_depth;
  std::filesystem::path rel_depth;
  std::filesystem::path detections;
  std::filesystem::path gt_poses;
  std::filesystem::path td_poses;

  std::string frame_id() const;
};

SceneManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const SceneManifest& manifest);

}  // namespace posefuse
