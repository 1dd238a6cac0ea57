// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "posefuse/decode.hpp"
#include "posefuse/skeleton.hpp"
#include "posefuse/types.hpp"

namespace posefuse {

struct SynthParams {
  double sigma_px = 2.0;  // Gaussian blob sigma in map pixels
  int stride = 4;
  double min_separation_mm = 600.0;
  double min_depth_mm = 2000.0;
  double max_depth_mm = 12000.0;
  double max_limb_angle_rad = std::numbers::pi / 4.0;
  int max_attempts = 1000;  // per person
  double detection_margin = 0.1;
};

struct SyntheticScene {
  CameraIntrinsics camera;
  std::vector<Pose3D> persons;
  BottomUpMaps maps;
  std::vector<Detection> detections;
  std::vector<double> tags;  // per person
  std::uint64_t seed = 0;
};

/// Camera used by the synth CLI and tests unless overridden.
CameraIntrinsics default_synth_camera();

/// Samples n_persons randomized articulations of the skeleton and renders
/// their heatmaps, tags and depth maps. Same-joint blobs of different
/// persons never overlap; their depth and tag discs are disjoint.
SyntheticScene generate_scene(std::uint64_t seed, int n_persons, const CameraIntrinsics& camera,
                              const Skeleton& skeleton, const SynthParams& params = {});

/// Radius in map pixels of the depth/tag discs painted around each joint.
int disc_radius(const SynthParams& params);

struct NoiseParams {
  double td_sigma_mm = 0.0;
  double bu_sigma_mm = 0.0;
  double td_joint_dropout = 0.0;
  double bu_joint_dropout = 0.0;
  double td_person_dropout = 0.0;
  double bu_person_dropout = 0.0;
  std::vector<int> td_drop_persons;
  std::vector<int> bu_drop_persons;
};

struct PerturbedSets {
  std::vector<Pose3D> td;
  std::vector<Pose3D> bu;
};

PerturbedSets perturb_scene(const SyntheticScene& scene, const NoiseParams& noise,
                            std::uint64_t seed);

/// Writes one frame's tensors, detections and pose sets into dir and returns
/// the path of its manifest, <frame_id>.manifest.json.
std::filesystem::path write_scene_frame(const std::filesystem::path& dir,
                                        const SyntheticScene& scene, const PerturbedSets& sets,
                                        const std::string& sequence_id, std::int64_t frame_index,
                                        const std::filesystem::path& skeleton_file);

/// splitmix64 of (base, stream): independent per-frame seeds from one seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace posefuse
