// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "posefuse/decode.hpp"
#include "posefuse/error.hpp"
#include "posefuse/fuse.hpp"
#include "posefuse/json_io.hpp"
#include "posefuse/match.hpp"
#include "posefuse/metrics.hpp"
#include "posefuse/skeleton.hpp"

namespace posefuse {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitDataError = 2,
  kExitPartial = 3,
};

struct PipelineConfig {
  DecodeParams decode;
  MatchParams match;
  FuseStrategy strategy = FuseStrategy::kHard;
  std::optional<MlpWeights> weights;
  MetricConfig metrics;  // root_index is taken from each frame's skeleton
  int threads = 1;
  bool keep_going = false;
  std::filesystem::path out_dir;  // empty: no per-frame files
};

struct FrameData {
  std::string frame_id;
  std::string sequence_id;
  std::uint64_t frame_order = 0;
  CameraIntrinsics camera;
  Skeleton skeleton = Skeleton::default_skeleton();
  BottomUpMaps maps;
  std::vector<Pose3D> td;
  std::vector<Pose3D> gt;
};

struct FrameOutput {
  std::vector<Pose3D> bu;
  MatchResult matches;
  std::vector<Pose3D> fused;
  MetricCounts counts;
};

FrameData load_frame(const SceneManifest& manifest, std::uint64_t frame_order);

/// decode -> match -> fuse -> eval on one frame. Exceptions are rethrown as
/// StageError naming the stage.
FrameOutput process_frame(const FrameData& frame, const PipelineConfig& config);

class StageError : public Error {
 public:
  StageError(ErrorCode code, std::string frame_id, std::string stage, const std::string& what)
      : Error(code, "frame " + frame_id + ", stage " + stage + ": " + what),
        frame_id_(std::move(frame_id)),
        stage_(std::move(stage)) {}

  const std::string& frame_id() const { return frame_id_; }
  const std::string& stage() const { return stage_; }

 private:
  std::string frame_id_;
  std::string stage_;
};

struct FrameFailure {
  std::string frame_id;
  std::string stage;
  std::string message;
};

struct PipelineResult {
  int exit_code = kExitOk;
  MetricReport report;
  std::vector<FrameFailure> failures;
  std::size_t frames_ok = 0;
};

/// Runs every manifest on a bounded worker pool, reduces per-frame counts in
/// manifest order, and writes <out>/report.json last.
PipelineResult run_pipeline(std::span<const std::filesystem::path> manifests,
                            const PipelineConfig& config);

/// A positive POSEFUSE_THREADS wins; otherwise requested when > 0; otherwise 1.
int resolve_thread_count(int requested);

}  // namespace posefuse
