// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "posefuse/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "posefuse/tensor_io.hpp"

namespace posefuse {

namespace fs = std::filesystem;

namespace {

template <typename F>
auto run_stage(const std::string& frame_id, const char* stage, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(e.code(), frame_id, stage, e.what());
  } catch (const std::exception& e) {
    throw StageError(ErrorCode::kInvalidArgument, frame_id, stage, e.what());
  }
}

SequenceBreakdown breakdown_of(const MetricCounts& c) {
  SequenceBreakdown s;
  s.joints = c.pck_total;
  s.persons = c.persons_gt;
  if (c.pck_total > 0) {
    s.pck = 100.0 * static_cast<double>(c.pck_correct) / static_cast<double>(c.pck_total);
    s.pck_abs = 100.0 * static_cast<double>(c.pck_abs_correct) / static_cast<double>(c.pck_total);
  }
  return s;
}

void write_frame_outputs(const fs::path& dir, const std::string& frame_id,
                         const FrameOutput& out) {
  write_json(dir / (frame_id + ".bu.json"), pose_set_to_json(out.bu));
  write_json(dir / (frame_id + ".match.json"), match_result_to_json(out.matches));
  write_json(dir / (frame_id + ".fused.json"), pose_set_to_json(out.fused));
}

}  // namespace

FrameData load_frame(const SceneManifest& m, std::uint64_t frame_order) {
  const std::string id = m.frame_id();
  return run_stage(id, "load", [&] {
    FrameData f;
    f.frame_id = id;
    f.sequence_id = m.sequence_id;
    f.frame_order = frame_order;
    f.camera = m.camera;
    if (!m.skeleton.empty()) f.skeleton = skeleton_from_json(read_json(m.skeleton));
    f.maps.joint_heatmaps = read_tensor(m.heatmaps);
    f.maps.tag_maps = read_tensor(m.tag_maps);
    f.maps.root_depth = read_tensor(m.root_depth);
    f.maps.rel_depth = read_tensor(m.rel_depth);
    f.maps.stride = m.stride;
    f.maps.validate();
    if (f.maps.joint_count() != f.skeleton.joint_count()) {
      fail(ErrorCode::kDimsMismatch, "heatmaps have " + std::to_string(f.maps.joint_count()) +
                                         " channels, skeleton has " +
                                         std::to_string(f.skeleton.joint_count()) + " joints");
    }
    if (!m.td_poses.empty()) f.td = pose_set_from_json(read_json(m.td_poses));
    if (!m.gt_poses.empty()) f.gt = pose_set_from_json(read_json(m.gt_poses));
    for (const auto* set : {&f.td, &f.gt}) {
      for (const Pose3D& p : *set) {
        if (p.size() != f.skeleton.joint_count()) {
          fail(ErrorCode::kDimsMismatch, "pose joint count disagrees with the skeleton");
        }
      }
    }
    return f;
  });
}

FrameOutput process_frame(const FrameData& frame, const PipelineConfig& config) {
  const int root = frame.skeleton.root_index();
  FrameOutput out;
  out.bu = run_stage(frame.frame_id, "decode", [&] {
    return decode_bottom_up(frame.maps, frame.camera, frame.skeleton, config.decode);
  });
  out.matches = run_stage(frame.frame_id, "match", [&] {
    return match_pose_sets(out.bu, frame.td, config.match);
  });
  out.fused = run_stage(frame.frame_id, "fuse", [&] {
    const MlpWeights* weights = config.weights ? &*config.weights : nullptr;
    return fuse_matches(out.bu, frame.td, out.matches, config.strategy, root, weights);
  });
  out.counts = run_stage(frame.frame_id, "eval", [&] {
    MetricConfig mc = config.metrics;
    mc.root_index = root;
    if (mc.pairing.mode == PairingMode::kOks2d && !mc.pairing.camera) {
      mc.pairing.camera = frame.camera;
    }
    return evaluate_frame(out.fused, frame.gt, mc, frame.frame_order);
  });
  return out;
}

int resolve_thread_count(int requested) {
  if (const char* env = std::getenv("POSEFUSE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 256L));
  }
  return requested > 0 ? requested : 1;
}

PipelineResult run_pipeline(std::span<const fs::path> manifests, const PipelineConfig& config) {
  if (manifests.empty()) fail(ErrorCode::kEmptyInput, "no manifests given");
  if (!config.out_dir.empty()) fs::create_directories(config.out_dir);

  const std::size_t n = manifests.size();
  std::vector<std::optional<MetricCounts>> counts(n);
  std::vector<std::string> sequence_of(n);
  std::vector<std::optional<FrameFailure>> failures(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || stop.load()) return;
      std::string frame_id = manifests[i].string();
      try {
        const SceneManifest m = run_stage(frame_id, "load", [&] { return load_manifest(manifests[i]); });
        frame_id = m.frame_id();
        const FrameData frame = load_frame(m, i);
        FrameOutput out = process_frame(frame, config);
        if (!config.out_dir.empty()) {
          run_stage(frame_id, "write", [&] {
            write_frame_outputs(config.out_dir, frame_id, out);
            return 0;
          });
        }
        sequence_of[i] = frame.sequence_id;
        counts[i] = std::move(out.counts);
      } catch (const StageError& e) {
        failures[i] = FrameFailure{e.frame_id(), e.stage(), e.what()};
        if (!config.keep_going) stop.store(true);
      }
    }
  };

  const int threads = std::min<int>(resolve_thread_count(config.threads), static_cast<int>(n));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  PipelineResult result;
  MetricCounts total;
  std::map<std::string, MetricCounts> per_sequence;
  for (std::size_t i = 0; i < n; ++i) {
    if (failures[i]) result.failures.push_back(*failures[i]);
    if (!counts[i]) continue;
    total.merge(*counts[i]);
    per_sequence[sequence_of[i]].merge(*counts[i]);
    ++result.frames_ok;
  }

  if (!result.failures.empty() && !config.keep_going) {
    result.exit_code = kExitDataError;
    return result;
  }

  result.report = finalize_report(total, config.metrics);
  result.report.frames = static_cast<std::int64_t>(result.frames_ok);
  for (const auto& [id, c] : per_sequence) result.report.sequences[id] = breakdown_of(c);
  result.exit_code = result.failures.empty() ? kExitOk : kExitPartial;

  if (!config.out_dir.empty()) {
    json report = metric_report_to_json(result.report);
    json failed = json::array();
    for (const FrameFailure& f : result.failures) {
      failed.push_back({{"frame", f.frame_id}, {"stage", f.stage}, {"message", f.message}});
    }
    report["failures"] = std::move(failed);
    write_json(config.out_dir / "report.json", report);
  }
  return result;
}

}  // namespace posefuse
