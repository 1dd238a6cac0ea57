// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

// Synthetic frames written to a scratch directory.

#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <system_error>
#include <vector>

#include <unistd.h>

#include "posefuse/json_io.hpp"
#include "posefuse/synth.hpp"

namespace fixture {

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() /
              ("posefuse_" + name + "_" + std::to_string(::getpid()))) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

struct FrameSetOptions {
  std::uint64_t seed = 1;
  int frames = 4;
  int min_persons = 2;
  int max_persons = 6;
  std::string sequence = "seq0";
  posefuse::SynthParams synth;
  posefuse::NoiseParams noise;
};

// Same seeding as the synth CLI: frame t uses derive_seed(seed, t).
inline std::vector<std::filesystem::path> write_frames(const std::filesystem::path& dir,
                                                      const FrameSetOptions& o) {
  using namespace posefuse;
  const Skeleton skeleton = Skeleton::default_skeleton();
  const auto skel_file = dir / "skeleton.json";
  write_json(skel_file, skeleton_to_json(skeleton));
  std::vector<std::filesystem::path> out;
  const int span = o.max_persons - o.min_persons + 1;
  for (int t = 0; t < o.frames; ++t) {
    const std::uint64_t frame_seed = derive_seed(o.seed, static_cast<std::uint64_t>(t));
    const int persons = o.min_persons + static_cast<int>(frame_seed % static_cast<std::uint64_t>(span));
    const auto scene = generate_scene(frame_seed, persons, default_synth_camera(), skeleton, o.synth);
    const auto sets = perturb_scene(scene, o.noise, derive_seed(frame_seed, 1));
    out.push_back(write_scene_frame(dir, scene, sets, o.sequence, t, skel_file));
  }
  return out;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fixture
