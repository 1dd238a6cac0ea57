// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "posefuse/error.hpp"
#include "posefuse/json_io.hpp"
#include "posefuse/skeleton.hpp"
#include "posefuse/tensor_io.hpp"

using namespace posefuse;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIo;
}

std::vector<std::uint8_t> header(const char* magic, std::uint32_t version, std::uint32_t dtype,
                                 std::vector<std::uint32_t> dims) {
  std::vector<std::uint8_t> out(magic, magic + 4);
  const auto put = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  put(version);
  put(dtype);
  put(static_cast<std::uint32_t>(dims.size()));
  for (auto d : dims) put(d);
  return out;
}

fs::path temp_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / ("posefuse_test_" + std::string(name));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("hop distance: identity, direct edge and chain") {
  const Skeleton s = Skeleton::default_skeleton();
  const int pelvis = static_cast<int>(*s.index_of("pelvis"));
  const int hip = static_cast<int>(*s.index_of("l_hip"));
  const int knee = static_cast<int>(*s.index_of("l_knee"));
  CHECK(s.hop_distance(pelvis, pelvis) == 0);
  CHECK(s.hop_distance(pelvis, hip) == 1);
  CHECK(s.hop_distance(pelvis, knee) == 2);
  CHECK(code_of([&] { s.hop_distance(0, 16); }) == ErrorCode::kIndexOutOfRange);
  CHECK(code_of([&] { s.hop_distance(-1, 0); }) == ErrorCode::kIndexOutOfRange);
}

TEST_CASE("hop distance matches a BFS oracle on random trees") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 64)(rng);
    const int root = std::uniform_int_distribution<int>(0, n - 1)(rng);
    // random tree: shuffle labels, attach each node to an earlier one
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::swap(order[0], order[root]);
    std::shuffle(order.begin() + 1, order.end(), rng);
    std::vector<int> parent(n);
    parent[order[0]] = order[0];
    for (int i = 1; i < n; ++i) {
      parent[order[i]] = order[std::uniform_int_distribution<int>(0, i - 1)(rng)];
    }
    std::vector<JointSpec> joints;
    for (int k = 0; k < n; ++k) joints.push_back({"j" + std::to_string(k), parent[k], {}});
    const Skeleton s(joints, root);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const int h = s.hop_distance(i, j);
        REQUIRE(h == oracle::bfs_hops(parent, i, j));
        REQUIRE(h == s.hop_distance(j, i));
        // path additivity along the ancestor chain of j
        if (parent[j] != j) REQUIRE(s.hop_distance(i, j) <= s.hop_distance(i, parent[j]) + 1);
      }
      REQUIRE(s.hop_distance(i, root) + s.hop_distance(root, i) == 2 * s.hop_distance(i, root));
    }
    // topological order puts parents first
    std::vector<int> pos(n);
    for (int i = 0; i < n; ++i) pos[s.topological_order()[i]] = i;
    for (int k = 0; k < n; ++k) {
      if (k != root) CHECK(pos[parent[k]] < pos[k]);
    }
  }
}

TEST_CASE("skeleton validation") {
  CHECK(code_of([] { Skeleton({}, 0); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { Skeleton({{"a", 1, {}}, {"b", 0, {}}}, 0); }) ==
        ErrorCode::kInvalidArgument);  // root not its own parent
  CHECK(code_of([] { Skeleton({{"a", 0, {}}, {"b", 1, {}}}, 0); }) ==
        ErrorCode::kInvalidArgument);  // second root
  CHECK(code_of([] { Skeleton({{"a", 0, {}}, {"b", 2, {}}, {"c", 1, {}}}, 0); }) ==
        ErrorCode::kInvalidArgument);  // cycle b <-> c
  std::vector<JointSpec> many;
  for (int k = 0; k < 65; ++k) many.push_back({"j", 0, {}});
  CHECK(code_of([&] { Skeleton(many, 0); }) == ErrorCode::kInvalidArgument);
  CHECK(Skeleton::default_skeleton().joint_count() == 16);
}

TEST_CASE("tensor round trip: small and empty") {
  const Tensor t({2, 3}, std::vector<float>{1, 2, 3, 4, 5, 6});
  CHECK(decode_tensor(encode_tensor(t)) == t);
  const Tensor empty({0});
  const Tensor back = decode_tensor(encode_tensor(empty));
  CHECK(back.dims() == std::vector<std::size_t>{0});
  CHECK(back.size() == 0);
}

TEST_CASE("tensor round trip is bit exact on random tensors") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::uint32_t> bits;
  for (int trial = 0; trial < 120; ++trial) {
    const auto ndim = std::uniform_int_distribution<std::size_t>(0, 4)(rng);
    std::vector<std::size_t> dims;
    for (std::size_t d = 0; d < ndim; ++d) dims.push_back(std::uniform_int_distribution<std::size_t>(0, 6)(rng));
    Tensor t(dims);
    for (float& f : t.data()) {
      const std::uint32_t b = bits(rng);
      std::memcpy(&f, &b, 4);  // any bit pattern, NaN payloads included
    }
    const Tensor back = decode_tensor(encode_tensor(t));
    REQUIRE(back.dims() == t.dims());
    REQUIRE(std::memcmp(back.data().data(), t.data().data(), 4 * t.size()) == 0);
  }
}

TEST_CASE("tensor decode errors are distinct") {
  auto good = header("PTNS", 1, 0, {2});
  good.resize(good.size() + 8, 0);
  CHECK_NOTHROW(decode_tensor(good));

  auto bad_magic = good;
  std::memcpy(bad_magic.data(), "XXXX", 4);
  CHECK(code_of([&] { decode_tensor(bad_magic); }) == ErrorCode::kBadMagic);

  auto bad_version = header("PTNS", 2, 0, {2});
  bad_version.resize(bad_version.size() + 8, 0);
  CHECK(code_of([&] { decode_tensor(bad_version); }) == ErrorCode::kBadVersion);

  auto bad_dtype = header("PTNS", 1, 7, {2});
  bad_dtype.resize(bad_dtype.size() + 8, 0);
  CHECK(code_of([&] { decode_tensor(bad_dtype); }) == ErrorCode::kBadDtype);

  CHECK(code_of([&] { decode_tensor(header("PTNS", 1, 0, {1, 1, 1, 1, 1})); }) ==
        ErrorCode::kDimOverflow);
  CHECK(code_of([&] { decode_tensor(header("PTNS", 1, 0, {0xFFFFFFFFu, 0xFFFFFFFFu, 0xFFFFFFFFu})); }) ==
        ErrorCode::kDimOverflow);

  auto truncated = good;
  truncated.pop_back();
  CHECK(code_of([&] { decode_tensor(truncated); }) == ErrorCode::kTruncatedPayload);
  CHECK(code_of([&] { decode_tensor(std::vector<std::uint8_t>{'P', 'T', 'N', 'S', 1}); }) ==
        ErrorCode::kTruncatedPayload);

  auto trailing = good;
  trailing.push_back(0);
  CHECK(code_of([&] { decode_tensor(trailing); }) == ErrorCode::kTrailingBytes);
}

TEST_CASE("tensor file io names the path") {
  const fs::path dir = temp_dir("tensor_io");
  const Tensor t({2, 2}, std::vector<float>{1.5f, -2.0f, 0.0f, 3.25f});
  write_tensor(dir / "a.ptns", t);
  CHECK(read_tensor(dir / "a.ptns") == t);
  try {
    read_tensor(dir / "missing.ptns");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
    CHECK(std::string(e.what()).find("missing.ptns") != std::string::npos);
  }
}

TEST_CASE("tensor shape invariants") {
  CHECK(code_of([] { Tensor({1, 1, 1, 1, 1}); }) == ErrorCode::kDimOverflow);
  CHECK(code_of([] { Tensor({2, 2}, std::vector<float>{1, 2, 3}); }) == ErrorCode::kDimsMismatch);
}

TEST_CASE("camera intrinsics validation") {
  CHECK_NOTHROW(CameraIntrinsics::make(1000, 1000, 960, 540, 1920, 1080));
  CHECK(code_of([] { CameraIntrinsics::make(0, 1000, 960, 540, 1920, 1080); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(code_of([] { CameraIntrinsics::make(1000, 1000, 1920, 540, 1920, 1080); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(code_of([] { CameraIntrinsics::make(1000, 1000, 960, -1, 1920, 1080); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("pose invariants") {
  Pose3D p = Pose3D::empty(2);
  p.joints = {{0, 0, 100}, {0, 0, -5}};
  p.confidence = {1.0, 0.0};
  CHECK_NOTHROW(p.validate());  // absent joint may sit behind the camera
  p.confidence[1] = 0.5;
  CHECK(code_of([&] { p.validate(); }) == ErrorCode::kNonPositiveDepth);
  Pose2D q = Pose2D::empty(1);
  q.confidence = {0.5};
  CHECK(code_of([&] { q.validate(); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("json round trips") {
  const Skeleton s = Skeleton::default_skeleton();
  CHECK(skeleton_from_json(skeleton_to_json(s)) == s);

  const auto cam = CameraIntrinsics::make(1200, 1100, 640, 360, 1280, 720);
  CHECK(camera_from_json(camera_to_json(cam)) == cam);

  std::mt19937_64 rng(2);
  std::vector<Pose3D> poses{oracle::random_pose(rng, 4), oracle::random_pose(rng, 4)};
  poses[1].person_id = 7;
  CHECK(pose_set_from_json(pose_set_to_json(poses)) == poses);

  MatchResult m;
  m.pairs = {{0, 1, 3.5}};
  m.unmatched_bu = {1};
  m.unmatched_td = {0};
  CHECK(match_result_from_json(match_result_to_json(m)) == m);

  const std::vector<Detection> dets{{1, 2, 30, 40, 0.5}};
  CHECK(detections_from_json(detections_to_json(dets)) == dets);
}

TEST_CASE("skeleton json accepts index parents") {
  const json j = json::parse(R"({"root": 0, "joints": [
      {"name": "pelvis", "parent": 0}, {"name": "hip", "parent": "pelvis"},
      {"name": "knee", "parent": 1}]})");
  const Skeleton s = skeleton_from_json(j);
  CHECK(s.hop_distance(0, 2) == 2);
  CHECK(code_of([] { skeleton_from_json(json::parse(R"({"root": 0, "joints": [{"name": "a", "parent": "zz"}]})")); }) ==
        ErrorCode::kParse);
}

TEST_CASE("canonical json formatting") {
  const json j = {{"b", 1.0}, {"a", json::array({1, 0.5, -0.0000001})}, {"c", nullptr}};
  CHECK(dump_canonical(j) == "{\"a\":[1,0.500000,0.000000],\"b\":1.000000,\"c\":null}\n");
}

TEST_CASE("manifest round trip resolves relative paths") {
  const fs::path dir = temp_dir("manifest");
  SceneManifest m;
  m.sequence_id = "TS3";
  m.frame_index = 12;
  m.stride = 4;
  m.heatmaps = dir / "f.hm.ptns";
  m.tag_maps = dir / "f.tag.ptns";
  m.root_depth = dir / "f.rootd.ptns";
  m.rel_depth = dir / "f.reld.ptns";
  m.gt_poses = dir / "f.gt.json";
  save_manifest(dir / "m.json", m);
  const json raw = read_json(dir / "m.json");
  CHECK(raw.at("heatmaps") == "f.hm.ptns");
  const SceneManifest back = load_manifest(dir / "m.json");
  CHECK(back.heatmaps == m.heatmaps);
  CHECK(back.td_poses.empty());
  CHECK(back.frame_id() == "TS3_000012");
  CHECK(code_of([&] { load_manifest(dir / "nope.json"); }) == ErrorCode::kIo);
}

TEST_CASE("atomic writes leave no temporary file") {
  const fs::path dir = temp_dir("atomic");
  write_file_atomic(dir / "x.txt", "hello");
  CHECK(read_text_file(dir / "x.txt") == "hello");
  write_file_atomic(dir / "x.txt", "again");
  CHECK(read_text_file(dir / "x.txt") == "again");
  CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator()) == 1);
}
