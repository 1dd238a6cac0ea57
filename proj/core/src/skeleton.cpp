// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "posefuse/skeleton.hpp"

#include <algorithm>
#include <cmath>

#include "posefuse/error.hpp"

namespace posefuse {

namespace {

BonePrior bone(double lo, double hi, Point3 dir) {
  const double n = norm(dir);
  return BonePrior{lo, hi, (1.0 / n) * dir};
}

}  // namespace

Skeleton::Skeleton(std::vector<JointSpec> joints, int root_index)
    : joints_(std::move(joints)), root_(root_index) {
  const auto k = static_cast<int>(joints_.size());
  if (k < 1 || joints_.size() > kMaxJoints) {
    fail(ErrorCode::kInvalidArgument,
         "skeleton joint count must be in [1, 64], got " + std::to_string(k));
  }
  if (root_ < 0 || root_ >= k) {
    fail(ErrorCode::kInvalidArgument, "skeleton root index out of range");
  }
  if (joints_[root_].parent != root_) {
    fail(ErrorCode::kInvalidArgument, "skeleton root must be its own parent");
  }
  for (int j = 0; j < k; ++j) {
    const int p = joints_[j].parent;
    if (p < 0 || p >= k) {
      fail(ErrorCode::kInvalidArgument,
           "joint '" + joints_[j].name + "' has parent index out of range");
    }
    if (p == j && j != root_) {
      fail(ErrorCode::kInvalidArgument,
           "joint '" + joints_[j].name + "' is a second root");
    }
  }

  // Depth by walking to the root; a walk longer than K steps means a cycle.
  std::vector<int> depth(k, -1);
  depth[root_] = 0;
  for (int j = 0; j < k; ++j) {
    std::vector<int> chain;
    int cur = j;
    while (depth[cur] < 0) {
      chain.push_back(cur);
      cur = joints_[cur].parent;
      if (static_cast<int>(chain.size()) > k) {
        fail(ErrorCode::kInvalidArgument, "skeleton parent links contain a cycle");
      }
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      depth[*it] = depth[joints_[*it].parent] + 1;
    }
  }

  hops_.assign(static_cast<std::size_t>(k * k), 0);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      int a = i;
      int b = j;
      int steps = 0;
      while (a != b) {
        if (depth[a] >= depth[b]) {
          a = joints_[a].parent;
        } else {
          b = joints_[b].parent;
        }
        ++steps;
      }
      hops_[i * k + j] = steps;
    }
  }

  topo_order_.resize(k);
  for (int j = 0; j < k; ++j) topo_order_[j] = j;
  std::stable_sort(topo_order_.begin(), topo_order_.end(),
                   [&](int a, int b) { return depth[a] < depth[b]; });
}

Skeleton Skeleton::default_skeleton() {
  constexpr int kPelvis = 15;
  constexpr int kSpine = 14;
  // Person frame: +y down, +x toward the person's left, +z away from camera.
  std::vector<JointSpec> j = {
      {"head_top", 1, bone(180, 240, {0, -1, 0})},
      {"neck", kSpine, bone(220, 300, {0, -1, 0})},
      {"l_shoulder", 1, bone(150, 210, {1, 0.15, 0})},
      {"r_shoulder", 1, bone(150, 210, {-1, 0.15, 0})},
      {"l_elbow", 2, bone(250, 330, {0.2, 1, 0})},
      {"r_elbow", 3, bone(250, 330, {-0.2, 1, 0})},
      {"l_wrist", 4, bone(220, 290, {0.1, 1, -0.2})},
      {"r_wrist", 5, bone(220, 290, {-0.1, 1, -0.2})},
      {"l_hip", kPelvis, bone(90, 140, {1, 0.2, 0})},
      {"r_hip", kPelvis, bone(90, 140, {-1, 0.2, 0})},
      {"l_knee", 8, bone(380, 470, {0, 1, 0})},
      {"r_knee", 9, bone(380, 470, {0, 1, 0})},
      {"l_ankle", 10, bone(360, 450, {0, 1, 0.05})},
      {"r_ankle", 11, bone(360, 450, {0, 1, 0.05})},
      {"spine", kPelvis, bone(180, 260, {0, -1, 0})},
      {"pelvis", kPelvis, std::nullopt},
  };
  return Skeleton(std::move(j), kPelvis);
}

std::optional<std::size_t> Skeleton::index_of(const std::string& name) const {
  for (std::size_t k = 0; k < joints_.size(); ++k) {
    if (joints_[k].name == name) return k;
  }
  return std::nullopt;
}

int Skeleton::hop_distance(int i, int j) const {
  const auto k = static_cast<int>(joints_.size());
  if (i < 0 || i >= k || j < 0 || j >= k) {
    fail(ErrorCode::kIndexOutOfRange,
         "hop_distance index out of range: (" + std::to_string(i) + ", " +
             std::to_string(j) + ") for K=" + std::to_string(k));
  }
  return hops_[i * k + j];
}

}  // namespace posefuse
