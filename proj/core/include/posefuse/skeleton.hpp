// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "posefuse/types.hpp"

namespace posefuse {

/// Limb prior used by the synthetic scene generator. The direction is the
/// rest-pose unit vector from parent to child in a person frame with +y
/// pointing down (camera convention) and +x toward the person's left.
struct BonePrior {
  double min_length_mm = 0.0;
  double max_length_mm = 0.0;
  Point3 direction;

  friend bool operator==(const BonePrior&, const BonePrior&) = default;
};

struct JointSpec {
  std::string name;
  int parent = 0;
  std::optional<BonePrior> bone;

  friend bool operator==(const JointSpec&, const JointSpec&) = default;
};

/// Joint tree. parent[root] == root; every other joint reaches the root by
/// following parents. Construction validates the tree and precomputes hop
/// distances for all joint pairs.
class Skeleton {
 public:
  static constexpr std::size_t kMaxJoints = 64;

  Skeleton(std::vector<JointSpec> joints, int root_index);

  /// 16-joint default: head_top, neck, shoulders, elbows, wrists, hips,
  /// knees, ankles, spine, pelvis (root).
  static Skeleton default_skeleton();

  std::size_t joint_count() const { return joints_.size(); }
  int root_index() const { return root_; }
  const std::vector<JointSpec>& joints() const { return joints_; }
  const std::string& name(std::size_t k) const { return joints_.at(k).name; }
  int parent(std::size_t k) const { return joints_.at(k).parent; }
  std::optional<std::size_t> index_of(const std::string& name) const;

  /// Number of edges on the tree path between joints i and j.
  int hop_distance(int i, int j) const;

  /// Joints ordered so every parent precedes its children.
  const std::vector<int>& topological_order() const { return topo_order_; }

  friend bool operator==(const Skeleton& a, const Skeleton& b) {
    return a.root_ == b.root_ && a.joints_ == b.joints_;
  }

 private:
  std::vector<JointSpec> joints_;
  int root_;
  std::vector<int> hops_;
  std::vector<int> topo_order_;
};

}  // namespace posefuse
