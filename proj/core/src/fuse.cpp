// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "posefuse/fuse.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "posefuse/error.hpp"

namespace posefuse {

namespace {

void require_side(const PosePair& pair) {
  if (!pair.td && !pair.bu) fail(ErrorCode::kInvalidArgument, "pose pair has neither side");
  if (pair.td && pair.bu && pair.td->size() != pair.bu->size()) {
    fail(ErrorCode::kDimsMismatch, "pose pair sides disagree on joint count");
  }
}

void zero_pose(Pose3D& pose) {
  std::fill(pose.joints.begin(), pose.joints.end(), Point3{});
  std::fill(pose.confidence.begin(), pose.confidence.end(), 0.0);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> flatten(const Pose3D& pose, const Point3& origin) {
  std::vector<double> out;
  out.reserve(3 * pose.size());
  for (std::size_t k = 0; k < pose.size(); ++k) {
    const Point3 p = pose.joint_present(k) ? pose.joints[k] - origin : Point3{};
    out.insert(out.end(), {p.x, p.y, p.z});
  }
  return out;
}

}  // namespace

Pose3D hard_fuse(const PosePair& pair, int root_index) {
  require_side(pair);
  if (!pair.bu) return *pair.td;
  if (!pair.td) return *pair.bu;
  const Pose3D& td = *pair.td;
  const Pose3D& bu = *pair.bu;
  if (root_index < 0 || static_cast<std::size_t>(root_index) >= td.size()) {
    fail(ErrorCode::kIndexOutOfRange, "root index out of range");
  }
  // Without both roots there is no depth to transfer.
  if (!td.joint_present(root_index) || !bu.joint_present(root_index)) return td;

  const Point3& td_root = td.joints[root_index];
  const double z = bu.joints[root_index].z;
  const double ratio = z / td_root.z;
  const Point3 root{td_root.x * ratio, td_root.y * ratio, z};

  Pose3D out = td;
  for (std::size_t k = 0; k < td.size(); ++k) {
    if (!td.joint_present(k)) continue;
    out.joints[k] = static_cast<int>(k) == root_index ? root : root + (td.joints[k] - td_root);
  }
  return out;
}

Pose3D linear_fuse(const PosePair& pair) {
  require_side(pair);
  if (!pair.bu) return *pair.td;
  if (!pair.td) return *pair.bu;
  const Pose3D& td = *pair.td;
  const Pose3D& bu = *pair.bu;

  Pose3D out = td;
  if (!out.person_id) out.person_id = bu.person_id;
  for (std::size_t k = 0; k < td.size(); ++k) {
    const double ct = td.confidence[k];
    const double cb = bu.confidence[k];
    if (cb == 0.0) {
      out.joints[k] = td.joints[k];
    } else if (ct == 0.0) {
      out.joints[k] = bu.joints[k];
    } else {
      // td + w (bu - td) is exact for identical sides and stays on the segment
      out.joints[k] = td.joints[k] + (cb / (ct + cb)) * (bu.joints[k] - td.joints[k]);
    }
    out.confidence[k] = std::max(ct, cb);
  }
  return out;
}

std::vector<double> integration_input(const PosePair& pair, std::size_t joint_count,
                                      bool include_similarity) {
  require_side(pair);
  std::vector<double> input;
  input.reserve(8 * joint_count + 1);
  for (const auto* side : {&pair.td, &pair.bu}) {
    if (side->has_value() && (*side)->size() != joint_count) {
      fail(ErrorCode::kDimsMismatch, "pose joint count does not match the network layout");
    }
    for (std::size_t k = 0; k < joint_count; ++k) {
      const Point3 p = side->has_value() ? (**side).joints[k] : Point3{};
      input.insert(input.end(), {p.x, p.y, p.z});
    }
    for (std::size_t k = 0; k < joint_count; ++k) {
      input.push_back(side->has_value() ? (**side).confidence[k] : 0.0);
    }
  }
  if (include_similarity) input.push_back(pair.similarity);
  return input;
}

Pose3D learned_fuse(const PosePair& pair, const MlpWeights& weights, int root_index,
                    bool include_similarity) {
  require_side(pair);
  const std::size_t k_count = pair.td ? pair.td->size() : pair.bu->size();
  Pose3D out = hard_fuse(pair, root_index);
  const auto residual = mlp_forward(weights, integration_input(pair, k_count, include_similarity));
  if (residual.size() != 3 * k_count) {
    fail(ErrorCode::kDimsMismatch, "integration network must output 3K values");
  }
  for (std::size_t k = 0; k < k_count; ++k) {
    if (!out.joint_present(k)) continue;
    out.joints[k] += Point3{residual[3 * k], residual[3 * k + 1], residual[3 * k + 2]};
  }
  return out;
}

double integration_loss(const Pose3D& predicted, const Pose3D& ground_truth) {
  if (predicted.size() != ground_truth.size()) {
    fail(ErrorCode::kDimsMismatch, "integration_loss poses disagree on joint count");
  }
  if (predicted.size() == 0) fail(ErrorCode::kEmptyInput, "integration_loss of empty poses");
  double sum = 0.0;
  for (std::size_t k = 0; k < predicted.size(); ++k) {
    sum += squared_norm(predicted.joints[k] - ground_truth.joints[k]);
  }
  return sum / static_cast<double>(predicted.size());
}

PosePair augment_pair(const PosePair& pair, std::uint64_t rng_seed, const AugmentParams& params) {
  require_side(pair);
  const auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in_unit(params.mask_probability) || !in_unit(params.zeroing_probability)) {
    fail(ErrorCode::kInvalidArgument, "augmentation probabilities must lie in [0, 1]");
  }
  if (params.shift_sigma_mm.x < 0.0 || params.shift_sigma_mm.y < 0.0 ||
      params.shift_sigma_mm.z < 0.0) {
    fail(ErrorCode::kInvalidArgument, "shift sigma must be non-negative");
  }

  std::mt19937_64 rng(rng_seed);
  PosePair out = pair;

  // Zeroing needs both sides and leaves exactly one all-zero side.
  std::optional<Pose3D>* zeroed = nullptr;
  std::optional<Pose3D>* survivor = nullptr;
  if (out.td && out.bu && std::bernoulli_distribution(params.zeroing_probability)(rng)) {
    const bool zero_td = std::bernoulli_distribution(0.5)(rng);
    zeroed = zero_td ? &out.td : &out.bu;
    survivor = zero_td ? &out.bu : &out.td;
    zero_pose(**zeroed);
  }

  std::bernoulli_distribution mask(params.mask_probability);
  for (auto* side : {&out.td, &out.bu}) {
    if (!side->has_value() || side == zeroed) continue;
    Pose3D& pose = **side;
    const Pose3D original = pose;
    for (std::size_t k = 0; k < pose.size(); ++k) {
      if (!pose.joint_present(k)) continue;
      if (mask(rng)) {
        pose.joints[k] = Point3{};
        pose.confidence[k] = 0.0;
      }
    }
    if (side == survivor && std::none_of(pose.confidence.begin(), pose.confidence.end(),
                                         [](double c) { return c > 0.0; })) {
      const auto best = std::max_element(original.confidence.begin(), original.confidence.end());
      const auto k = static_cast<std::size_t>(best - original.confidence.begin());
      pose.joints[k] = original.joints[k];
      pose.confidence[k] = original.confidence[k];
    }
  }

  const double sigmas[3] = {params.shift_sigma_mm.x, params.shift_sigma_mm.y,
                            params.shift_sigma_mm.z};
  for (auto* side : {&out.td, &out.bu}) {
    if (!side->has_value() || side == zeroed) continue;
    Pose3D& pose = **side;
    for (std::size_t k = 0; k < pose.size(); ++k) {
      if (!pose.joint_present(k)) continue;
      double* axes[3] = {&pose.joints[k].x, &pose.joints[k].y, &pose.joints[k].z};
      for (int a = 0; a < 3; ++a) {
        if (sigmas[a] > 0.0) *axes[a] += std::normal_distribution<double>(0.0, sigmas[a])(rng);
      }
    }
  }
  return out;
}

double discriminator_score(const PoseScorer& d1, const PairScorer& d2, const Pose3D& pose_a,
                           const Pose3D& pose_b) {
  const auto checked = [](double v, const char* which) {
    if (!(v >= 0.0 && v <= 1.0)) {
      fail(ErrorCode::kContractViolation,
           std::string(which) + " returned " + std::to_string(v) + ", outside [0, 1]");
    }
    return v;
  };
  const double a = checked(d1(pose_a), "D1");
  const double b = checked(d1(pose_b), "D1");
  const double pair = checked(d2(pose_a, pose_b), "D2");
  return 0.25 * (a + b) + 0.5 * pair;
}

double discriminator_loss(double c_real, double c_fake) {
  if (!(c_real > 0.0 && c_real <= 1.0)) {
    fail(ErrorCode::kDomain, "C_real must lie in (0, 1]");
  }
  if (!(c_fake >= 0.0 && c_fake < 1.0)) {
    fail(ErrorCode::kDomain, "C_fake must lie in [0, 1)");
  }
  return std::log(c_real) + std::log(1.0 - c_fake);
}

PoseScorer make_single_pose_scorer(MlpWeights weights, int root_index) {
  weights.validate();
  return [w = std::move(weights), root_index](const Pose3D& pose) {
    if (root_index < 0 || static_cast<std::size_t>(root_index) >= pose.size()) {
      fail(ErrorCode::kIndexOutOfRange, "root index out of range");
    }
    const auto out = mlp_forward(w, flatten(pose, pose.joints[root_index]));
    return sigmoid(out.at(0));
  };
}

PairScorer make_pair_scorer(MlpWeights weights) {
  weights.validate();
  return [w = std::move(weights)](const Pose3D& a, const Pose3D& b) {
    auto input = flatten(a, Point3{});
    const auto rest = flatten(b, Point3{});
    input.insert(input.end(), rest.begin(), rest.end());
    return sigmoid(mlp_forward(w, input).at(0));
  };
}

std::vector<Pose3D> fuse_matches(std::span<const Pose3D> bu, std::span<const Pose3D> td,
                                 const MatchResult& matches, FuseStrategy strategy,
                                 int root_index, const MlpWeights* weights) {
  if (strategy == FuseStrategy::kMlp && weights == nullptr) {
    fail(ErrorCode::kInvalidArgument, "mlp fusion needs integration weights");
  }
  const auto apply = [&](const PosePair& pair) {
    switch (strategy) {
      case FuseStrategy::kHard: return hard_fuse(pair, root_index);
      case FuseStrategy::kLinear: return linear_fuse(pair);
      case FuseStrategy::kMlp:
        // 8K inputs without the similarity feature, 8K + 1 with it
        return learned_fuse(pair, *weights, root_index, weights->input_size() % 8 == 1);
    }
    return hard_fuse(pair, root_index);
  };
  const auto check = [](int idx, std::size_t n) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= n) {
      fail(ErrorCode::kIndexOutOfRange, "match result refers to a missing pose");
    }
  };

  std::vector<Pose3D> out;
  for (const MatchPair& m : matches.pairs) {
    check(m.bu, bu.size());
    check(m.td, td.size());
    out.push_back(apply(PosePair{td[m.td], bu[m.bu], m.similarity}));
  }
  for (int j : matches.unmatched_td) {
    check(j, td.size());
    out.push_back(apply(PosePair{td[j], std::nullopt, 0.0}));
  }
  for (int i : matches.unmatched_bu) {
    check(i, bu.size());
    out.push_back(apply(PosePair{std::nullopt, bu[i], 0.0}));
  }
  return out;
}

}  // namespace posefuse
