// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "posefuse/match.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "posefuse/error.hpp"

namespace posefuse {

double oks(const Point3& a, const Point3& b, double s, double sigma) {
  if (!(s > 0.0) || !(sigma > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "OKS scale and sigma must be positive");
  }
  const double d2 = squared_norm(a - b);
  return std::exp(-d2 / (2.0 * s * s * sigma * sigma));
}

double person_scale(const Pose3D& pose) {
  Point3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
  Point3 hi{-lo.x, -lo.y, -lo.z};
  bool any = false;
  for (std::size_t k = 0; k < pose.size(); ++k) {
    if (!pose.joint_present(k)) continue;
    const Point3& p = pose.joints[k];
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    any = true;
  }
  if (!any) return kMinPersonScaleMm;
  const Point3 extent = hi - lo;
  return std::max(kMinPersonScaleMm, std::cbrt(extent.x * extent.y * extent.z));
}

SimMatrix sim_matrix(std::span<const Pose3D> bu, std::span<const Pose3D> td,
                     const SimilarityParams& params) {
  std::size_t k_count = 0;
  bool have_k = false;
  auto check_k = [&](const Pose3D& p) {
    if (p.joints.size() != p.confidence.size()) {
      fail(ErrorCode::kInvalidArgument, "pose has mismatched joint/confidence lengths");
    }
    if (!have_k) {
      k_count = p.size();
      have_k = true;
    } else if (p.size() != k_count) {
      fail(ErrorCode::kDimsMismatch, "pose sets disagree on joint count");
    }
  };
  for (const auto& p : bu) check_k(p);
  for (const auto& p : td) check_k(p);
  if (!params.per_joint_sigma.empty() && have_k && params.per_joint_sigma.size() != k_count) {
    fail(ErrorCode::kDimsMismatch, "per-joint sigma vector must have K entries");
  }
  if (params.global_scale && !(*params.global_scale > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "global OKS scale must be positive");
  }

  SimMatrix sim(bu.size(), td.size());
  for (std::size_t j = 0; j < td.size(); ++j) {
    const double s = params.global_scale.value_or(person_scale(td[j]));
    for (std::size_t i = 0; i < bu.size(); ++i) {
      double total = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) {
        const double w = std::min(bu[i].confidence[k], td[j].confidence[k]);
        if (!(w > 0.0)) continue;
        const double sigma = params.per_joint_sigma.empty() ? params.sigma : params.per_joint_sigma[k];
        total += w * oks(bu[i].joints[k], td[j].joints[k], s, sigma);
      }
      sim(i, j) = total;
    }
  }
  return sim;
}

MatchResult match_pose_sets(std::span<const Pose3D> bu, std::span<const Pose3D> td,
                            const MatchParams& params) {
  MatchResult out;
  const SimMatrix sim = sim_matrix(bu, td, params.similarity);
  std::size_t k_count = 0;
  if (!bu.empty()) k_count = bu.front().size();
  if (!td.empty()) k_count = td.front().size();
  const double threshold = params.threshold.value_or(0.1 * static_cast<double>(k_count));

  std::vector<bool> td_used(td.size(), false);
  const Assignment assignment = hungarian_assign(sim);
  for (std::size_t i = 0; i < bu.size(); ++i) {
    const int j = assignment.row_to_col[i];
    if (j >= 0 && sim(i, j) >= threshold) {
      out.pairs.push_back(MatchPair{static_cast<int>(i), j, sim(i, j)});
      td_used[j] = true;
    } else {
      out.unmatched_bu.push_back(static_cast<int>(i));
    }
  }
  for (std::size_t j = 0; j < td.size(); ++j) {
    if (!td_used[j]) out.unmatched_td.push_back(static_cast<int>(j));
  }
  return out;
}

}  // namespace posefuse
