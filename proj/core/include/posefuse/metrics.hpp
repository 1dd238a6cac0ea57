// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "posefuse/types.hpp"

namespace posefuse {

enum class PairingMode { kRoot3d, kOks2d };

struct PairingParams {
  PairingMode mode = PairingMode::kRoot3d;
  double gate_mm = 500.0;                    // root3d only
  std::optional<CameraIntrinsics> camera;    // required for oks2d
  double oks_sigma = 0.5;                    // oks2d only
  double oks_gate = 0.1;                     // oks2d: minimum mean OKS to pair
};

struct EvalPairing {
  std::vector<std::pair<int, int>> matched;  // (pred, gt), ascending pred
  std::vector<int> unmatched_pred;
  std::vector<int> unmatched_gt;
};

/// One-to-one pairing of predictions with ground truth: Hungarian on root
/// distance (gated) or on projected 2D OKS.
EvalPairing pair_with_gt(std::span<const Pose3D> pred, std::span<const Pose3D> gt,
                         int root_index, const PairingParams& params = {});

/// Root-aligned mean joint error over joints present in gt.
double mpjpe(const Pose3D& pred, const Pose3D& gt, int root_index);

struct SimilarityTransform {
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Point3 apply(const Point3& p) const;
};

/// Least-squares similarity transform taking source onto target
/// (rotation with det +1, uniform scale, translation). Throws
/// kDegenerateAlignment when either point set has rank < 2.
SimilarityTransform procrustes_align(std::span<const Point3> source,
                                     std::span<const Point3> target);

/// MPJPE after Procrustes alignment over joints present in gt.
double pa_mpjpe(const Pose3D& pred, const Pose3D& gt);

inline constexpr double kDefaultPckThresholdMm = 150.0;
inline constexpr double kDefaultApRootThresholdMm = 250.0;
inline constexpr std::size_t kAucThresholdCount = 31;  // 0, 5, ..., 150 mm

double pck(std::span<const Pose3D> pred, std::span<const Pose3D> gt, const EvalPairing& pairing,
           double threshold_mm, int root_index);
double pck_abs(std::span<const Pose3D> pred, std::span<const Pose3D> gt,
               const EvalPairing& pairing, double threshold_mm);
double auc_rel(std::span<const Pose3D> pred, std::span<const Pose3D> gt,
               const EvalPairing& pairing, int root_index);
/// Predictions are scored by their root-joint confidence.
double ap_root(std::span<const Pose3D> pred, std::span<const Pose3D> gt, int root_index,
               double threshold_mm = kDefaultApRootThresholdMm);
double f1_at(std::span<const Pose3D> pred, std::span<const Pose3D> gt,
             const EvalPairing& pairing, double threshold_m);

struct MetricConfig {
  int root_index = 0;
  double pck_threshold_mm = kDefaultPckThresholdMm;
  double ap_threshold_mm = kDefaultApRootThresholdMm;
  std::vector<double> f1_thresholds_m{0.4, 0.8, 1.2};
  PairingParams pairing;
};

struct ApEntry {
  double score = 0.0;
  bool true_positive = false;
  std::uint64_t frame = 0;
  int index = 0;
};

struct F1Counts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
};

/// Raw counts and sums. Frames are combined with merge(); the reduction is
/// exact for counts, and sums are added in the order merge() is called.
struct MetricCounts {
  double mpjpe_sum_mm = 0.0;
  std::int64_t mpjpe_joints = 0;
  double pa_mpjpe_sum_mm = 0.0;
  std::int64_t pa_mpjpe_joints = 0;
  std::int64_t pa_degenerate_persons = 0;
  std::int64_t pck_correct = 0;
  std::int64_t pck_abs_correct = 0;
  std::int64_t pck_total = 0;
  std::array<std::int64_t, kAucThresholdCount> auc_correct{};
  std::vector<ApEntry> ap_entries;
  std::int64_t ap_gt = 0;
  std::vector<F1Counts> f1;  // aligned with MetricConfig::f1_thresholds_m
  std::int64_t persons_gt = 0;
  std::int64_t persons_pred = 0;
  std::int64_t persons_matched = 0;

  void merge(const MetricCounts& other);
};

MetricCounts evaluate_frame(std::span<const Pose3D> pred, std::span<const Pose3D> gt,
                            const MetricConfig& config, std::uint64_t frame = 0);

struct SequenceBreakdown {
  std::optional<double> pck;
  std::optional<double> pck_abs;
  std::int64_t joints = 0;
  std::int64_t persons = 0;
};

/// Metric values are absent when their denominator is empty.
struct MetricReport {
  std::optional<double> mpjpe;
  std::optional<double> pa_mpjpe;
  std::optional<double> pck;       // percent
  std::optional<double> pck_abs;   // percent
  std::optional<double> auc_rel;   // percent
  std::optional<double> ap_root;   // fraction
  std::map<std::string, double> f1_at;  // key: threshold in meters, "0.4"
  double pck_threshold_mm = kDefaultPckThresholdMm;
  std::int64_t persons_gt = 0;
  std::int64_t persons_pred = 0;
  std::int64_t persons_matched = 0;
  std::int64_t joints_evaluated = 0;
  std::int64_t frames = 0;
  std::map<std::string, SequenceBreakdown> sequences;
};

MetricReport finalize_report(const MetricCounts& counts, const MetricConfig& config);

/// All-point interpolated area under the precision/recall curve.
double average_precision(std::vector<ApEntry> entries, std::int64_t gt_count);

}  // namespace posefuse
