// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "posefuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "posefuse/error.hpp"
#include "posefuse/geometry.hpp"
#include "posefuse/hungarian.hpp"

namespace posefuse {

namespace {

Eigen::Vector3d vec(const Point3& p) { return {p.x, p.y, p.z}; }

void require_same_k(const Pose3D& a, const Pose3D& b) {
  if (a.size() != b.size()) fail(ErrorCode::kDimsMismatch, "poses disagree on joint count");
}

void require_gt(std::span<const Pose3D> gt) {
  if (gt.empty()) fail(ErrorCode::kEmptyInput, "ground-truth set is empty");
}

bool root_present(const Pose3D& p, int root) {
  return root >= 0 && static_cast<std::size_t>(root) < p.size() && p.joint_present(root);
}

std::int64_t present_count(const Pose3D& p) {
  return std::count_if(p.confidence.begin(), p.confidence.end(), [](double c) { return c > 0.0; });
}

// Per-joint distance between a matched pair, optionally root-aligned.
// Returns -1 for joints the prediction lacks.
std::vector<double> joint_errors(const Pose3D& pred, const Pose3D& gt, bool align, int root) {
  require_same_k(pred, gt);
  std::vector<double> err(gt.size(), -1.0);
  const Point3 shift = align ? gt.joints[root] - pred.joints[root] : Point3{};
  for (std::size_t k = 0; k < gt.size(); ++k) {
    if (!gt.joint_present(k) || !pred.joint_present(k)) continue;
    err[k] = distance(pred.joints[k] + shift, gt.joints[k]);
  }
  return err;
}

// Joint errors are compared with a one-nanometer slack.
constexpr double kThresholdSlackMm = 1e-6;

bool within(double error_mm, double threshold_mm) {
  return error_mm <= threshold_mm + kThresholdSlackMm;
}

struct PckCounts {
  std::int64_t correct = 0;
  std::int64_t total = 0;
};

PckCounts count_pck(std::span<const Pose3D> pred, std::span<const Pose3D> gt,
                    const EvalPairing& pairing, double threshold_mm, bool align, int root) {
  if (!(threshold_mm >= 0.0)) fail(ErrorCode::kInvalidArgument, "PCK threshold must be >= 0");
  PckCounts c;
  for (const Pose3D& g : gt) c.total += present_count(g);
  for (const auto& [p, g] : pairing.matched) {
    for (double e : joint_errors(pred[p], gt[g], align, root)) {
      if (e >= 0.0 && within(e, threshold_mm)) ++c.correct;
    }
  }
  return c;
}

std::vector<ApEntry> score_roots(std::span<const Pose3D> pred, std::span<const Pose3D> gt,
                                 int root, double threshold_mm, std::uint64_t frame) {
  std::vector<int> order;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (root_present(pred[i], root)) order.push_back(static_cast<int>(i));
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return pred[a].confidence[root] > pred[b].confidence[root];
  });
  std::vector<bool> claimed(gt.size(), false);
  std::vector<ApEntry> entries;
  for (int i : order) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (claimed[g] || !root_present(gt[g], root)) continue;
      const double d = distance(pred[i].joints[root], gt[g].joints[root]);
      if (d <= threshold_mm && d < best_d) {
        best = static_cast<int>(g);
        best_d = d;
      }
    }
    if (best >= 0) claimed[best] = true;
    entries.push_back(ApEntry{pred[i].confidence[root], best >= 0, frame, i});
  }
  return entries;
}

F1Counts count_f1(std::span<const Pose3D> pred, std::span<const Pose3D> gt,
                  const EvalPairing& pairing, double threshold_m) {
  if (!(threshold_m > 0.0)) fail(ErrorCode::kInvalidArgument, "F1 threshold must be positive");
  const double t = threshold_m * 1000.0;
  F1Counts c;
  for (const auto& [p, g] : pairing.matched) {
    require_same_k(pred[p], gt[g]);
    for (std::size_t k = 0; k < gt[g].size(); ++k) {
      const bool has_gt = gt[g].joint_present(k);
      const bool has_pred = pred[p].joint_present(k);
      if (has_gt && has_pred && distance(pred[p].joints[k], gt[g].joints[k]) < t) {
        ++c.tp;
        continue;
      }
      if (has_pred) ++c.fp;
      if (has_gt) ++c.fn;
    }
  }
  for (int g : pairing.unmatched_gt) c.fn += present_count(gt[g]);
  for (int p : pairing.unmatched_pred) c.fp += present_count(pred[p]);
  return c;
}

double f1_from_counts(const F1Counts& c) {
  if (c.tp == 0) return 0.0;
  return 2.0 * static_cast<double>(c.tp) / static_cast<double>(2 * c.tp + c.fp + c.fn);
}

double oks_2d(const Pose2D& pred, const Pose2D& gt, double sigma) {
  double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
  double hi_x = -lo_x, hi_y = -lo_x;
  int visible = 0;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    if (!gt.visible[k]) continue;
    lo_x = std::min(lo_x, gt.joints[k].x);
    hi_x = std::max(hi_x, gt.joints[k].x);
    lo_y = std::min(lo_y, gt.joints[k].y);
    hi_y = std::max(hi_y, gt.joints[k].y);
    ++visible;
  }
  if (visible == 0) return 0.0;
  const double s = std::max(1.0, std::sqrt((hi_x - lo_x) * (hi_y - lo_y)));
  double total = 0.0;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    if (!gt.visible[k] || !pred.visible[k]) continue;
    total += std::exp(-squared_distance(pred.joints[k], gt.joints[k]) / (2.0 * s * s * sigma * sigma));
  }
  return total / visible;
}

}  // namespace

EvalPairing pair_with_gt(std::span<const Pose3D> pred, std::span<const Pose3D> gt,
                         int root_index, const PairingParams& params) {
  DenseMatrix value(pred.size(), gt.size(), 0.0);
  if (params.mode == PairingMode::kRoot3d) {
    // Gated pairs are worth 0 (same as leaving both unmatched); admissible
    // pairs are worth 2*gate - d > 0, so the optimum maximizes the number of
    // admissible pairs first and then minimizes their summed distance.
    for (std::size_t i = 0; i < pred.size(); ++i) {
      for (std::size_t g = 0; g < gt.size(); ++g) {
        if (!root_present(pred[i], root_index) || !root_present(gt[g], root_index)) continue;
        const double d = distance(pred[i].joints[root_index], gt[g].joints[root_index]);
        if (d <= params.gate_mm) value(i, g) = 2.0 * params.gate_mm - d;
      }
    }
  } else {
    if (!params.camera) fail(ErrorCode::kInvalidArgument, "oks2d pairing needs a camera");
    std::vector<Pose2D> pred2d;
    std::vector<Pose2D> gt2d;
    for (const auto& p : pred) pred2d.push_back(project(p, *params.camera));
    for (const auto& g : gt) gt2d.push_back(project(g, *params.camera));
    for (std::size_t i = 0; i < pred.size(); ++i) {
      for (std::size_t g = 0; g < gt.size(); ++g) {
        const double s = oks_2d(pred2d[i], gt2d[g], params.oks_sigma);
        if (s >= params.oks_gate) value(i, g) = s;
      }
    }
  }

  const Assignment a = hungarian_assign(value);
  EvalPairing out;
  std::vector<bool> gt_used(gt.size(), false);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int g = a.row_to_col[i];
    if (g >= 0 && value(i, g) > 0.0) {
      out.matched.emplace_back(static_cast<int>(i), g);
      gt_used[g] = true;
    } else {
      out.unmatched_pred.push_back(static_cast<int>(i));
    }
  }
  for (std::size_t g = 0; g < gt.size(); ++g) {
    if (!gt_used[g]) out.unmatched_gt.push_back(static_cast<int>(g));
  }
  return out;
}

double mpjpe(const Pose3D& pred, const Pose3D& gt, int root_index) {
  require_same_k(pred, gt);
  if (root_index < 0 || static_cast<std::size_t>(root_index) >= gt.size()) {
    fail(ErrorCode::kIndexOutOfRange, "root index out of range");
  }
  const Point3 shift = gt.joints[root_index] - pred.joints[root_index];
  double sum = 0.0;
  int n = 0;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    if (!gt.joint_present(k)) continue;
    sum += distance(pred.joints[k] + shift, gt.joints[k]);
    ++n;
  }
  if (n == 0) fail(ErrorCode::kEmptyInput, "no ground-truth joints to evaluate");
  return sum / n;
}

Point3 SimilarityTransform::apply(const Point3& p) const {
  const Eigen::Vector3d q = scale * (rotation * vec(p)) + translation;
  return {q.x(), q.y(), q.z()};
}

SimilarityTransform procrustes_align(std::span<const Point3> source,
                                     std::span<const Point3> target) {
  if (source.size() != target.size()) {
    fail(ErrorCode::kDimsMismatch, "Procrustes point sets differ in size");
  }
  const auto n = static_cast<Eigen::Index>(source.size());
  if (n < 3) fail(ErrorCode::kDegenerateAlignment, "Procrustes needs at least 3 points");

  Eigen::Matrix3Xd src(3, n);
  Eigen::Matrix3Xd dst(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    src.col(i) = vec(source[i]);
    dst.col(i) = vec(target[i]);
  }
  const Eigen::Vector3d mu_src = src.rowwise().mean();
  const Eigen::Vector3d mu_dst = dst.rowwise().mean();
  src.colwise() -= mu_src;
  dst.colwise() -= mu_dst;

  const auto check_rank = [](const Eigen::Matrix3Xd& pts, const char* which) {
    const Eigen::Vector3d sv = Eigen::JacobiSVD<Eigen::Matrix3Xd>(pts).singularValues();
    if (!(sv(0) > 0.0) || sv(1) <= 1e-9 * sv(0)) {
      fail(ErrorCode::kDegenerateAlignment,
           std::string(which) + " joints are collinear or coincident; alignment is ill-posed");
    }
  };
  check_rank(src, "predicted");
  check_rank(dst, "ground-truth");

  const Eigen::Matrix3d cov = dst * src.transpose() / static_cast<double>(n);
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d d = Eigen::Vector3d::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) d(2) = -1.0;

  SimilarityTransform t;
  t.rotation = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
  const double var_src = src.squaredNorm() / static_cast<double>(n);
  t.scale = svd.singularValues().dot(d) / var_src;
  t.translation = mu_dst - t.scale * t.rotation * mu_src;
  return t;
}

double pa_mpjpe(const Pose3D& pred, const Pose3D& gt) {
  require_same_k(pred, gt);
  std::vector<Point3> src;
  std::vector<Point3> dst;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    if (!gt.joint_present(k)) continue;
    src.push_back(pred.joints[k]);
    dst.push_back(gt.joints[k]);
  }
  if (src.empty()) fail(ErrorCode::kEmptyInput, "no ground-truth joints to evaluate");
  const SimilarityTransform t = procrustes_align(src, dst);
  double sum = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) sum += distance(t.apply(src[i]), dst[i]);
  return sum / static_cast<double>(src.size());
}

double pck(std::span<const Pose3D> pred, std::span<const Pose3D> gt, const EvalPairing& pairing,
           double threshold_mm, int root_index) {
  require_gt(gt);
  const auto c = count_pck(pred, gt, pairing, threshold_mm, true, root_index);
  if (c.total == 0) fail(ErrorCode::kEmptyInput, "ground truth has no present joints");
  return 100.0 * static_cast<double>(c.correct) / static_cast<double>(c.total);
}

double pck_abs(std::span<const Pose3D> pred, std::span<const Pose3D> gt,
               const EvalPairing& pairing, double threshold_mm) {
  require_gt(gt);
  const auto c = count_pck(pred, gt, pairing, threshold_mm, false, 0);
  if (c.total == 0) fail(ErrorCode::kEmptyInput, "ground truth has no present joints");
  return 100.0 * static_cast<double>(c.correct) / static_cast<double>(c.total);
}

double auc_rel(std::span<const Pose3D> pred, std::span<const Pose3D> gt,
               const EvalPairing& pairing, int root_index) {
  double sum = 0.0;
  for (std::size_t i = 0; i < kAucThresholdCount; ++i) {
    sum += pck(pred, gt, pairing, 5.0 * static_cast<double>(i), root_index);
  }
  return sum / static_cast<double>(kAucThresholdCount);
}

double average_precision(std::vector<ApEntry> entries, std::int64_t gt_count) {
  if (gt_count <= 0) fail(ErrorCode::kEmptyInput, "average precision needs ground truth");
  std::stable_sort(entries.begin(), entries.end(), [](const ApEntry& a, const ApEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.frame != b.frame) return a.frame < b.frame;
    return a.index < b.index;
  });
  std::vector<double> recall;
  std::vector<double> precision;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  for (const ApEntry& e : entries) {
    e.true_positive ? ++tp : ++fp;
    recall.push_back(static_cast<double>(tp) / static_cast<double>(gt_count));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
  }
  // Precision envelope, then area over recall steps.
  for (std::size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < recall.size(); ++i) {
    if (recall[i] > prev_recall) {
      ap += (recall[i] - prev_recall) * precision[i];
      prev_recall = recall[i];
    }
  }
  return ap;
}

double ap_root(std::span<const Pose3D> pred, std::span<const Pose3D> gt, int root_index,
               double threshold_mm) {
  require_gt(gt);
  return average_precision(score_roots(pred, gt, root_index, threshold_mm, 0),
                           static_cast<std::int64_t>(gt.size()));
}

double f1_at(std::span<const Pose3D> pred, std::span<const Pose3D> gt,
             const EvalPairing& pairing, double threshold_m) {
  require_gt(gt);
  return f1_from_counts(count_f1(pred, gt, pairing, threshold_m));
}

void MetricCounts::merge(const MetricCounts& o) {
  mpjpe_sum_mm += o.mpjpe_sum_mm;
  mpjpe_joints += o.mpjpe_joints;
  pa_mpjpe_sum_mm += o.pa_mpjpe_sum_mm;
  pa_mpjpe_joints += o.pa_mpjpe_joints;
  pa_degenerate_persons += o.pa_degenerate_persons;
  pck_correct += o.pck_correct;
  pck_abs_correct += o.pck_abs_correct;
  pck_total += o.pck_total;
  for (std::size_t i = 0; i < kAucThresholdCount; ++i) auc_correct[i] += o.auc_correct[i];
  ap_entries.insert(ap_entries.end(), o.ap_entries.begin(), o.ap_entries.end());
  ap_gt += o.ap_gt;
  if (f1.size() < o.f1.size()) f1.resize(o.f1.size());
  for (std::size_t i = 0; i < o.f1.size(); ++i) {
    f1[i].tp += o.f1[i].tp;
    f1[i].fp += o.f1[i].fp;
    f1[i].fn += o.f1[i].fn;
  }
  persons_gt += o.persons_gt;
  persons_pred += o.persons_pred;
  persons_matched += o.persons_matched;
}

MetricCounts evaluate_frame(std::span<const Pose3D> pred, std::span<const Pose3D> gt,
                            const MetricConfig& config, std::uint64_t frame) {
  const int root = config.root_index;
  MetricCounts c;
  c.persons_gt = static_cast<std::int64_t>(gt.size());
  c.persons_pred = static_cast<std::int64_t>(pred.size());
  c.f1.resize(config.f1_thresholds_m.size());

  const EvalPairing pairing = pair_with_gt(pred, gt, root, config.pairing);
  c.persons_matched = static_cast<std::int64_t>(pairing.matched.size());

  for (const Pose3D& g : gt) c.pck_total += present_count(g);
  for (const auto& [p, g] : pairing.matched) {
    const auto rel = joint_errors(pred[p], gt[g], true, root);
    const auto abs = joint_errors(pred[p], gt[g], false, root);
    for (std::size_t k = 0; k < rel.size(); ++k) {
      if (rel[k] < 0.0) continue;
      if (within(rel[k], config.pck_threshold_mm)) ++c.pck_correct;
      if (within(abs[k], config.pck_threshold_mm)) ++c.pck_abs_correct;
      for (std::size_t i = 0; i < kAucThresholdCount; ++i) {
        if (within(rel[k], 5.0 * static_cast<double>(i))) ++c.auc_correct[i];
      }
    }
    // MPJPE uses every gt joint; a missing predicted joint still has coordinates.
    const Point3 shift = gt[g].joints[root] - pred[p].joints[root];
    for (std::size_t k = 0; k < gt[g].size(); ++k) {
      if (!gt[g].joint_present(k)) continue;
      c.mpjpe_sum_mm += distance(pred[p].joints[k] + shift, gt[g].joints[k]);
      ++c.mpjpe_joints;
    }
    try {
      const double pa = pa_mpjpe(pred[p], gt[g]);
      const auto n = present_count(gt[g]);
      c.pa_mpjpe_sum_mm += pa * static_cast<double>(n);
      c.pa_mpjpe_joints += n;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateAlignment) throw;
      ++c.pa_degenerate_persons;
    }
  }

  c.ap_entries = score_roots(pred, gt, root, config.ap_threshold_mm, frame);
  c.ap_gt = static_cast<std::int64_t>(gt.size());
  for (std::size_t i = 0; i < config.f1_thresholds_m.size(); ++i) {
    c.f1[i] = count_f1(pred, gt, pairing, config.f1_thresholds_m[i]);
  }
  return c;
}

MetricReport finalize_report(const MetricCounts& c, const MetricConfig& config) {
  MetricReport r;
  r.pck_threshold_mm = config.pck_threshold_mm;
  r.persons_gt = c.persons_gt;
  r.persons_pred = c.persons_pred;
  r.persons_matched = c.persons_matched;
  r.joints_evaluated = c.pck_total;
  if (c.mpjpe_joints > 0) r.mpjpe = c.mpjpe_sum_mm / static_cast<double>(c.mpjpe_joints);
  if (c.pa_mpjpe_joints > 0) r.pa_mpjpe = c.pa_mpjpe_sum_mm / static_cast<double>(c.pa_mpjpe_joints);
  if (c.pck_total > 0) {
    const auto total = static_cast<double>(c.pck_total);
    r.pck = 100.0 * static_cast<double>(c.pck_correct) / total;
    r.pck_abs = 100.0 * static_cast<double>(c.pck_abs_correct) / total;
    double auc = 0.0;
    for (auto n : c.auc_correct) auc += 100.0 * static_cast<double>(n) / total;
    r.auc_rel = auc / static_cast<double>(kAucThresholdCount);
  }
  if (c.ap_gt > 0) r.ap_root = average_precision(c.ap_entries, c.ap_gt);
  for (std::size_t i = 0; i < config.f1_thresholds_m.size() && i < c.f1.size(); ++i) {
    char key[32];
    std::snprintf(key, sizeof key, "%g", config.f1_thresholds_m[i]);
    r.f1_at[key] = f1_from_counts(c.f1[i]);
  }
  return r;
}

}  // namespace posefuse
