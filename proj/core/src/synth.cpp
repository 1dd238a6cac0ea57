// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "posefuse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "posefuse/error.hpp"
#include "posefuse/geometry.hpp"
#include "posefuse/json_io.hpp"
#include "posefuse/tensor_io.hpp"

namespace posefuse {

namespace {

// Keeps rounded peak pixels unambiguous after float32 storage.
constexpr double kHalfPixelGuard = 1e-3;

Point3 rotate_pitch(const Point3& d, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {d.x, d.y * c - d.z * s, d.y * s + d.z * c};
}

struct Placed {
  Pose3D pose;
  std::vector<Point2> map_xy;  // projected joints in map coordinates
};

class SceneSampler {
 public:
  SceneSampler(std::uint64_t seed, const CameraIntrinsics& camera, const Skeleton& skeleton,
               const SynthParams& params)
      : rng_(seed), camera_(camera), skeleton_(skeleton), params_(params) {
    map_w_ = (camera.width() + params.stride - 1) / params.stride;
    map_h_ = (camera.height() + params.stride - 1) / params.stride;
    radius_ = disc_radius(params);
  }

  int map_width() const { return map_w_; }
  int map_height() const { return map_h_; }

  std::optional<Placed> try_person(const std::vector<Placed>& others) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng_); };

    const std::size_t k_count = skeleton_.joint_count();
    const int root = skeleton_.root_index();
    const double yaw = uniform(-std::numbers::pi, std::numbers::pi);
    const double depth = uniform(params_.min_depth_mm, params_.max_depth_mm);
    const Point2 root_px{uniform(0.0, camera_.width()), uniform(0.0, camera_.height())};

    Pose3D pose = Pose3D::empty(k_count);
    pose.joints[root] = backproject_point(root_px, depth, camera_);
    pose.confidence.assign(k_count, 1.0);
    const double a = params_.max_limb_angle_rad;
    for (int k : skeleton_.topological_order()) {
      if (k == root) continue;
      const BonePrior& bone = *skeleton_.joints()[k].bone;
      const double length = uniform(bone.min_length_mm, bone.max_length_mm);
      const double limb_yaw = uniform(-a, a);
      const double limb_pitch = uniform(-a, a);
      Point3 dir = rotate_pitch(bone.direction, limb_pitch);
      dir = rotate_about_vertical(dir, Point3{}, limb_yaw + yaw);
      pose.joints[k] = pose.joints[skeleton_.parent(k)] + length * dir;
    }

    Placed placed{pose, std::vector<Point2>(k_count)};
    const double margin = radius_ + 1.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      if (!(pose.joints[k].z > 100.0)) return std::nullopt;
      const Point2 px = project_point(pose.joints[k], camera_);
      const Point2 m{px.x / params_.stride, px.y / params_.stride};
      if (m.x < margin || m.y < margin || m.x > map_w_ - 1 - margin || m.y > map_h_ - 1 - margin) {
        return std::nullopt;
      }
      for (double c : {m.x, m.y}) {
        if (std::abs(c - std::floor(c) - 0.5) < kHalfPixelGuard) return std::nullopt;
      }
      placed.map_xy[k] = m;
    }

    const double min_gap2 = std::pow(2.0 * radius_ + 1.0, 2);
    for (const Placed& other : others) {
      if (distance(other.pose.joints[root], pose.joints[root]) < params_.min_separation_mm) {
        return std::nullopt;
      }
      for (std::size_t k = 0; k < k_count; ++k) {
        const Point2 a_px{std::round(placed.map_xy[k].x), std::round(placed.map_xy[k].y)};
        const Point2 b_px{std::round(other.map_xy[k].x), std::round(other.map_xy[k].y)};
        if (squared_distance(a_px, b_px) <= min_gap2) return std::nullopt;
      }
    }
    return placed;
  }

 private:
  std::mt19937_64 rng_;
  CameraIntrinsics camera_;
  const Skeleton& skeleton_;
  SynthParams params_;
  int map_w_ = 0;
  int map_h_ = 0;
  int radius_ = 0;
};

void validate_params(int n_persons, const Skeleton& skeleton, const SynthParams& p) {
  if (n_persons < 1) fail(ErrorCode::kInvalidArgument, "n_persons must be >= 1");
  if (p.stride < 1) fail(ErrorCode::kInvalidArgument, "stride must be >= 1");
  if (!(p.sigma_px > 0.0)) fail(ErrorCode::kInvalidArgument, "sigma_px must be positive");
  if (!(p.min_depth_mm > 0.0 && p.min_depth_mm <= p.max_depth_mm)) {
    fail(ErrorCode::kInvalidArgument, "depth range must satisfy 0 < min <= max");
  }
  if (p.min_separation_mm < 0.0 || p.max_attempts < 1) {
    fail(ErrorCode::kInvalidArgument, "invalid separation or attempt budget");
  }
  for (std::size_t k = 0; k < skeleton.joint_count(); ++k) {
    if (static_cast<int>(k) == skeleton.root_index()) continue;
    const auto& bone = skeleton.joints()[k].bone;
    if (!bone || !(bone->min_length_mm > 0.0) || bone->max_length_mm < bone->min_length_mm ||
        !(norm(bone->direction) > 0.0)) {
      fail(ErrorCode::kInvalidArgument,
           "joint '" + skeleton.name(k) + "' has no usable bone prior for synthesis");
    }
  }
}

}  // namespace

CameraIntrinsics default_synth_camera() {
  return CameraIntrinsics::make(1000.0, 1000.0, 960.0, 540.0, 1920, 1080);
}

int disc_radius(const SynthParams& params) {
  return static_cast<int>(std::ceil(3.0 * params.sigma_px));
}

SyntheticScene generate_scene(std::uint64_t seed, int n_persons, const CameraIntrinsics& camera,
                              const Skeleton& skeleton, const SynthParams& params) {
  validate_params(n_persons, skeleton, params);
  SceneSampler sampler(seed, camera, skeleton, params);

  std::vector<Placed> placed;
  for (int i = 0; i < n_persons; ++i) {
    std::optional<Placed> person;
    for (int attempt = 0; attempt < params.max_attempts && !person; ++attempt) {
      person = sampler.try_person(placed);
    }
    if (!person) {
      fail(ErrorCode::kPlacementFailed,
           "could not place person " + std::to_string(i + 1) + " of " +
               std::to_string(n_persons) + " within " + std::to_string(params.max_attempts) +
               " attempts");
    }
    person->pose.person_id = i;
    placed.push_back(std::move(*person));
  }

  const std::size_t k_count = skeleton.joint_count();
  const auto w = static_cast<std::size_t>(sampler.map_width());
  const auto h = static_cast<std::size_t>(sampler.map_height());
  const int root = skeleton.root_index();
  const int radius = disc_radius(params);
  const int window = radius + 2;
  const double inv_two_sigma2 = 1.0 / (2.0 * params.sigma_px * params.sigma_px);

  SyntheticScene scene;
  scene.camera = camera;
  scene.seed = seed;
  scene.maps.stride = params.stride;
  scene.maps.joint_heatmaps = Tensor({k_count, h, w});
  scene.maps.tag_maps = Tensor({k_count, h, w});
  scene.maps.rel_depth = Tensor({k_count, h, w});
  scene.maps.root_depth = Tensor({h, w});

  for (std::size_t i = 0; i < placed.size(); ++i) {
    const Pose3D& pose = placed[i].pose;
    const double tag = (static_cast<double>(i) + 0.5) / static_cast<double>(n_persons);
    scene.tags.push_back(tag);
    const double z_root = pose.joints[root].z;
    for (std::size_t k = 0; k < k_count; ++k) {
      const Point2 m = placed[i].map_xy[k];
      const auto cu = static_cast<long>(std::round(m.x));
      const auto cv = static_cast<long>(std::round(m.y));
      for (long y = cv - window; y <= cv + window; ++y) {
        for (long x = cu - window; x <= cu + window; ++x) {
          if (x < 0 || y < 0 || x >= static_cast<long>(w) || y >= static_cast<long>(h)) continue;
          const double dx = static_cast<double>(x) - m.x;
          const double dy = static_cast<double>(y) - m.y;
          const auto g = static_cast<float>(std::exp(-(dx * dx + dy * dy) * inv_two_sigma2));
          float& hm = scene.maps.joint_heatmaps.at(k, y, x);
          hm = std::max(hm, g);
          const long ddx = x - cu;
          const long ddy = y - cv;
          if (ddx * ddx + ddy * ddy > static_cast<long>(radius) * radius) continue;
          scene.maps.tag_maps.at(k, y, x) = static_cast<float>(tag);
          scene.maps.rel_depth.at(k, y, x) = static_cast<float>(pose.joints[k].z - z_root);
          if (static_cast<int>(k) == root) scene.maps.root_depth.at(y, x) = static_cast<float>(z_root);
        }
      }
    }

    double x0 = camera.width(), y0 = camera.height(), x1 = 0.0, y1 = 0.0;
    for (const Point2& m : placed[i].map_xy) {
      x0 = std::min(x0, m.x * params.stride);
      y0 = std::min(y0, m.y * params.stride);
      x1 = std::max(x1, m.x * params.stride);
      y1 = std::max(y1, m.y * params.stride);
    }
    const double mx = params.detection_margin * (x1 - x0);
    const double my = params.detection_margin * (y1 - y0);
    scene.detections.push_back(Detection{
        std::max(0.0, x0 - mx), std::max(0.0, y0 - my),
        std::min<double>(camera.width(), x1 + mx), std::min<double>(camera.height(), y1 + my), 1.0});
    scene.persons.push_back(pose);
  }
  return scene;
}

PerturbedSets perturb_scene(const SyntheticScene& scene, const NoiseParams& noise,
                            std::uint64_t seed) {
  const auto check_p = [](double p) {
    if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::kInvalidArgument, "dropout probability outside [0, 1]");
  };
  check_p(noise.td_joint_dropout);
  check_p(noise.bu_joint_dropout);
  check_p(noise.td_person_dropout);
  check_p(noise.bu_person_dropout);
  if (noise.td_sigma_mm < 0.0 || noise.bu_sigma_mm < 0.0) {
    fail(ErrorCode::kInvalidArgument, "noise sigma must be non-negative");
  }

  std::mt19937_64 rng(seed);
  const auto degrade = [&](const Pose3D& gt, double sigma, double joint_dropout) {
    Pose3D p = gt;
    std::bernoulli_distribution drop(joint_dropout);
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (drop(rng)) {
        p.joints[k] = Point3{};
        p.confidence[k] = 0.0;
        continue;
      }
      if (sigma > 0.0) {
        std::normal_distribution<double> n(0.0, sigma);
        p.joints[k] += Point3{n(rng), n(rng), n(rng)};
      }
    }
    return p;
  };
  const auto listed = [](const std::vector<int>& ids, int i) {
    return std::find(ids.begin(), ids.end(), i) != ids.end();
  };

  PerturbedSets out;
  for (std::size_t i = 0; i < scene.persons.size(); ++i) {
    const int id = static_cast<int>(i);
    const bool drop_td = std::bernoulli_distribution(noise.td_person_dropout)(rng);
    const bool drop_bu = std::bernoulli_distribution(noise.bu_person_dropout)(rng);
    Pose3D td = degrade(scene.persons[i], noise.td_sigma_mm, noise.td_joint_dropout);
    Pose3D bu = degrade(scene.persons[i], noise.bu_sigma_mm, noise.bu_joint_dropout);
    if (!drop_td && !listed(noise.td_drop_persons, id)) out.td.push_back(std::move(td));
    if (!drop_bu && !listed(noise.bu_drop_persons, id)) out.bu.push_back(std::move(bu));
  }
  return out;
}

std::filesystem::path write_scene_frame(const std::filesystem::path& dir,
                                        const SyntheticScene& scene, const PerturbedSets& sets,
                                        const std::string& sequence_id, std::int64_t frame_index,
                                        const std::filesystem::path& skeleton_file) {
  SceneManifest m;
  m.sequence_id = sequence_id;
  m.frame_index = frame_index;
  m.camera = scene.camera;
  m.stride = scene.maps.stride;
  m.skeleton = skeleton_file;
  const std::string id = m.frame_id();
  m.heatmaps = dir / (id + ".hm.ptns");
  m.tag_maps = dir / (id + ".tag.ptns");
  m.root_depth = dir / (id + ".rootd.ptns");
  m.rel_depth = dir / (id + ".reld.ptns");
  m.detections = dir / (id + ".det.json");
  m.gt_poses = dir / (id + ".gt.json");
  m.td_poses = dir / (id + ".td.json");
  write_tensor(m.heatmaps, scene.maps.joint_heatmaps);
  write_tensor(m.tag_maps, scene.maps.tag_maps);
  write_tensor(m.root_depth, scene.maps.root_depth);
  write_tensor(m.rel_depth, scene.maps.rel_depth);
  write_json(m.detections, detections_to_json(scene.detections));
  write_json(m.gt_poses, pose_set_to_json(scene.persons));
  write_json(m.td_poses, pose_set_to_json(sets.td));
  write_json(dir / (id + ".bu_noisy.json"), pose_set_to_json(sets.bu));
  const std::filesystem::path manifest = dir / (id + ".manifest.json");
  save_manifest(manifest, m);
  return manifest;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace posefuse
