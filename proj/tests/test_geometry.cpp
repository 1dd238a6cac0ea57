// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "posefuse/error.hpp"
#include "posefuse/geometry.hpp"

using namespace posefuse;

namespace {

constexpr double kPi = std::numbers::pi;

Pose3D pose_of(std::vector<Point3> joints) {
  Pose3D p;
  p.joints = std::move(joints);
  p.confidence.assign(p.joints.size(), 1.0);
  return p;
}

}  // namespace

TEST_CASE("project: principal point, hand value, projective scale") {
  const CameraIntrinsics cam;
  CHECK(project_point({0, 0, 3000}, cam) == Point2{960, 540});
  CHECK(project_point({1000, 500, 5000}, cam) == Point2{1160, 640});
  CHECK(project_point({2000, 1000, 10000}, cam) == Point2{1160, 640});
  Pose3D behind = pose_of({{0, 0, -10}});
  CHECK_THROWS_AS(project(behind, cam), Error);
  behind.confidence[0] = 0.0;
  const Pose2D absent = project(behind, cam);
  CHECK(!absent.visible[0]);
  CHECK(absent.confidence[0] == 0.0);
}

TEST_CASE("backproject: principal point, inverse of the hand projection") {
  const CameraIntrinsics cam;
  CHECK(backproject_point({960, 540}, 3000, cam) == Point3{0, 0, 3000});
  CHECK(backproject_point({1160, 640}, 5000, cam) == Point3{1000, 500, 5000});
  CHECK_THROWS_AS(backproject_point({1, 1}, 0.0, cam), Error);
}

TEST_CASE("project and backproject are inverse over random joints") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> z(500, 20000), u(-1, 1);
  const CameraIntrinsics cam = CameraIntrinsics::make(1150, 1130, 955.5, 541.25, 1920, 1080);
  double worst_px = 0, worst_mm = 0;
  for (int i = 0; i < 1000; ++i) {
    const double depth = z(rng);
    const Point3 p{u(rng) * depth, u(rng) * depth * 0.6, depth};
    const Point2 px = project_point(p, cam);
    const Point3 back = backproject_point(px, depth, cam);
    worst_mm = std::max(worst_mm, oracle::dist3(back, p));
    const Point2 again = project_point(back, cam);
    worst_px = std::max({worst_px, std::abs(again.x - px.x), std::abs(again.y - px.y)});
  }
  CHECK(worst_px <= 1e-9);
  CHECK(worst_mm <= 1e-6);

  Pose2D q = Pose2D::empty(3);
  q.joints = {{100, 200}, {0, 0}, {1900, 1000}};
  q.confidence = {0.9, 0.0, 0.5};
  q.visible = {true, false, true};
  const std::vector<double> depths{4000, 0, 6000};
  const Pose3D lifted = backproject(q, depths, cam);
  CHECK(lifted.confidence == q.confidence);
  CHECK(lifted.joints[1] == Point3{});
  const Pose2D round = project(lifted, cam);
  CHECK(std::abs(round.joints[2].x - 1900) <= 1e-9);
}

TEST_CASE("normalized root depth") {
  const CameraIntrinsics cam;
  CHECK(normalized_root_depth(5000, cam) == 5.0);
  CHECK(denormalize_root_depth(normalized_root_depth(5000, cam), cam) == 5000.0);
  const auto c1200 = CameraIntrinsics::make(1200, 1200, 960, 540, 1920, 1080);
  CHECK(normalized_root_depth(1500, c1200) == 1.25);
  CHECK_THROWS_AS(normalized_root_depth(0, cam), Error);
}

TEST_CASE("rotate_about_vertical: identity, periodicity, hand quarter turn") {
  const Pose3D p = pose_of({{100, 50, 4000}, {101, 50, 4000}, {90, -300, 4200}});
  CHECK(rotate_about_vertical(p, 0.0, 0) == p);
  const Pose3D full = rotate_about_vertical(p, 2 * kPi, 0);
  for (std::size_t k = 0; k < 3; ++k) CHECK(oracle::dist3(full.joints[k], p.joints[k]) <= 1e-9);
  const Pose3D quarter = rotate_about_vertical(p, kPi / 2, 0);
  CHECK(quarter.joints[0] == p.joints[0]);
  const Point3 off = quarter.joints[1] - quarter.joints[0];
  CHECK(std::abs(off.x) <= 1e-12);
  CHECK(off.y == 0.0);
  CHECK(std::abs(off.z - (-1.0)) <= 1e-12);
}

TEST_CASE("rotation is an isometry fixing the root") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> th(-10, 10);
  for (int trial = 0; trial < 200; ++trial) {
    const Pose3D p = oracle::random_pose(rng, 10);
    const int root = trial % 10;
    const Pose3D r = rotate_about_vertical(p, th(rng), root);
    CHECK(r.joints[root] == p.joints[root]);
    for (std::size_t i = 0; i < 10; ++i)
      for (std::size_t j = i + 1; j < 10; ++j)
        CHECK(std::abs(oracle::dist3(r.joints[i], r.joints[j]) -
                       oracle::dist3(p.joints[i], p.joints[j])) <= 1e-9);
  }
}

TEST_CASE("reprojection error") {
  const CameraIntrinsics cam;
  std::mt19937_64 rng(41);
  const Pose3D p = oracle::random_pose(rng, 6);
  CHECK(reprojection_error(p, project(p, cam), cam) == 0.0);
  Pose2D zero_conf = project(p, cam);
  for (std::size_t k = 0; k < 6; ++k) {
    zero_conf.joints[k].x += 50;
    zero_conf.confidence[k] = 0.0;
    zero_conf.visible[k] = false;
  }
  CHECK(reprojection_error(p, zero_conf, cam) == 0.0);

  const Pose3D one = pose_of({{0, 0, 3000}});
  Pose2D off = project(one, cam);
  off.joints[0].x += 3;
  off.joints[0].y += 4;
  CHECK(reprojection_error(one, off, cam) == 25.0);

  // values carried by zero-confidence joints do not matter, even behind the camera
  Pose3D extra = p;
  Pose2D extra2d = project(p, cam);
  extra.joints[2] = {0, 0, -100};
  extra2d.joints[2] = {5, 5};
  extra2d.confidence[2] = 0.0;
  extra2d.visible[2] = false;
  Pose2D ref2d = project(p, cam);
  ref2d.confidence[2] = 0.0;
  ref2d.visible[2] = false;
  CHECK(reprojection_error(extra, extra2d, cam) == reprojection_error(p, ref2d, cam));
  CHECK_THROWS_AS(reprojection_error(one, project(p, cam), cam), Error);
}

TEST_CASE("multi-perspective error") {
  const CameraIntrinsics cam;
  std::mt19937_64 rng(51);
  for (double theta : {0.0, kPi / 4, kPi / 2, kPi, 1.234}) {
    const Pose3D p = oracle::random_pose(rng, 10, 4000, 9000);
    const Pose3D truth = rotate_about_vertical(p, theta, 0);
    const Repredictor exact = [&](const Pose2D&) { return truth; };
    CHECK(multi_perspective_error(p, theta, exact, cam, 0) == 0.0);
    // a depth oracle: lift the rotated projection with the true rotated depths
    const Repredictor lift = [&](const Pose2D& q) {
      std::vector<double> depths;
      for (const auto& j : truth.joints) depths.push_back(j.z);
      return backproject(q, depths, cam);
    };
    CHECK(multi_perspective_error(p, theta, lift, cam, 0) <= 1e-12);

    const Repredictor off = [&](const Pose2D&) {
      Pose3D q = truth;
      q.joints[3].x += 6;
      q.joints[3].y -= 8;
      return q;
    };
    CHECK(multi_perspective_error(p, theta, off, cam, 0) == doctest::Approx(10.0).epsilon(1e-9));
  }
  const Pose3D p = oracle::random_pose(rng, 10);
  const Repredictor wrong_size = [](const Pose2D&) { return pose_of({{0, 0, 1}}); };
  CHECK_THROWS_AS(multi_perspective_error(p, 0.3, wrong_size, cam, 0), Error);
}

TEST_CASE("ssl weights") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> e(0, 500);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t b = std::uniform_int_distribution<std::size_t>(1, 40)(rng);
    std::vector<double> rep(b), mp(b);
    for (auto& v : rep) v = e(rng);
    for (auto& v : mp) v = e(rng);
    const double r = 1 + trial;
    const auto w = ssl_weight(rep, mp, r);
    double total = 0;
    for (double v : w) {
      total += v;
      CHECK(v >= 0.0);
    }
    CHECK(std::abs(total - 2.0) <= 1e-12);
    // larger E_rep never earns a larger softmax(-E_rep / r) share
    const std::vector<double> zeros(b, 0.0);
    const auto only_rep = ssl_weight(rep, zeros, r);
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t j = 0; j < b; ++j)
        if (rep[i] > rep[j]) CHECK(only_rep[i] <= only_rep[j]);
    const auto flat = ssl_weight(rep, mp, 1e9);
    for (double v : flat) CHECK(std::abs(v - 2.0 / b) < 1e-6);
  }
  const std::vector<double> same(4, 3.0);
  for (double v : ssl_weight(same, same, 1)) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));

  const auto hand = ssl_weight(std::vector<double>{0, 1}, std::vector<double>{0, 0}, 1);
  CHECK(std::abs(hand[0] - 1.231) <= 1e-3);
  CHECK(std::abs(hand[1] - 0.769) <= 1e-3);
  const auto literal = ssl_weight(std::vector<double>{0, 1}, std::vector<double>{0, 0}, 1, SoftmaxSign::kLiteral);
  CHECK(std::abs(literal[0] - 0.769) <= 1e-3);

  CHECK_THROWS_AS(ssl_weight(std::vector<double>{}, std::vector<double>{}, 1), Error);
  CHECK_THROWS_AS(ssl_weight(std::vector<double>{1}, std::vector<double>{1}, 0.5), Error);
}

TEST_CASE("ssl loss") {
  CHECK(ssl_loss(0, 5, 6, -0.7) == -0.7);
  CHECK(ssl_loss(1, 2, 3, -1) == 4.0);
  CHECK(ssl_loss(0.8, 0, 0, 0.25) == 0.25);
  CHECK_THROWS_AS(ssl_loss(-1, 0, 0, 0), Error);
}
