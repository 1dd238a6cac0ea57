// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "posefuse/error.hpp"
#include "posefuse/fuse.hpp"
#include "posefuse/geometry.hpp"
#include "posefuse/mlp.hpp"

using namespace posefuse;

namespace {

Pose3D single(Point3 p, double c) {
  Pose3D out;
  out.joints = {p};
  out.confidence = {c};
  return out;
}

bool all_zero(const Pose3D& p) {
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p.confidence[k] != 0.0 || !(p.joints[k] == Point3{})) return false;
  }
  return true;
}

MlpWeights zero_net(std::size_t in, std::size_t out) {
  MlpWeights w;
  w.layers.push_back(DenseLayer{in, 4, std::vector<double>(4 * in, 0.0), std::vector<double>(4, 0.0),
                                Activation::kRelu});
  w.layers.push_back(DenseLayer{4, out, std::vector<double>(4 * out, 0.0),
                                std::vector<double>(out, 0.0), Activation::kIdentity});
  return w;
}

}  // namespace

TEST_CASE("hard_fuse: fallback, depth transfer, idempotence") {
  std::mt19937_64 rng(1);
  const CameraIntrinsics cam;
  const int root = 0;
  const Pose3D td = oracle::random_pose(rng, 6);
  CHECK(hard_fuse(PosePair{td, std::nullopt, 0}, root) == td);
  const Pose3D bu_only = oracle::random_pose(rng, 6);
  CHECK(hard_fuse(PosePair{std::nullopt, bu_only, 0}, root) == bu_only);
  CHECK(hard_fuse(PosePair{td, td, 0}, root) == td);

  for (int trial = 0; trial < 50; ++trial) {
    const Pose3D t = oracle::random_pose(rng, 6);
    Pose3D b = oracle::random_pose(rng, 6);
    b.joints[root].z = 4000.0;
    const Pose3D out = hard_fuse(PosePair{t, b, 1.0}, root);
    CHECK(out.joints[root].z == 4000.0);
    for (std::size_t k = 0; k < 6; ++k) {
      const Point3 o_out = out.joints[k] - out.joints[root];
      const Point3 o_td = t.joints[k] - t.joints[root];
      CHECK(oracle::dist3(o_out, o_td) <= 1e-9);
    }
    const Point2 before = project_point(t.joints[root], cam);
    const Point2 after = project_point(out.joints[root], cam);
    CHECK(std::abs(before.x - after.x) <= 1e-9);
    CHECK(std::abs(before.y - after.y) <= 1e-9);
    CHECK(hard_fuse(PosePair{out, out, 1.0}, root) == out);
  }
}

TEST_CASE("linear_fuse: equal weights, degenerate weight, hand case") {
  const Pose3D a = single({0, 0, 4000}, 0.5), b = single({40, 0, 4400}, 0.5);
  const Pose3D mean = linear_fuse(PosePair{a, b, 0});
  CHECK(mean.joints[0] == Point3{20, 0, 4200});
  CHECK(linear_fuse(PosePair{single({0, 0, 4000}, 1), single({40, 0, 4400}, 0), 0}).joints[0] ==
        Point3{0, 0, 4000});
  const Pose3D hand = linear_fuse(PosePair{single({0, 0, 4000}, 0.75), single({40, 0, 4400}, 0.25), 0});
  CHECK(hand.joints[0] == Point3{10, 0, 4100});
  CHECK(hand.confidence[0] == 0.75);
  // both confidences zero: the top-down joint is kept
  CHECK(linear_fuse(PosePair{single({1, 2, 3}, 0), single({4, 5, 6}, 0), 0}).joints[0] ==
        Point3{1, 2, 3});
}

TEST_CASE("linear_fuse is convex per joint and idempotent") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    Pose3D t = oracle::random_pose(rng, 5), b = oracle::random_pose(rng, 5);
    if (trial % 4 == 0) t.confidence[1] = 0;
    if (trial % 5 == 0) b.confidence[2] = 0;
    const Pose3D out = linear_fuse(PosePair{t, b, 0});
    for (std::size_t k = 0; k < 5; ++k) {
      const double total = oracle::dist3(t.joints[k], b.joints[k]);
      const double via = oracle::dist3(t.joints[k], out.joints[k]) + oracle::dist3(out.joints[k], b.joints[k]);
      CHECK(via <= total + 1e-9 * (1 + total));
    }
    CHECK(linear_fuse(PosePair{t, t, 0}) == t);
  }
}

TEST_CASE("mlp_forward: zero weights, identity, hand-computed net") {
  MlpWeights bias_only;
  bias_only.layers.push_back(DenseLayer{3, 2, std::vector<double>(6, 0.0), {1.5, -2.0}, Activation::kIdentity});
  CHECK(mlp_forward(bias_only, std::vector<double>{7, 8, 9}) == std::vector<double>{1.5, -2.0});

  MlpWeights identity;
  identity.layers.push_back(DenseLayer{2, 2, {1, 0, 0, 1}, {0, 0}, Activation::kIdentity});
  CHECK(mlp_forward(identity, std::vector<double>{-3, 4}) == std::vector<double>{-3, 4});

  MlpWeights net;
  net.layers.push_back(DenseLayer{2, 2, {1, 2, 3, -4}, {0.5, -1}, Activation::kRelu});
  net.layers.push_back(DenseLayer{2, 1, {1, -1}, {0.25}, Activation::kIdentity});
  // h = relu(1 + 2 + 0.5, 3 - 4 - 1) = (3.5, 0); y = 3.5 - 0 + 0.25
  CHECK(mlp_forward(net, std::vector<double>{1, 1}) == std::vector<double>{3.75});
  CHECK_THROWS_AS(mlp_forward(net, std::vector<double>{1, 1, 1}), Error);

  MlpWeights broken = net;
  broken.layers[1].in = 3;
  CHECK_THROWS_AS(broken.validate(), Error);
}

TEST_CASE("mlp bundle round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "posefuse_test_mlp";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  MlpWeights net;
  net.layers.push_back(DenseLayer{2, 2, {1, 2, 3, -4}, {0.5, -1}, Activation::kRelu});
  net.layers.push_back(DenseLayer{2, 1, {1, -1}, {0.25}, Activation::kIdentity});
  save_mlp(dir / "net.json", net);
  const MlpWeights back = load_mlp(dir / "net.json");
  REQUIRE(back.layers.size() == 2);
  CHECK(back.layers[0].weight == net.layers[0].weight);
  CHECK(back.layers[0].activation == Activation::kRelu);
  CHECK(mlp_forward(back, std::vector<double>{1, 1}) == std::vector<double>{3.75});
}

TEST_CASE("learned_fuse with an all-zero network equals hard_fuse") {
  std::mt19937_64 rng(3);
  const Pose3D t = oracle::random_pose(rng, 4), b = oracle::random_pose(rng, 4);
  const PosePair pair{t, b, 2.0};
  CHECK(learned_fuse(pair, zero_net(32, 12), 0) == hard_fuse(pair, 0));
  CHECK(learned_fuse(pair, zero_net(33, 12), 0, true) == hard_fuse(pair, 0));
  CHECK(integration_input(pair, 4, true).size() == 33);
  const auto input = integration_input(PosePair{std::nullopt, b, 0}, 4, false);
  CHECK(std::all_of(input.begin(), input.begin() + 16, [](double v) { return v == 0.0; }));
  CHECK(input[16] == b.joints[0].x);
  CHECK_THROWS_AS(learned_fuse(pair, zero_net(32, 5), 0), Error);
}

TEST_CASE("integration_loss") {
  Pose3D a = single({0, 0, 1000}, 1);
  CHECK(integration_loss(a, a) == 0.0);
  CHECK(integration_loss(single({3, 4, 1000}, 1), a) == 25.0);
  Pose3D two;
  two.joints = {{3, 4, 1000}, {0, 0, 1000}};
  two.confidence = {1, 1};
  Pose3D base;
  base.joints = {{0, 0, 1000}, {0, 0, 1000}};
  base.confidence = {1, 1};
  CHECK(integration_loss(two, base) == 12.5);
  std::mt19937_64 rng(9);
  for (int i = 0; i < 50; ++i) {
    const Pose3D p = oracle::random_pose(rng, 3), q = oracle::random_pose(rng, 3);
    CHECK(integration_loss(p, q) > 0.0);
    CHECK(integration_loss(p, p) == 0.0);
  }
  CHECK_THROWS_AS(integration_loss(two, a), Error);
}

TEST_CASE("augment_pair contracts") {
  std::mt19937_64 rng(4);
  const Pose3D t = oracle::random_pose(rng, 8), b = oracle::random_pose(rng, 8);
  const PosePair pair{t, b, 3.0};

  AugmentParams all_mask{1.0, {20, 20, 20}, 0.0};
  const PosePair masked = augment_pair(pair, 1, all_mask);
  CHECK(all_zero(*masked.td));
  CHECK(all_zero(*masked.bu));

  AugmentParams none{0.0, {0, 0, 0}, 0.0};
  CHECK(augment_pair(pair, 5, none) == pair);

  const AugmentParams defaults;
  CHECK(augment_pair(pair, 42, defaults) == augment_pair(pair, 42, defaults));
  CHECK(!(augment_pair(pair, 42, defaults) == augment_pair(pair, 43, defaults)));

  AugmentParams zeroing{0.5, {20, 20, 20}, 1.0};
  int td_zeroed = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const PosePair out = augment_pair(pair, seed, zeroing);
    const bool zt = all_zero(*out.td), zb = all_zero(*out.bu);
    CHECK(zt != zb);
    td_zeroed += zt;
  }
  CHECK(td_zeroed > 100);
  CHECK(td_zeroed < 200);

  // a single-sided pair is never zeroed
  const PosePair lone = augment_pair(PosePair{t, std::nullopt, 0}, 3, AugmentParams{0, {0, 0, 0}, 1.0});
  CHECK(*lone.td == t);
  CHECK_THROWS_AS(augment_pair(pair, 1, AugmentParams{1.5, {0, 0, 0}, 0}), Error);
}

TEST_CASE("augment_pair shift statistics follow sigma") {
  Pose3D p;
  p.joints.assign(200, Point3{0, 0, 5000});
  p.confidence.assign(200, 1.0);
  const PosePair out = augment_pair(PosePair{p, std::nullopt, 0}, 7, AugmentParams{0, {10, 20, 40}, 0});
  double sx = 0, sy = 0, sz = 0;
  for (const auto& j : out.td->joints) sx += j.x * j.x, sy += j.y * j.y, sz += (j.z - 5000) * (j.z - 5000);
  CHECK(std::sqrt(sx / 200) == doctest::Approx(10).epsilon(0.2));
  CHECK(std::sqrt(sy / 200) == doctest::Approx(20).epsilon(0.2));
  CHECK(std::sqrt(sz / 200) == doctest::Approx(40).epsilon(0.2));
}

TEST_CASE("discriminator composition and loss") {
  const Pose3D a = single({0, 0, 1000}, 1), b = single({5, 0, 1000}, 1);
  const auto constant1 = [](double v) { return [v](const Pose3D&) { return v; }; };
  const auto constant2 = [](double v) { return [v](const Pose3D&, const Pose3D&) { return v; }; };
  CHECK(std::abs(discriminator_score(constant1(1), constant2(1), a, b) - 1.0) <= 1e-12);
  CHECK(std::abs(discriminator_score(constant1(0), constant2(0), a, b)) <= 1e-12);
  const PoseScorer d1 = [&](const Pose3D& p) { return p.joints[0].x == 0 ? 0.4 : 0.8; };
  CHECK(std::abs(discriminator_score(d1, constant2(0.6), a, b) - 0.6) <= 1e-12);
  try {
    discriminator_score(constant1(1.2), constant2(0.5), a, b);
    FAIL("expected a contract violation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kContractViolation);
  }
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 100; ++i) {
    const double x = u(rng), y = u(rng), z = u(rng);
    const PoseScorer s = [&](const Pose3D& p) { return p.joints[0].x == 0 ? x : y; };
    const double c = discriminator_score(s, constant2(z), a, b);
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
  }

  CHECK(discriminator_loss(1.0, 0.0) == 0.0);
  CHECK(std::abs(discriminator_loss(1.0, 0.5) - (-0.693147)) <= 1e-6);
  CHECK(std::abs(discriminator_loss(0.5, 0.5) - (-1.386294)) <= 1e-6);
  for (auto [r, f] : std::vector<std::pair<double, double>>{{0.0, 0.5}, {0.5, 1.0}, {1.1, 0.0}}) {
    try {
      discriminator_loss(r, f);
      FAIL("expected a domain error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kDomain);
    }
  }
}

TEST_CASE("mlp-backed scorers return probabilities") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0, 0.01);
  MlpWeights d1;
  d1.layers.push_back(DenseLayer{12, 1, std::vector<double>(12), {0.0}, Activation::kIdentity});
  for (double& w : d1.layers[0].weight) w = n(rng);
  MlpWeights d2;
  d2.layers.push_back(DenseLayer{24, 1, std::vector<double>(24, 0.0), {0.0}, Activation::kIdentity});
  const PoseScorer s1 = make_single_pose_scorer(d1, 0);
  const PairScorer s2 = make_pair_scorer(d2);
  const Pose3D a = oracle::random_pose(rng, 4), b = oracle::random_pose(rng, 4);
  CHECK(s2(a, b) == 0.5);
  const double c = discriminator_score(s1, s2, a, b);
  CHECK(c > 0.0);
  CHECK(c < 1.0);
  // the single-pose scorer sees root-relative input, so translation is invisible
  Pose3D moved = a;
  for (auto& j : moved.joints) j += Point3{100, -50, 300};
  CHECK(std::abs(s1(moved) - s1(a)) <= 1e-12);
}

TEST_CASE("fuse_matches output order") {
  std::mt19937_64 rng(10);
  std::vector<Pose3D> bu{oracle::random_pose(rng, 3), oracle::random_pose(rng, 3)};
  std::vector<Pose3D> td{oracle::random_pose(rng, 3), oracle::random_pose(rng, 3)};
  MatchResult m;
  m.pairs = {{1, 0, 2.0}};
  m.unmatched_bu = {0};
  m.unmatched_td = {1};
  const auto out = fuse_matches(bu, td, m, FuseStrategy::kHard, 0);
  REQUIRE(out.size() == 3);
  CHECK(out[0] == hard_fuse(PosePair{td[0], bu[1], 2.0}, 0));
  CHECK(out[1] == td[1]);
  CHECK(out[2] == bu[0]);
  CHECK_THROWS_AS(fuse_matches(bu, td, m, FuseStrategy::kMlp, 0), Error);
  m.pairs[0].td = 5;
  CHECK_THROWS_AS(fuse_matches(bu, td, m, FuseStrategy::kLinear, 0), Error);
}
