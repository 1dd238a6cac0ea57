// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "posefuse/error.hpp"
#include "posefuse/graph.hpp"

using namespace posefuse;

namespace {

Tensor random_heatmaps(std::mt19937_64& rng, std::size_t k, std::size_t h = 8, std::size_t w = 9) {
  std::uniform_real_distribution<float> u(0, 1);
  Tensor t({k, h, w});
  for (float& v : t.data()) v = u(rng);
  return t;
}

double channel_max(const Tensor& t, std::size_t c) {
  double m = -1;
  for (std::size_t y = 0; y < t.dim(1); ++y)
    for (std::size_t x = 0; x < t.dim(2); ++x) m = std::max(m, double(t.at(c, y, x)));
  return m;
}

std::vector<int> parents_of(const Skeleton& s) {
  std::vector<int> p;
  for (std::size_t k = 0; k < s.joint_count(); ++k) p.push_back(s.parent(k));
  return p;
}

}  // namespace

TEST_CASE("adjacency hand cases") {
  const Skeleton s = Skeleton::default_skeleton();
  const Tensor ones({16, 4, 4}, 1.0f);
  const Adjacency a = gcn_adjacency(ones, s);
  const int pelvis = s.root_index();
  const int hip = static_cast<int>(*s.index_of("l_hip"));
  CHECK(std::abs(a(pelvis, hip) - 0.36787944117144233) <= 1e-12);
  CHECK(a(pelvis, pelvis) == 1.0);

  Tensor peak({16, 4, 4});
  peak.at(3, 1, 2) = 0.7f;
  peak.at(hip, 0, 0) = 1.0f;
  const Adjacency b = gcn_adjacency(peak, s);
  CHECK(b(3, 3) == static_cast<double>(0.7f));
  // zero-confidence source: empty row, non-empty column
  for (std::size_t j = 0; j < 16; ++j) CHECK(b(pelvis, j) == 0.0);
  CHECK(b(hip, pelvis) > 0.0);
  CHECK_THROWS_AS(gcn_adjacency(Tensor({15, 4, 4}), s), Error);
}

TEST_CASE("adjacency matches the formula, scales rows and decays with hops") {
  const Skeleton s = Skeleton::default_skeleton();
  const auto parent = parents_of(s);
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> lam(0.01, 1.0);
  for (int trial = 0; trial < 120; ++trial) {
    const Tensor hm = random_heatmaps(rng, 16);
    const Adjacency a = gcn_adjacency(hm, s);
    for (std::size_t i = 0; i < 16; ++i) {
      const double m = channel_max(hm, i);
      for (std::size_t j = 0; j < 16; ++j) {
        const double expected = i == j ? m : m * std::exp(-oracle::bfs_hops(parent, i, j));
        CHECK(std::abs(a(i, j) - expected) <= 1e-12);
        CHECK(a(i, j) >= 0.0);
        if (i != j && m != channel_max(hm, j)) CHECK(a(i, j) != a(j, i));
      }
      for (std::size_t j = 0; j < 16; ++j)
        for (std::size_t l = 0; l < 16; ++l)
          if (j != i && l != i && s.hop_distance(i, j) < s.hop_distance(i, l) && m > 0)
            CHECK(a(i, j) > a(i, l));
    }

    const std::size_t row = trial % 16;
    const float scale = static_cast<float>(lam(rng));
    Tensor scaled = hm;
    for (std::size_t y = 0; y < 8; ++y)
      for (std::size_t x = 0; x < 9; ++x) scaled.at(row, y, x) *= scale;
    const Adjacency b = gcn_adjacency(scaled, s);
    for (std::size_t i = 0; i < 16; ++i) {
      for (std::size_t j = 0; j < 16; ++j) {
        if (i == row) {
          // max commutes with a positive scale (exactly, on the stored float values)
          CHECK(std::abs(b(i, j) - double(static_cast<float>(channel_max(hm, i)) * scale) *
                                        (i == j ? 1.0 : std::exp(-s.hop_distance(i, j)))) <= 1e-12);
        } else {
          CHECK(b(i, j) == a(i, j));
        }
      }
    }
  }
}
