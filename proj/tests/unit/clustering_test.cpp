// Copyright 2026 The mvseq Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mvseq/clustering.hpp"

#include <gtest/gtest.h>

#include <random>

#include "mvseq/error.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace mvseq::clustering {
namespace {

UnitPoints ToPoints(const std::vector<std::vector<double>>& rows) {
  UnitPoints p;
  p.n = rows.size();
  p.dim = rows.front().size();
  for (const auto& r : rows) p.values.insert(p.values.end(), r.begin(), r.end());
  return p;
}

std::vector<std::vector<double>> RandomUnit(std::mt19937_64& rng, std::size_t n,
                                            std::size_t dim) {
  return testing::UnitRowsOf(testing::GaussianMatrix(rng, n, dim));
}

TEST(Ward, ThreePointExample) {
  std::vector<double> d{0.0, 0.01, 0.9, 0.01, 0.0, 0.9, 0.9, 0.9, 0.0};
  const auto merges = WardAgglomerate(d, 3, 2);
  ASSERT_EQ(merges.size(), 1u);
  EXPECT_EQ(merges[0].a, 0u);
  EXPECT_EQ(merges[0].b, 1u);
  EXPECT_DOUBLE_EQ(merges[0].distance, 0.01);
}

TEST(Ward, LanceWilliamsUpdateDrivesSecondMerge) {
  // After the {0,1} merge, d({0,1},2) = 1.19667 exceeds d(2,3) = 1.0, so 2
  // and 3 merge next.
  std::vector<double> d{0.0, 0.01, 0.9, 1.5, 0.01, 0.0, 0.9, 1.5,
                        0.9, 0.9, 0.0, 1.0, 1.5, 1.5, 1.0, 0.0};
  const auto merges = WardAgglomerate(d, 4, 1);
  ASSERT_EQ(merges.size(), 3u);
  EXPECT_EQ((std::pair{merges[1].a, merges[1].b}), (std::pair<std::size_t, std::size_t>{2, 3}));
  // Singletons 2 and 3 join against the size-2 cluster {0,1}.
  const double d02 = (2 * 0.9 + 2 * 0.9 - 0.01) / 3;
  const double d03 = (2 * 1.5 + 2 * 1.5 - 0.01) / 3;
  EXPECT_NEAR(merges[2].distance, (3 * d02 + 3 * d03 - 2 * 1.0) / 4, 1e-12);
}

TEST(Ward, TiesBreakOnLowestPair) {
  std::vector<double> d(16, 0.5);
  for (int i = 0; i < 4; ++i) d[i * 4 + i] = 0.0;
  const auto merges = WardAgglomerate(d, 4, 3);
  EXPECT_EQ(merges[0].a, 0u);
  EXPECT_EQ(merges[0].b, 1u);
}

TEST(Ward, MergeSequenceMatchesNaiveOracle) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 12;
    const auto unit = RandomUnit(rng, n, 2 + trial % 6);
    const auto oracle = testing::NaiveWard(unit, 1);
    const auto merges = WardAgglomerate(CosineDistances(ToPoints(unit)), n, 1);
    ASSERT_EQ(merges.size(), oracle.merges.size());
    for (std::size_t i = 0; i < merges.size(); ++i) {
      EXPECT_EQ(merges[i].a, oracle.merges[i].a) << trial << ":" << i;
      EXPECT_EQ(merges[i].b, oracle.merges[i].b) << trial << ":" << i;
    }
  }
}

TEST(Ward, ClustersFromMergesSortsByFirstMember) {
  const std::vector<Merge> merges{{1, 3, 0.1}, {0, 2, 0.2}};
  EXPECT_EQ(ClustersFromMerges(4, merges),
            (std::vector<std::vector<std::size_t>>{{0, 2}, {1, 3}}));
}

TEST(Ward, RejectsBadTargets) {
  EXPECT_MVSEQ_ERROR(WardAgglomerate(std::vector<double>(4, 0.0), 2, 0), kData);
  EXPECT_MVSEQ_ERROR(WardAgglomerate(std::vector<double>(4, 0.0), 2, 3), kData);
  EXPECT_MVSEQ_ERROR(WardAgglomerate(std::vector<double>(3, 0.0), 2, 1), kData);
}

TEST(KMeans, ObjectiveNeverDecreases) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + trial % 60;
    const auto unit = RandomUnit(rng, n, 4 + trial % 8);
    KMeansOptions opt;
    opt.k = 1 + trial % std::min<std::size_t>(n, 10);
    opt.seed = trial;
    const auto res = SphericalKMeans(ToPoints(unit), opt);
    ASSERT_FALSE(res.objective.empty());
    for (std::size_t i = 1; i < res.objective.size(); ++i) {
      EXPECT_GE(res.objective[i], res.objective[i - 1] - 1e-9) << trial;
    }
    // Every cluster is used.
    std::vector<int> used(opt.k, 0);
    for (auto a : res.assignment) used.at(a) = 1;
    EXPECT_EQ(std::count(used.begin(), used.end(), 1), static_cast<long>(opt.k));
  }
}

TEST(KMeans, TwoBundlesMatchBruteForce) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const auto u = testing::UnitVector(rng, 6);
    const auto v = testing::UnitVector(rng, 6);
    const std::size_t n = 4 + trial % 3;
    std::vector<std::vector<double>> pts;
    std::vector<int> bundle;
    for (std::size_t i = 0; i < n; ++i) {
      const bool first = i == 0 || (i != 1 && rng() % 2 == 0);
      const auto& src = first ? u : v;
      pts.emplace_back(src.begin(), src.end());
      bundle.push_back(first ? 0 : 1);
    }
    const auto [best, best_label] = testing::BestTwoPartition(pts);
    KMeansOptions opt;
    opt.k = 2;
    opt.seed = trial;
    const auto res = SphericalKMeans(ToPoints(pts), opt);
    EXPECT_NEAR(res.objective.back(), static_cast<double>(n), 1e-6);
    EXPECT_NEAR(res.objective.back(), best, 1e-6);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(res.assignment[i] == res.assignment[0], bundle[i] == bundle[0]);
      EXPECT_EQ(best_label[i] == best_label[0], bundle[i] == bundle[0]);
    }
  }
}

TEST(KMeans, IterationCapIsHonoured) {
  std::mt19937_64 rng(24);
  const auto unit = RandomUnit(rng, 200, 3);
  KMeansOptions opt;
  opt.k = 20;
  opt.max_iters = 2;
  const auto res = SphericalKMeans(ToPoints(unit), opt);
  EXPECT_LE(res.iterations, 2);
  EXPECT_LE(res.objective.size(), 2u);
}

TEST(KMeans, AllPointsIdenticalStillFillsClusters) {
  std::vector<std::vector<double>> pts(5, {0.0, 1.0});
  KMeansOptions opt;
  opt.k = 3;
  const auto res = SphericalKMeans(ToPoints(pts), opt);
  std::vector<int> used(3, 0);
  for (auto a : res.assignment) used.at(a) = 1;
  EXPECT_EQ(std::count(used.begin(), used.end(), 1), 3);
}

TEST(KMeans, RejectsBadK) {
  std::vector<std::vector<double>> pts(3, {1.0, 0.0});
  KMeansOptions opt;
  opt.k = 4;
  EXPECT_MVSEQ_ERROR(SphericalKMeans(ToPoints(pts), opt), kData);
  opt.k = 0;
  EXPECT_MVSEQ_ERROR(SphericalKMeans(ToPoints(pts), opt), kData);
}

}  // namespace
}  // namespace mvseq::clustering
