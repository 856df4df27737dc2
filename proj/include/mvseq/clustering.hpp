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

// Clustering primitives behind the pooling compressors. Points are indexed
// 0..n-1 in original token order; a cluster is identified by its smallest
// member index.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mvseq::clustering {

/// Dense row-major n x dim matrix of unit vectors in double precision.
struct UnitPoints {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }
};

double DotUnit(std::span<const double> a, std::span<const double> b);

/// One agglomeration step: clusters `a` < `b` (by smallest member) merged
/// at linkage `distance`.
struct Merge {
  std::size_t a = 0;
  std::size_t b = 0;
  double distance = 0.0;

  bool operator==(const Merge&) const = default;
};

/// Pairwise cosine distances 1 - <u_i, u_j>, full symmetric n x n.
std::vector<double> CosineDistances(const UnitPoints& points);

/// Ward agglomeration over a precomputed symmetric distance matrix using the
/// Lance-Williams update
///   d(i+j, k) = ((n_i+n_k) d(i,k) + (n_j+n_k) d(j,k) - n_k d(i,j)) / (n_i+n_j+n_k).
/// Stops when `target_clusters` remain. At each step the pair minimizing
/// (distance, a, b) is merged. Nearest neighbours are cached per cluster and
/// only rescanned when invalidated, so typical cost is O(n^2) after the
/// matrix is built.
std::vector<Merge> WardAgglomerate(std::vector<double> distances, std::size_t n,
                                   std::size_t target_clusters);

/// Replays merges over singletons; clusters ordered by smallest member,
/// members ascending.
std::vector<std::vector<std::size_t>> ClustersFromMerges(
    std::size_t n, std::span<const Merge> merges);

struct KMeansOptions {
  std::size_t k = 1;
  std::uint64_t seed = 0;
  int max_iters = 20;
  double tolerance = 0.0;  // 0: run until assignments are stable
};

struct KMeansResult {
  std::vector<std::size_t> assignment;  // point -> cluster index
  std::vector<double> objective;        // sum of <x_i, c_a(i)> after each iteration
  int iterations = 0;
  bool converged = false;
};

/// Spherical k-means with k-means++ seeding (weights 1 - max cosine to the
/// chosen seeds). Assignment maximizes the dot product with unit centroids,
/// ties to the lower cluster; centroids are renormalized member means. An
/// empty cluster takes the point with the lowest similarity to its own
/// centroid from a cluster that has more than one member. Requires
/// 1 <= k <= n.
KMeansResult SphericalKMeans(const UnitPoints& points, const KMeansOptions& options);

}  // namespace mvseq::clustering
