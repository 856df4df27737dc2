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

#include <algorithm>
#include <cmath>
#include <limits>

#include "mvseq/error.hpp"
#include "mvseq/rng.hpp"

namespace mvseq::clustering {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double DotUnit(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> CosineDistances(const UnitPoints& points) {
  const std::size_t n = points.n;
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = 1.0 - DotUnit(points.row(i), points.row(j));
      d[i * n + j] = v;
      d[j * n + i] = v;
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Ward agglomeration

std::vector<Merge> WardAgglomerate(std::vector<double> dist, std::size_t n,
                                   std::size_t target_clusters) {
  if (dist.size() != n * n) throw DataError("distance matrix is not n x n");
  if (target_clusters == 0 || target_clusters > n) {
    throw DataError("target cluster count must lie in [1, n]");
  }
  auto at = [&](std::size_t i, std::size_t j) -> double& { return dist[i * n + j]; };

  std::vector<bool> active(n, true);
  std::vector<double> size(n, 1.0);
  // nn[i]: best partner j > i; dmin[i] its distance. Each unordered pair is
  // owned by its lower slot, so the global scan below sees (d, a, b) order.
  std::vector<std::size_t> nn(n, n);
  std::vector<double> dmin(n, kInf);

  auto rescan = [&](std::size_t i) {
    nn[i] = n;
    dmin[i] = kInf;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (active[j] && at(i, j) < dmin[i]) {
        dmin[i] = at(i, j);
        nn[i] = j;
      }
    }
  };
  for (std::size_t i = 0; i < n; ++i) rescan(i);

  std::vector<Merge> merges;
  merges.reserve(n - target_clusters);
  for (std::size_t remaining = n; remaining > target_clusters; --remaining) {
    std::size_t a = n;
    double best = kInf;
    for (std::size_t i = 0; i < n; ++i) {
      if (active[i] && nn[i] < n && (a == n || dmin[i] < best)) {
        best = dmin[i];
        a = i;
      }
    }
    const std::size_t b = nn[a];
    const double dab = at(a, b);
    merges.push_back({a, b, dab});

    const double na = size[a];
    const double nb = size[b];
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == a || k == b) continue;
      const double nk = size[k];
      const double v =
          ((na + nk) * at(a, k) + (nb + nk) * at(b, k) - nk * dab) / (na + nb + nk);
      at(a, k) = v;
      at(k, a) = v;
    }
    size[a] = na + nb;
    active[b] = false;
    nn[b] = n;

    rescan(a);
    for (std::size_t k = 0; k < b; ++k) {
      if (!active[k] || k == a) continue;
      if (nn[k] == a || nn[k] == b) {
        rescan(k);
      } else if (k < a) {
        const double v = at(k, a);
        if (v < dmin[k] || (v == dmin[k] && a < nn[k])) {
          dmin[k] = v;
          nn[k] = a;
        }
      }
    }
  }
  return merges;
}

std::vector<std::vector<std::size_t>> ClustersFromMerges(std::size_t n,
                                                         std::span<const Merge> merges) {
  std::vector<std::vector<std::size_t>> members(n);
  for (std::size_t i = 0; i < n; ++i) members[i] = {i};
  for (const auto& m : merges) {
    auto& dst = members.at(m.a);
    auto& src = members.at(m.b);
    dst.insert(dst.end(), src.begin(), src.end());
    src.clear();
  }
  std::vector<std::vector<std::size_t>> out;
  for (auto& m : members) {
    if (m.empty()) continue;
    std::sort(m.begin(), m.end());
    out.push_back(std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spherical k-means

namespace {

std::vector<std::size_t> SeedPlusPlus(const UnitPoints& pts, std::size_t k,
                                      SplitMix64& rng) {
  const std::size_t n = pts.n;
  std::vector<std::size_t> seeds;
  std::vector<bool> chosen(n, false);
  std::vector<double> best_sim(n, -kInf);

  auto take = [&](std::size_t idx) {
    seeds.push_back(idx);
    chosen[idx] = true;
    for (std::size_t i = 0; i < n; ++i) {
      best_sim[i] = std::max(best_sim[i], DotUnit(pts.row(i), pts.row(idx)));
    }
  };

  take(static_cast<std::size_t>(rng.Below(n)));
  while (seeds.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!chosen[i]) total += std::max(0.0, 1.0 - best_sim[i]);
    }
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.Uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i]) continue;
        const double w = std::max(0.0, 1.0 - best_sim[i]);
        if (w <= 0.0) continue;
        pick = i;
        acc += w;
        if (acc > target) break;
      }
    }
    if (pick == n) {
      // Fewer distinct directions than k: uniform over unchosen points.
      std::size_t r = static_cast<std::size_t>(rng.Below(n - seeds.size()));
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i] && r-- == 0) {
          pick = i;
          break;
        }
      }
    }
    take(pick);
  }
  return seeds;
}

}  // namespace

KMeansResult SphericalKMeans(const UnitPoints& pts, const KMeansOptions& opt) {
  const std::size_t n = pts.n;
  const std::size_t dim = pts.dim;
  const std::size_t k = opt.k;
  if (k < 1 || k > n) throw DataError("k-means requires 1 <= k <= n");
  if (opt.max_iters < 1) throw UsageError("k-means iterations must be >= 1");

  SplitMix64 rng(opt.seed);
  std::vector<double> centroids(k * dim);
  {
    auto seeds = SeedPlusPlus(pts, k, rng);
    for (std::size_t c = 0; c < k; ++c) {
      auto src = pts.row(seeds[c]);
      std::copy(src.begin(), src.end(), centroids.begin() + c * dim);
    }
  }
  auto centroid = [&](std::size_t c) {
    return std::span<const double>(centroids.data() + c * dim, dim);
  };

  KMeansResult res;
  std::vector<std::size_t> assign(n, k);
  std::vector<double> sim(n, 0.0);
  std::vector<std::size_t> count(k);
  std::vector<double> sums(k * dim);

  for (int iter = 1; iter <= opt.max_iters; ++iter) {
    std::vector<std::size_t> prev = assign;
    std::fill(count.begin(), count.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_sim = -kInf;
      for (std::size_t c = 0; c < k; ++c) {
        const double s = DotUnit(pts.row(i), centroid(c));
        if (s > best_sim) {
          best_sim = s;
          best = c;
        }
      }
      assign[i] = best;
      sim[i] = best_sim;
      ++count[best];
    }

    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] != 0) continue;
      std::size_t victim = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (count[assign[i]] > 1 && (victim == n || sim[i] < sim[victim])) victim = i;
      }
      --count[assign[victim]];
      assign[victim] = c;
      sim[victim] = 1.0;
      ++count[c];
    }

    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto p = pts.row(i);
      double* s = sums.data() + assign[i] * dim;
      for (std::size_t j = 0; j < dim; ++j) s[j] += p[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      const double* s = sums.data() + c * dim;
      double norm = 0.0;
      for (std::size_t j = 0; j < dim; ++j) norm += s[j] * s[j];
      norm = std::sqrt(norm);
      if (norm <= 0.0) continue;  // members cancel; every direction scores 0
      for (std::size_t j = 0; j < dim; ++j) centroids[c * dim + j] = s[j] / norm;
    }

    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) objective += DotUnit(pts.row(i), centroid(assign[i]));
    res.iterations = iter;
    const bool stable = assign == prev;
    const bool small_gain = opt.tolerance > 0.0 && !res.objective.empty() &&
                            objective - res.objective.back() < opt.tolerance;
    res.objective.push_back(objective);
    if (stable || small_gain) {
      res.converged = true;
      break;
    }
  }
  res.assignment = std::move(assign);
  return res;
}

}  // namespace mvseq::clustering
