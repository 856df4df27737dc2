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

#include "mvseq/compressors.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "mvseq/clustering.hpp"
#include "mvseq/parallel.hpp"
#include "mvseq/rng.hpp"

namespace mvseq {

namespace {

using Groups = std::vector<std::vector<std::size_t>>;

struct MethodName {
  Method method;
  std::string_view name;
};

constexpr std::array<MethodName, 9> kMethodNames{{
    {Method::kNone, "none"},
    {Method::kPruneRandom, "prune_random"},
    {Method::kPruneAttention, "prune_attention"},
    {Method::kPruneIdf, "prune_idf"},
    {Method::kPoolRandom, "pool_random"},
    {Method::kPoolAttention, "pool_attention"},
    {Method::kPoolIdf, "pool_idf"},
    {Method::kPoolKMeans, "pool_kmeans"},
    {Method::kPoolHierarchical, "pool_hierarchical"},
}};

// Salt separating the k-means stream from per-position random scores,
// which use indices >= 1.
constexpr std::uint64_t kKMeansStream = 0;

std::vector<double> UnitRow(std::span<const float> row, const std::string& doc_id,
                            std::size_t r) {
  const double norm = Norm(row);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw DataError("doc " + doc_id + ": zero-norm embedding row " + std::to_string(r));
  }
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = row[j] / norm;
  return out;
}

void CheckRows(const DocumentRecord& doc) {
  if (doc.length() == 0) throw DataError("doc " + doc.doc_id + " has zero rows");
  for (std::size_t r = 0; r < doc.length(); ++r) {
    const double norm = Norm(doc.embeddings.row(r));
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw DataError("doc " + doc.doc_id + ": zero-norm embedding row " + std::to_string(r));
    }
  }
}

// Unit vectors of the non-protected rows (positions 1..L-1).
clustering::UnitPoints ContentPoints(const DocumentRecord& doc) {
  clustering::UnitPoints pts;
  pts.n = doc.length() - 1;
  pts.dim = doc.embeddings.dim();
  pts.values.reserve(pts.n * pts.dim);
  for (std::size_t p = 1; p < doc.length(); ++p) {
    auto u = UnitRow(doc.embeddings.row(p), doc.doc_id, p);
    pts.values.insert(pts.values.end(), u.begin(), u.end());
  }
  return pts;
}

// Builds the output: one row per group, the normalized mean of the members'
// raw embeddings.
CompressedDocument Materialize(const DocumentRecord& doc, Groups groups) {
  const std::size_t dim = doc.embeddings.dim();
  CompressedDocument out;
  out.doc_id = doc.doc_id;
  out.embeddings = TokenMatrix(groups.size(), dim);
  std::vector<double> acc(dim);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t p : groups[g]) {
      auto row = doc.embeddings.row(p);
      for (std::size_t j = 0; j < dim; ++j) acc[j] += row[j];
    }
    double norm = 0.0;
    for (double v : acc) norm += v * v;
    norm = std::sqrt(norm);
    if (!(norm > 0.0)) {
      throw DataError("doc " + doc.doc_id + ": pooled row " + std::to_string(g) +
                      " has zero norm");
    }
    auto dst = out.embeddings.row(g);
    for (std::size_t j = 0; j < dim; ++j) dst[j] = static_cast<float>(acc[j] / norm);
  }
  out.provenance = std::move(groups);
  return out;
}

Groups Singletons(std::size_t length) {
  Groups g(length);
  for (std::size_t p = 0; p < length; ++p) g[p] = {p};
  return g;
}

// Protected row, then every other position in a single group.
Groups ProtectedPlusRest(std::size_t length) {
  Groups g{{0}};
  if (length > 1) {
    g.emplace_back(length - 1);
    std::iota(g.back().begin(), g.back().end(), std::size_t{1});
  }
  return g;
}

void CheckScores(const DocumentRecord& doc, const ImportanceScores& scores) {
  if (scores.scores.size() + 1 != doc.length()) {
    throw DataError("doc " + doc.doc_id + ": misaligned scores (" +
                    std::to_string(scores.scores.size()) + " scores for " +
                    std::to_string(doc.length()) + " rows)");
  }
  for (double s : scores.scores) {
    if (!std::isfinite(s)) throw DataError("doc " + doc.doc_id + ": non-finite importance score");
  }
}

// Positions (1-based) of the `count` highest scores, ascending. Ties favour
// the lower position.
std::vector<std::size_t> TopPositions(const std::vector<double>& scores, std::size_t count) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  count = std::min(count, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  for (auto& i : idx) ++i;
  return idx;
}

Groups OrderByFirstMember(Groups groups) {
  for (auto& g : groups) std::sort(g.begin(), g.end());
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return groups;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view ToString(Method m) {
  for (const auto& e : kMethodNames) {
    if (e.method == m) return e.name;
  }
  return "?";
}

Method ParseMethod(std::string_view name) {
  for (const auto& e : kMethodNames) {
    if (e.name == name) return e.method;
  }
  throw UsageError("unknown method: " + std::string(name));
}

const std::vector<Method>& AllCompressionMethods() {
  static const std::vector<Method> kAll = {
      Method::kPruneRandom, Method::kPruneAttention, Method::kPruneIdf,
      Method::kPoolRandom,  Method::kPoolAttention,  Method::kPoolIdf,
      Method::kPoolKMeans,  Method::kPoolHierarchical,
  };
  return kAll;
}

bool IsPruning(Method m) {
  return m == Method::kPruneRandom || m == Method::kPruneAttention || m == Method::kPruneIdf;
}

bool IsPooling(Method m) { return m != Method::kNone && !IsPruning(m); }

std::optional<ImportanceMethod> ScorerFor(Method m) {
  switch (m) {
    case Method::kPruneRandom:
    case Method::kPoolRandom:
      return ImportanceMethod::kRandom;
    case Method::kPruneAttention:
    case Method::kPoolAttention:
      return ImportanceMethod::kAttention;
    case Method::kPruneIdf:
    case Method::kPoolIdf:
      return ImportanceMethod::kIdf;
    default:
      return std::nullopt;
  }
}

void CompressionConfig::Validate() const {
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw UsageError("ratio must be in (0,1], got " + std::to_string(ratio));
  }
  if (kmeans_max_iters < 1) throw UsageError("kmeans iterations must be >= 1");
  if (!(kmeans_tolerance >= 0.0)) throw UsageError("kmeans tolerance must be >= 0");
}

std::size_t Budget(std::size_t length, double ratio) {
  // The epsilon keeps products such as 0.75 * 10 from rounding below .5.
  const double scaled = ratio * static_cast<double>(length);
  const auto c = static_cast<std::size_t>(std::floor(scaled + 0.5 + 1e-9));
  return std::min(length, std::max<std::size_t>(1, c));
}

CompressedDocument NormalizeOnly(const DocumentRecord& doc) {
  CheckRows(doc);
  return Materialize(doc, Singletons(doc.length()));
}

CompressedDocument Prune(const DocumentRecord& doc, const ImportanceScores& scores,
                         std::size_t budget) {
  CheckRows(doc);
  CheckScores(doc, scores);
  if (budget < 1) throw DataError("budget must be >= 1");
  if (budget >= doc.length()) return Materialize(doc, Singletons(doc.length()));
  Groups groups{{0}};
  for (std::size_t p : TopPositions(scores.scores, budget - 1)) groups.push_back({p});
  return Materialize(doc, std::move(groups));
}

CompressedDocument PoolByAnchors(const DocumentRecord& doc, const ImportanceScores& scores,
                                 std::size_t budget) {
  CheckRows(doc);
  CheckScores(doc, scores);
  if (budget < 1) throw DataError("budget must be >= 1");
  const std::size_t len = doc.length();
  if (budget >= len) return Materialize(doc, Singletons(len));
  if (budget == 1) return Materialize(doc, ProtectedPlusRest(len));

  const auto pts = ContentPoints(doc);
  const auto anchors = TopPositions(scores.scores, budget - 1);
  Groups groups(anchors.size());
  std::vector<bool> is_anchor(len, false);
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    is_anchor[anchors[a]] = true;
    groups[a].push_back(anchors[a]);
  }
  for (std::size_t p = 1; p < len; ++p) {
    if (is_anchor[p]) continue;
    std::size_t best = 0;
    double best_sim = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < anchors.size(); ++a) {
      const double s = clustering::DotUnit(pts.row(p - 1), pts.row(anchors[a] - 1));
      if (s > best_sim) {
        best_sim = s;
        best = a;
      }
    }
    groups[best].push_back(p);
  }
  for (auto& g : groups) std::sort(g.begin(), g.end());
  groups.insert(groups.begin(), {0});
  return Materialize(doc, std::move(groups));
}

CompressedDocument PoolKMeans(const DocumentRecord& doc, std::size_t budget,
                              std::uint64_t seed, int max_iters, double tolerance) {
  CheckRows(doc);
  if (budget < 1) throw DataError("budget must be >= 1");
  const std::size_t len = doc.length();
  if (budget >= len) return Materialize(doc, Singletons(len));
  if (budget == 1) return Materialize(doc, ProtectedPlusRest(len));

  const auto pts = ContentPoints(doc);
  clustering::KMeansOptions opt;
  opt.k = budget - 1;
  opt.seed = KeyedHash(seed, doc.doc_id, kKMeansStream);
  opt.max_iters = max_iters;
  opt.tolerance = tolerance;
  const auto result = clustering::SphericalKMeans(pts, opt);

  Groups groups(opt.k);
  for (std::size_t i = 0; i < pts.n; ++i) groups[result.assignment[i]].push_back(i + 1);
  groups = OrderByFirstMember(std::move(groups));
  groups.insert(groups.begin(), {0});
  return Materialize(doc, std::move(groups));
}

CompressedDocument PoolHierarchical(const DocumentRecord& doc, std::size_t budget) {
  CheckRows(doc);
  if (budget < 1) throw DataError("budget must be >= 1");
  const std::size_t len = doc.length();
  if (budget >= len) return Materialize(doc, Singletons(len));
  if (budget == 1) return Materialize(doc, ProtectedPlusRest(len));

  const auto pts = ContentPoints(doc);
  const auto merges =
      clustering::WardAgglomerate(clustering::CosineDistances(pts), pts.n, budget - 1);
  Groups groups = clustering::ClustersFromMerges(pts.n, merges);
  for (auto& g : groups) {
    for (auto& p : g) ++p;
  }
  groups.insert(groups.begin(), {0});
  return Materialize(doc, std::move(groups));
}

CompressedDocument CompressDocument(const DocumentRecord& doc, const CompressionConfig& config,
                                    const IdfTable* idf) {
  if (config.method == Method::kNone) return NormalizeOnly(doc);
  const std::size_t budget = Budget(doc.length(), config.ratio);
  ImportanceScores scores;
  if (auto scorer = ScorerFor(config.method)) {
    scores = ScoreTokens(doc, *scorer, idf, config.seed);
  }
  switch (config.method) {
    case Method::kPruneRandom:
    case Method::kPruneAttention:
    case Method::kPruneIdf:
      return Prune(doc, scores, budget);
    case Method::kPoolRandom:
    case Method::kPoolAttention:
    case Method::kPoolIdf:
      return PoolByAnchors(doc, scores, budget);
    case Method::kPoolKMeans:
      return PoolKMeans(doc, budget, config.seed, config.kmeans_max_iters,
                        config.kmeans_tolerance);
    case Method::kPoolHierarchical:
      return PoolHierarchical(doc, budget);
    case Method::kNone:
      break;
  }
  return NormalizeOnly(doc);
}

nlohmann::json CompressionSummary::ToJson() const {
  return {{"method", method},
          {"ratio", ratio},
          {"docs", docs},
          {"input_tokens", input_tokens},
          {"output_tokens", output_tokens},
          {"achieved_ratio", achieved_ratio},
          {"wall_time", wall_time},
          {"budget_overflow_docs", budget_overflow_docs}};
}

CompressionSummary CompressCorpus(const Corpus& corpus, const CompressionConfig& config,
                                  const IdfTable* idf, const std::filesystem::path& out,
                                  std::size_t jobs) {
  config.Validate();
  const auto scorer = ScorerFor(config.method);
  if (scorer == ImportanceMethod::kAttention && !corpus.has_attention()) {
    throw DataError("attention requires attention totals; corpus " + corpus.path().string() +
                    " has none");
  }
  if (scorer == ImportanceMethod::kIdf) {
    if (idf == nullptr) throw DataError("idf requires an idf table");
    if (!corpus.has_token_ids()) throw DataError("idf requires token ids");
  }

  const auto start = std::chrono::steady_clock::now();
  CompressionSummary summary;
  summary.method = std::string(ToString(config.method));
  summary.ratio = config.method == Method::kNone ? 1.0 : config.ratio;

  CorpusWriter writer(out, corpus.dim(), false, false);
  const std::size_t n = corpus.size();
  const std::size_t batch = std::max<std::size_t>(64, ResolveJobs(jobs) * 16);
  std::vector<CompressedDocument> done;
  std::vector<std::size_t> lengths;
  for (std::size_t lo = 0; lo < n; lo += batch) {
    const std::size_t hi = std::min(n, lo + batch);
    done.assign(hi - lo, {});
    lengths.assign(hi - lo, 0);
    ParallelFor(hi - lo, jobs, [&](std::size_t i) {
      DocumentRecord doc = corpus.Record(lo + i);
      lengths[i] = doc.length();
      try {
        done[i] = CompressDocument(doc, config, idf);
      } catch (const Error& e) {
        const std::string msg = e.what();
        if (msg.find(doc.doc_id) != std::string::npos) throw;
        throw Error(e.kind(), "doc " + doc.doc_id + ": " + msg);
      }
    });
    for (std::size_t i = 0; i < done.size(); ++i) {
      const std::size_t in_len = lengths[i];
      const std::size_t out_len = done[i].embeddings.rows();
      summary.input_tokens += in_len;
      summary.output_tokens += out_len;
      if (IsPooling(config.method) && in_len > 1 && Budget(in_len, config.ratio) == 1) {
        ++summary.budget_overflow_docs;
      }
      writer.Add({done[i].doc_id, std::move(done[i].embeddings), {}, {}});
    }
  }
  writer.Finish();
  summary.docs = n;
  summary.achieved_ratio =
      static_cast<double>(summary.output_tokens) / static_cast<double>(summary.input_tokens);
  summary.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

}  // namespace mvseq
