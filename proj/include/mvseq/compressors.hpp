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

// Token-sequence compressors.
//
// Every compressor keeps row 0 (the document marker) as its own output row,
// spends the remaining C - 1 vectors of the budget on the other tokens, and
// l2-normalizes each output row once at the end. Pooling rows are means of
// the members' raw embeddings.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvseq/corpus_store.hpp"
#include "mvseq/importance.hpp"

namespace mvseq {

enum class Method {
  kNone,
  kPruneRandom,
  kPruneAttention,
  kPruneIdf,
  kPoolRandom,
  kPoolAttention,
  kPoolIdf,
  kPoolKMeans,
  kPoolHierarchical,
};

std::string_view ToString(Method m);
Method ParseMethod(std::string_view name);
/// The eight compression methods, in declaration order (excludes kNone).
const std::vector<Method>& AllCompressionMethods();
bool IsPruning(Method m);
bool IsPooling(Method m);
/// Importance scorer a method consumes, if any.
std::optional<ImportanceMethod> ScorerFor(Method m);

struct CompressionConfig {
  Method method = Method::kNone;
  double ratio = 1.0;
  std::uint64_t seed = 0;
  int kmeans_max_iters = 20;
  double kmeans_tolerance = 0.0;

  /// Throws a usage error unless 0 < ratio <= 1 and kmeans_max_iters >= 1.
  void Validate() const;
};

struct CompressedDocument {
  std::string doc_id;
  TokenMatrix embeddings;
  /// Original positions behind each output row; row 0 is always {0}.
  std::vector<std::vector<std::size_t>> provenance;
};

/// C = max(1, round_half_up(r * L)), capped at L. Counts the protected token.
std::size_t Budget(std::size_t length, double ratio);

/// Row-wise l2 normalization of the whole document (method none).
CompressedDocument NormalizeOnly(const DocumentRecord& doc);

/// Protected row plus the C - 1 best-scoring rows, in position order. Score
/// ties go to the lower position.
CompressedDocument Prune(const DocumentRecord& doc, const ImportanceScores& scores,
                         std::size_t budget);

/// The C - 1 best-scoring tokens become anchors; every other token joins the
/// anchor with the highest cosine similarity (ties to the lower anchor). Rows
/// are ordered by anchor position.
CompressedDocument PoolByAnchors(const DocumentRecord& doc, const ImportanceScores& scores,
                                 std::size_t budget);

CompressedDocument PoolKMeans(const DocumentRecord& doc, std::size_t budget,
                              std::uint64_t seed, int max_iters, double tolerance = 0.0);

/// Ward agglomeration on cosine distances, cut at C - 1 clusters. Rows are
/// ordered by each cluster's first position.
CompressedDocument PoolHierarchical(const DocumentRecord& doc, std::size_t budget);

/// Full per-document pipeline for `config`: scoring, budget and method.
CompressedDocument CompressDocument(const DocumentRecord& doc, const CompressionConfig& config,
                                    const IdfTable* idf);

struct CompressionSummary {
  std::string method;
  double ratio = 1.0;
  std::size_t docs = 0;
  std::size_t input_tokens = 0;
  std::size_t output_tokens = 0;
  double achieved_ratio = 1.0;
  double wall_time = 0.0;  // seconds
  /// Pooled docs where C = 1 forced an extra row (one pooled row after the
  /// protected one).
  std::size_t budget_overflow_docs = 0;

  nlohmann::json ToJson() const;
};

/// Compresses every document of `corpus` into a new corpus at `out`
/// (embeddings only). Output order equals input order for any `jobs`.
CompressionSummary CompressCorpus(const Corpus& corpus, const CompressionConfig& config,
                                  const IdfTable* idf, const std::filesystem::path& out,
                                  std::size_t jobs = 0);

}  // namespace mvseq
