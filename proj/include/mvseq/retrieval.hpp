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

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mvseq/corpus_store.hpp"
#include "mvseq/token_matrix.hpp"

namespace mvseq {

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;

  bool operator==(const ScoredDoc&) const = default;
};

/// Entries sorted by (score desc, doc_id asc), no duplicate ids.
struct RankedList {
  std::string query_id;
  std::vector<ScoredDoc> entries;

  bool operator==(const RankedList&) const = default;
};

/// Late-interaction score: sum over query rows of the best dot product
/// against any document row. Accumulated in double.
double MaxSim(const TokenMatrix& query, const TokenMatrix& doc);

/// In-memory document set for repeated exhaustive scoring.
class DocumentSet {
 public:
  static DocumentSet Load(const Corpus& corpus);
  DocumentSet(std::vector<std::string> ids, std::vector<TokenMatrix> docs);

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  const TokenMatrix& doc(std::size_t i) const { return docs_[i]; }

  /// Exact top-min(k, N) by MaxSim, ties by doc_id ascending.
  RankedList Search(const std::string& query_id, const TokenMatrix& query,
                    std::size_t k) const;

 private:
  std::vector<std::string> ids_;
  std::vector<TokenMatrix> docs_;
  std::size_t dim_ = 0;
};

/// Scores every query against every document; lists come back in query
/// corpus order.
std::vector<RankedList> Search(const Corpus& queries, const Corpus& docs, std::size_t k,
                               std::size_t jobs = 0);

}  // namespace mvseq
