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

#include "mvseq/retrieval.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "mvseq/parallel.hpp"

namespace mvseq {

namespace {

// Document width first, then query width.
std::string DimMismatch(std::size_t doc_dim, std::size_t query_dim) {
  return "dimension mismatch " + std::to_string(doc_dim) + " vs " + std::to_string(query_dim);
}

}  // namespace

double MaxSim(const TokenMatrix& query, const TokenMatrix& doc) {
  if (query.empty() || doc.empty()) throw DataError("maxsim on an empty matrix");
  if (query.dim() != doc.dim()) throw DataError(DimMismatch(doc.dim(), query.dim()));
  double total = 0.0;
  for (std::size_t i = 0; i < query.rows(); ++i) {
    const auto q = query.row(i);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < doc.rows(); ++j) best = std::max(best, Dot(q, doc.row(j)));
    total += best;
  }
  return total;
}

DocumentSet::DocumentSet(std::vector<std::string> ids, std::vector<TokenMatrix> docs)
    : ids_(std::move(ids)), docs_(std::move(docs)) {
  if (ids_.size() != docs_.size()) throw DataError("document ids and matrices differ in count");
  if (docs_.empty()) throw DataError("empty document corpus");
  dim_ = docs_.front().dim();
  for (const auto& d : docs_) {
    if (d.dim() != dim_) throw DataError(DimMismatch(d.dim(), dim_));
  }
}

DocumentSet DocumentSet::Load(const Corpus& corpus) {
  std::vector<std::string> ids;
  std::vector<TokenMatrix> docs;
  ids.reserve(corpus.size());
  docs.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    ids.push_back(corpus.manifest().docs[i].id);
    docs.push_back(corpus.Embeddings(i));
  }
  return DocumentSet(std::move(ids), std::move(docs));
}

RankedList DocumentSet::Search(const std::string& query_id, const TokenMatrix& query,
                               std::size_t k) const {
  if (k == 0) throw UsageError("k must be >= 1");
  if (query.dim() != dim_) throw DataError(DimMismatch(dim_, query.dim()));
  std::vector<double> scores(docs_.size());
  for (std::size_t i = 0; i < docs_.size(); ++i) scores[i] = MaxSim(query, docs_[i]);

  std::vector<std::size_t> order(docs_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t top = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return ids_[a] < ids_[b];
                    });
  RankedList out;
  out.query_id = query_id;
  out.entries.reserve(top);
  for (std::size_t r = 0; r < top; ++r) out.entries.push_back({ids_[order[r]], scores[order[r]]});
  return out;
}

std::vector<RankedList> Search(const Corpus& queries, const Corpus& docs, std::size_t k,
                               std::size_t jobs) {
  if (queries.dim() != docs.dim()) throw DataError(DimMismatch(docs.dim(), queries.dim()));
  const DocumentSet set = DocumentSet::Load(docs);
  std::vector<RankedList> out(queries.size());
  ParallelFor(queries.size(), jobs, [&](std::size_t i) {
    out[i] = set.Search(queries.manifest().docs[i].id, queries.Embeddings(i), k);
  });
  return out;
}

}  // namespace mvseq
