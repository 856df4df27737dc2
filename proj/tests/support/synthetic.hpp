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

// Bundle corpora: each document is a marker row plus a few distinct unit
// vectors, each repeated several times at shuffled positions. Queries copy
// one bundle vector of one document, so pooling that keeps every bundle
// loses nothing while dropping rows can lose the match.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "mvseq/corpus_store.hpp"
#include "test_support.hpp"

namespace mvseq::testing {

struct BundleSpec {
  std::size_t docs = 50;
  std::size_t bundles = 8;
  std::size_t copies = 5;
  std::size_t dim = 128;
  std::size_t queries = 20;
  std::uint32_t vocab = 2000;
  std::uint64_t seed = 1;
};

struct BundlePaths {
  std::filesystem::path docs, queries, qrels;
};

inline BundlePaths WriteBundleCorpus(const std::filesystem::path& root, const BundleSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::exponential_distribution<float> attention(1.0f);
  // Zipf-like ids: low ids are common, so idf varies across bundles.
  std::vector<double> weights(spec.vocab);
  for (std::uint32_t t = 0; t < spec.vocab; ++t) weights[t] = 1.0 / (t + 1.0);
  std::discrete_distribution<std::uint32_t> token(weights.begin(), weights.end());

  std::vector<DocumentRecord> docs;
  std::vector<std::vector<std::vector<float>>> bundle_vectors;
  for (std::size_t d = 0; d < spec.docs; ++d) {
    DocumentRecord rec;
    rec.doc_id = "doc" + std::to_string(d);
    std::vector<std::vector<float>> vecs;
    std::vector<std::uint32_t> ids;
    for (std::size_t b = 0; b < spec.bundles; ++b) {
      vecs.push_back(UnitVector(rng, spec.dim));
      ids.push_back(token(rng));
    }
    std::vector<std::size_t> order;
    for (std::size_t b = 0; b < spec.bundles; ++b) {
      for (std::size_t c = 0; c < spec.copies; ++c) order.push_back(b);
    }
    std::shuffle(order.begin(), order.end(), rng);

    rec.embeddings.append_row(UnitVector(rng, spec.dim));
    rec.token_ids.push_back(0);
    rec.attention.push_back(attention(rng));
    for (std::size_t b : order) {
      rec.embeddings.append_row(vecs[b]);
      rec.token_ids.push_back(ids[b]);
      rec.attention.push_back(attention(rng));
    }
    docs.push_back(std::move(rec));
    bundle_vectors.push_back(std::move(vecs));
  }

  std::vector<std::size_t> targets(spec.docs);
  for (std::size_t d = 0; d < spec.docs; ++d) targets[d] = d;
  std::shuffle(targets.begin(), targets.end(), rng);
  targets.resize(std::min(spec.queries, spec.docs));

  std::vector<DocumentRecord> queries;
  std::string qrels;
  for (std::size_t q = 0; q < targets.size(); ++q) {
    const std::size_t d = targets[q];
    const std::size_t b = rng() % spec.bundles;
    DocumentRecord rec;
    rec.doc_id = "q" + std::to_string(q);
    rec.embeddings.append_row(bundle_vectors[d][b]);
    queries.push_back(std::move(rec));
    qrels += "q" + std::to_string(q) + " 0 doc" + std::to_string(d) + " 1\n";
  }

  BundlePaths paths{root / "docs", root / "queries", root / "qrels.txt"};
  WriteCorpus(docs, paths.docs);
  WriteCorpus(queries, paths.queries);
  std::ofstream(paths.qrels) << qrels;
  return paths;
}

}  // namespace mvseq::testing
