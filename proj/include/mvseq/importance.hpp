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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvseq/corpus_store.hpp"

namespace mvseq {

enum class ImportanceMethod { kRandom, kAttention, kIdf };

std::string_view ToString(ImportanceMethod m);

/// Corpus-level document frequencies. idf(t) = ln((N + 1) / (df(t) + 1)),
/// which is finite and non-negative for every t, seen or not.
class IdfTable {
 public:
  IdfTable() = default;

  /// Counts each distinct id in `token_ids` once.
  void AddDocument(std::span<const std::uint32_t> token_ids);

  std::uint64_t doc_count() const noexcept { return doc_count_; }
  std::uint64_t df(std::uint32_t token) const;
  double idf(std::uint32_t token) const;
  const std::unordered_map<std::uint32_t, std::uint64_t>& df_map() const noexcept {
    return df_;
  }

  /// {"doc_count": N, "df": {"<token_id>": count, ...}}
  nlohmann::json ToJson() const;
  static IdfTable FromJson(const nlohmann::json& j);
  void Save(const std::filesystem::path& path) const;
  static IdfTable Load(const std::filesystem::path& path);

 private:
  std::uint64_t doc_count_ = 0;
  std::unordered_map<std::uint32_t, std::uint64_t> df_;
};

IdfTable BuildIdfTable(const Corpus& corpus);

/// Scores for positions 1..L-1; position 0 is protected and never scored.
struct ImportanceScores {
  std::string doc_id;
  std::vector<double> scores;
};

/// random:    ToUnit(KeyedHash(seed, doc_id, position)), independent of r
/// attention: attention[position] verbatim
/// idf:       idf(token_ids[position])
ImportanceScores ScoreTokens(const DocumentRecord& doc, ImportanceMethod method,
                             const IdfTable* idf, std::uint64_t seed);

}  // namespace mvseq
