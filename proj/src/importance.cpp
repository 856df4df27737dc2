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

#include "mvseq/importance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "mvseq/rng.hpp"

namespace mvseq {

using nlohmann::json;

std::string_view ToString(ImportanceMethod m) {
  switch (m) {
    case ImportanceMethod::kRandom: return "random";
    case ImportanceMethod::kAttention: return "attention";
    case ImportanceMethod::kIdf: return "idf";
  }
  return "?";
}

void IdfTable::AddDocument(std::span<const std::uint32_t> token_ids) {
  std::unordered_set<std::uint32_t> distinct(token_ids.begin(), token_ids.end());
  for (auto t : distinct) ++df_[t];
  ++doc_count_;
}

std::uint64_t IdfTable::df(std::uint32_t token) const {
  auto it = df_.find(token);
  return it == df_.end() ? 0 : it->second;
}

double IdfTable::idf(std::uint32_t token) const {
  return std::log(static_cast<double>(doc_count_ + 1) /
                  static_cast<double>(df(token) + 1));
}

json IdfTable::ToJson() const {
  // Sorted keys keep the file stable across runs.
  std::vector<std::pair<std::uint32_t, std::uint64_t>> sorted(df_.begin(), df_.end());
  std::sort(sorted.begin(), sorted.end());
  json df_json = json::object();
  for (const auto& [t, c] : sorted) df_json[std::to_string(t)] = c;
  return {{"doc_count", doc_count_}, {"df", std::move(df_json)}};
}

IdfTable IdfTable::FromJson(const json& j) {
  IdfTable t;
  try {
    t.doc_count_ = j.at("doc_count").get<std::uint64_t>();
    for (const auto& [key, value] : j.at("df").items()) {
      auto count = value.get<std::uint64_t>();
      if (count < 1 || count > t.doc_count_) {
        throw DataError("idf table: df of token " + key + " outside [1, doc_count]");
      }
      t.df_[static_cast<std::uint32_t>(std::stoul(key))] = count;
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed idf table: ") + e.what());
  } catch (const std::logic_error&) {
    throw DataError("malformed idf table: non-numeric token id");
  }
  return t;
}

void IdfTable::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  out << ToJson().dump() << '\n';
  if (!out) throw IoError("cannot write " + path.string());
}

IdfTable IdfTable::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("missing file: " + path.string());
  try {
    return FromJson(json::parse(in));
  } catch (const json::parse_error& e) {
    throw DataError("malformed idf table " + path.string() + ": " + e.what());
  }
}

IdfTable BuildIdfTable(const Corpus& corpus) {
  if (!corpus.has_token_ids()) throw DataError("idf requires token ids");
  IdfTable table;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    table.AddDocument(corpus.Record(i).token_ids);
  }
  return table;
}

ImportanceScores ScoreTokens(const DocumentRecord& doc, ImportanceMethod method,
                             const IdfTable* idf, std::uint64_t seed) {
  const std::size_t len = doc.length();
  ImportanceScores out;
  out.doc_id = doc.doc_id;
  out.scores.resize(len > 0 ? len - 1 : 0);
  switch (method) {
    case ImportanceMethod::kRandom:
      for (std::size_t p = 1; p < len; ++p) {
        out.scores[p - 1] = ToUnit(KeyedHash(seed, doc.doc_id, p));
      }
      break;
    case ImportanceMethod::kAttention:
      if (doc.attention.size() != len) {
        throw DataError("attention requires attention totals (doc " + doc.doc_id + ")");
      }
      for (std::size_t p = 1; p < len; ++p) out.scores[p - 1] = doc.attention[p];
      break;
    case ImportanceMethod::kIdf:
      if (idf == nullptr) throw DataError("idf requires an idf table");
      if (doc.token_ids.size() != len) {
        throw DataError("idf requires token ids (doc " + doc.doc_id + ")");
      }
      for (std::size_t p = 1; p < len; ++p) out.scores[p - 1] = idf->idf(doc.token_ids[p]);
      break;
  }
  return out;
}

}  // namespace mvseq
