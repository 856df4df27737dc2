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

// IR evaluation over TREC-format qrels and runs.
//
//   qrels line: query_id 0 doc_id grade
//   run line:   query_id Q0 doc_id rank score tag

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvseq/retrieval.hpp"

namespace mvseq {

/// query_id -> doc_id -> grade (>= 0).
using Judgements = std::map<std::string, int, std::less<>>;
using Qrels = std::map<std::string, Judgements, std::less<>>;

/// Duplicate (query, doc) pairs keep the last grade.
Qrels ParseQrels(std::istream& in);
Qrels LoadQrels(const std::filesystem::path& path);

/// linear: gain = grade; exp: gain = 2^grade - 1.
enum class Gain { kLinear, kExponential };
Gain ParseGain(std::string_view name);

/// DCG@k / IDCG@k with log2(rank + 1) discounts. Throws if the query is
/// missing from qrels or has no positive grade.
double NdcgAtK(const RankedList& ranked, const Qrels& qrels, std::size_t k = 10,
               Gain gain = Gain::kLinear);

/// Fraction of positively graded documents found in the top k.
double RecallAtK(const RankedList& ranked, const Qrels& qrels, std::size_t k = 100);

struct EvalOptions {
  std::size_t k_ndcg = 10;
  std::size_t k_recall = 100;
  Gain gain = Gain::kLinear;
};

struct QueryMetrics {
  std::string query_id;
  double ndcg = 0.0;
  double recall = 0.0;
};

struct EvalReport {
  EvalOptions options;
  std::vector<QueryMetrics> per_query;
  double mean_ndcg = 0.0;
  double mean_recall = 0.0;
  std::size_t query_count = 0;
  /// Run queries missing from qrels or without any positive grade.
  std::size_t skipped_count = 0;

  nlohmann::json ToJson() const;
  std::string CsvHeader() const;
  std::string CsvRow() const;
};

/// Arithmetic means over evaluable queries. Throws when there are none.
EvalReport EvaluateRun(std::span<const RankedList> run, const Qrels& qrels,
                       const EvalOptions& options = {});

void WriteRun(std::ostream& out, std::span<const RankedList> run,
              std::string_view tag = "mvseq");
void WriteRun(const std::filesystem::path& path, std::span<const RankedList> run,
              std::string_view tag = "mvseq");

/// Queries are returned in order of first appearance; ranks must be >= 1
/// and strictly increasing within each query.
std::vector<RankedList> ParseRun(std::istream& in);
std::vector<RankedList> ReadRun(const std::filesystem::path& path);

}  // namespace mvseq
