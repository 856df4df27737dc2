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

#include "mvseq/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace mvseq {

namespace {

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool ParseNumber(std::string_view s, T& value) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc() && ptr == s.data() + s.size();
}

Error LineError(std::string_view what, std::size_t line_no, std::string_view detail) {
  return DataError(std::string(what) + " line " + std::to_string(line_no) + ": " +
                   std::string(detail));
}

double GainOf(int grade, Gain gain) {
  if (grade <= 0) return 0.0;
  return gain == Gain::kLinear ? static_cast<double>(grade) : std::exp2(grade) - 1.0;
}

const Judgements& JudgementsFor(const RankedList& ranked,
                                                             const Qrels& qrels) {
  auto it = qrels.find(ranked.query_id);
  if (it == qrels.end()) throw DataError("query " + ranked.query_id + " absent from qrels");
  return it->second;
}

std::size_t PositiveCount(const Judgements& judged) {
  return static_cast<std::size_t>(
      std::count_if(judged.begin(), judged.end(), [](const auto& kv) { return kv.second > 0; }));
}

std::ifstream OpenInput(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("missing file: " + path.string());
  return in;
}

std::string Fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

Qrels ParseQrels(std::istream& in) {
  Qrels qrels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto f = SplitFields(line);
    if (f.empty()) continue;
    if (f.size() != 4) {
      throw LineError("qrels", line_no, "expected 4 fields, got " + std::to_string(f.size()));
    }
    int grade = 0;
    if (!ParseNumber(f[3], grade)) throw LineError("qrels", line_no, "grade is not an integer");
    if (grade < 0) throw LineError("qrels", line_no, "negative grade");
    qrels[std::string(f[0])][std::string(f[2])] = grade;
  }
  return qrels;
}

Qrels LoadQrels(const std::filesystem::path& path) {
  auto in = OpenInput(path);
  return ParseQrels(in);
}

Gain ParseGain(std::string_view name) {
  if (name == "linear") return Gain::kLinear;
  if (name == "exp") return Gain::kExponential;
  throw UsageError("unknown gain: " + std::string(name) + " (expected linear|exp)");
}

double NdcgAtK(const RankedList& ranked, const Qrels& qrels, std::size_t k, Gain gain) {
  const auto& judged = JudgementsFor(ranked, qrels);
  if (PositiveCount(judged) == 0) {
    throw DataError("query " + ranked.query_id + " has no relevant documents");
  }
  double dcg = 0.0;
  const std::size_t depth = std::min(k, ranked.entries.size());
  for (std::size_t i = 0; i < depth; ++i) {
    auto it = judged.find(ranked.entries[i].doc_id);
    if (it == judged.end()) continue;
    dcg += GainOf(it->second, gain) / std::log2(static_cast<double>(i) + 2.0);
  }
  std::vector<int> grades;
  for (const auto& [doc, g] : judged) grades.push_back(g);
  std::sort(grades.begin(), grades.end(), std::greater<>());
  double idcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, grades.size()); ++i) {
    idcg += GainOf(grades[i], gain) / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg / idcg;
}

double RecallAtK(const RankedList& ranked, const Qrels& qrels, std::size_t k) {
  const auto& judged = JudgementsFor(ranked, qrels);
  const std::size_t relevant = PositiveCount(judged);
  if (relevant == 0) throw DataError("query " + ranked.query_id + " has no relevant documents");
  std::size_t found = 0;
  const std::size_t depth = std::min(k, ranked.entries.size());
  for (std::size_t i = 0; i < depth; ++i) {
    auto it = judged.find(ranked.entries[i].doc_id);
    if (it != judged.end() && it->second > 0) ++found;
  }
  return static_cast<double>(found) / static_cast<double>(relevant);
}

EvalReport EvaluateRun(std::span<const RankedList> run, const Qrels& qrels,
                       const EvalOptions& options) {
  EvalReport report;
  report.options = options;
  for (const auto& ranked : run) {
    auto it = qrels.find(ranked.query_id);
    if (it == qrels.end() || PositiveCount(it->second) == 0) {
      ++report.skipped_count;
      continue;
    }
    QueryMetrics m;
    m.query_id = ranked.query_id;
    m.ndcg = NdcgAtK(ranked, qrels, options.k_ndcg, options.gain);
    m.recall = RecallAtK(ranked, qrels, options.k_recall);
    report.mean_ndcg += m.ndcg;
    report.mean_recall += m.recall;
    report.per_query.push_back(std::move(m));
  }
  report.query_count = report.per_query.size();
  if (report.query_count == 0) {
    throw DataError("no evaluable queries: run and qrels share no query with relevant documents");
  }
  report.mean_ndcg /= static_cast<double>(report.query_count);
  report.mean_recall /= static_cast<double>(report.query_count);
  return report;
}

nlohmann::json EvalReport::ToJson() const {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& m : per_query) {
    per.push_back({{"query_id", m.query_id}, {"ndcg", m.ndcg}, {"recall", m.recall}});
  }
  return {{"ndcg@" + std::to_string(options.k_ndcg), mean_ndcg},
          {"recall@" + std::to_string(options.k_recall), mean_recall},
          {"gain", options.gain == Gain::kLinear ? "linear" : "exp"},
          {"query_count", query_count},
          {"skipped_count", skipped_count},
          {"per_query", std::move(per)}};
}

std::string EvalReport::CsvHeader() const {
  return "ndcg@" + std::to_string(options.k_ndcg) + ",recall@" +
         std::to_string(options.k_recall) + ",query_count,skipped_count";
}

std::string EvalReport::CsvRow() const {
  return Fixed6(mean_ndcg) + "," + Fixed6(mean_recall) + "," + std::to_string(query_count) +
         "," + std::to_string(skipped_count);
}

void WriteRun(std::ostream& out, std::span<const RankedList> run, std::string_view tag) {
  for (const auto& ranked : run) {
    for (std::size_t i = 0; i < ranked.entries.size(); ++i) {
      const auto& e = ranked.entries[i];
      out << ranked.query_id << " Q0 " << e.doc_id << ' ' << (i + 1) << ' ' << Fixed6(e.score)
          << ' ' << tag << '\n';
    }
  }
}

void WriteRun(const std::filesystem::path& path, std::span<const RankedList> run,
              std::string_view tag) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  WriteRun(out, run, tag);
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<RankedList> ParseRun(std::istream& in) {
  std::vector<RankedList> run;
  std::unordered_map<std::string, std::size_t> slot;
  std::unordered_map<std::string, long> last_rank;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto f = SplitFields(line);
    if (f.empty()) continue;
    if (f.size() != 6) {
      throw LineError("run", line_no, "expected 6 fields, got " + std::to_string(f.size()));
    }
    long rank = 0;
    double score = 0.0;
    if (!ParseNumber(f[3], rank) || rank < 1) throw LineError("run", line_no, "bad rank");
    if (!ParseNumber(f[4], score)) throw LineError("run", line_no, "bad score");

    std::string qid(f[0]);
    auto [it, fresh] = slot.try_emplace(qid, run.size());
    if (fresh) run.push_back({qid, {}});
    if (!fresh && rank <= last_rank[qid]) {
      throw LineError("run", line_no, "non-monotone rank for query " + qid);
    }
    last_rank[qid] = rank;
    if (!seen.insert(qid + '\n' + std::string(f[2])).second) {
      throw LineError("run", line_no, "duplicate document " + std::string(f[2]));
    }
    run[it->second].entries.push_back({std::string(f[2]), score});
  }
  return run;
}

std::vector<RankedList> ReadRun(const std::filesystem::path& path) {
  auto in = OpenInput(path);
  return ParseRun(in);
}

}  // namespace mvseq
