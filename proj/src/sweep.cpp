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

#include "mvseq/sweep.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

#include "mvseq/rng.hpp"

namespace mvseq {

namespace fs = std::filesystem;

namespace {

std::string Fixed6(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

double Relative(double value, double baseline) {
  return baseline > 0.0 ? value / baseline : std::numeric_limits<double>::quiet_NaN();
}

struct CellResult {
  CompressionSummary summary;
  EvalReport eval;
  double search_time = 0.0;
};

CellResult RunCell(const SweepOptions& opt, const Corpus& docs, const Corpus& queries,
                   const Qrels& qrels, const IdfTable* idf, Method method, double ratio) {
  const fs::path cell = opt.work_dir / std::string(ToString(method)) / FormatRatio(ratio);
  std::error_code ec;
  fs::remove_all(cell, ec);

  CompressionConfig config;
  config.method = method;
  config.ratio = ratio;
  config.seed = MethodSeed(opt.seed, method);
  config.kmeans_max_iters = opt.kmeans_max_iters;

  CellResult out;
  out.summary = CompressCorpus(docs, config, idf, cell / "corpus", opt.jobs);

  const auto start = std::chrono::steady_clock::now();
  const Corpus compressed = Corpus::Open(cell / "corpus");
  const auto run = Search(queries, compressed, opt.depth, opt.jobs);
  out.search_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  WriteRun(cell / "run.trec", run, "mvseq");
  out.eval = EvaluateRun(run, qrels, opt.eval);
  return out;
}

SweepRow MakeRow(const std::string& dataset, Method method, double ratio, const CellResult& r) {
  SweepRow row;
  row.dataset = dataset;
  row.method = method;
  row.ratio = ratio;
  row.achieved_ratio = r.summary.achieved_ratio;
  row.mean_tokens_per_doc =
      static_cast<double>(r.summary.output_tokens) / static_cast<double>(r.summary.docs);
  row.ndcg = r.eval.mean_ndcg;
  row.recall = r.eval.mean_recall;
  row.compress_wall_time = r.summary.wall_time;
  row.search_wall_time = r.search_time;
  return row;
}

std::ofstream OpenOutput(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

std::uint64_t MethodSeed(std::uint64_t seed, Method method) {
  return KeyedHash(seed, ToString(method), 0);
}

std::string FormatRatio(double ratio) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), ratio);
  return std::string(buf, res.ptr);
}

void SweepReport::WriteCsv(std::ostream& out) const {
  out << "dataset,method,ratio,achieved_ratio,mean_tokens_per_doc,ndcg@" << eval.k_ndcg
      << ",recall@" << eval.k_recall << ",relative_ndcg,relative_recall\n";
  for (const auto& r : rows) {
    out << r.dataset << ',' << ToString(r.method) << ',' << FormatRatio(r.ratio) << ','
        << Fixed6(r.achieved_ratio) << ',' << Fixed6(r.mean_tokens_per_doc) << ','
        << Fixed6(r.ndcg) << ',' << Fixed6(r.recall) << ',' << Fixed6(r.relative_ndcg) << ','
        << Fixed6(r.relative_recall) << '\n';
  }
}

void SweepReport::WriteCsv(const fs::path& path) const {
  auto out = OpenOutput(path);
  WriteCsv(out);
  if (!out) throw IoError("write failed: " + path.string());
}

void SweepReport::WriteTimingsCsv(std::ostream& out) const {
  out << "dataset,method,ratio,compress_wall_time,search_wall_time\n";
  for (const auto& r : rows) {
    out << r.dataset << ',' << ToString(r.method) << ',' << FormatRatio(r.ratio) << ','
        << Fixed6(r.compress_wall_time) << ',' << Fixed6(r.search_wall_time) << '\n';
  }
}

void SweepReport::WriteTimingsCsv(const fs::path& path) const {
  auto out = OpenOutput(path);
  WriteTimingsCsv(out);
  if (!out) throw IoError("write failed: " + path.string());
}

SweepReport RunSweep(const SweepOptions& opt) {
  if (opt.work_dir.empty()) throw UsageError("sweep requires a work directory");
  if (opt.ratios.empty() && !opt.methods.empty()) throw UsageError("no ratios given");
  for (double r : opt.ratios) {
    if (!(r > 0.0 && r <= 1.0)) {
      throw UsageError("ratio must be in (0,1], got " + FormatRatio(r));
    }
  }
  for (Method m : opt.methods) {
    if (m == Method::kNone) throw UsageError("method none is the implicit baseline");
  }

  const Corpus docs = Corpus::Open(opt.docs);
  const Corpus queries = Corpus::Open(opt.queries);
  const Qrels qrels = LoadQrels(opt.qrels);
  std::string dataset = opt.dataset;
  if (dataset.empty()) {
    fs::path p = opt.docs;
    if (!p.has_filename()) p = p.parent_path();
    dataset = p.filename().string();
  }

  std::optional<IdfTable> idf;
  for (Method m : opt.methods) {
    if (ScorerFor(m) == ImportanceMethod::kIdf) {
      idf = BuildIdfTable(docs);
      break;
    }
  }

  SweepReport report;
  report.eval = opt.eval;
  const CellResult base =
      RunCell(opt, docs, queries, qrels, nullptr, Method::kNone, 1.0);
  report.rows.push_back(MakeRow(dataset, Method::kNone, 1.0, base));

  for (Method m : opt.methods) {
    for (double r : opt.ratios) {
      try {
        const CellResult cell =
            RunCell(opt, docs, queries, qrels, idf ? &*idf : nullptr, m, r);
        SweepRow row = MakeRow(dataset, m, r, cell);
        row.relative_ndcg = Relative(row.ndcg, base.eval.mean_ndcg);
        row.relative_recall = Relative(row.recall, base.eval.mean_recall);
        report.rows.push_back(row);
      } catch (const Error& e) {
        std::string msg = "(" + std::string(ToString(m)) + ", " + FormatRatio(r) + "): " + e.what();
        if (!opt.keep_going) throw Error(e.kind(), msg);
        report.failures.push_back({m, r, msg});
      }
    }
  }

  if (!opt.keep_work) {
    // Only what this sweep created; the work dir itself goes if left empty.
    std::error_code ec;
    fs::remove_all(opt.work_dir / std::string(ToString(Method::kNone)), ec);
    for (Method m : opt.methods) fs::remove_all(opt.work_dir / std::string(ToString(m)), ec);
    fs::remove(opt.work_dir, ec);
  }
  return report;
}

}  // namespace mvseq
