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

// mvseq: compress multi-vector corpora along the token axis and measure
// retrieval quality.
//
// Exit codes: 0 success, 1 usage error, 2 data or I/O error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mvseq/compressors.hpp"
#include "mvseq/corpus_store.hpp"
#include "mvseq/importance.hpp"
#include "mvseq/metrics.hpp"
#include "mvseq/retrieval.hpp"
#include "mvseq/sweep.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct CompressArgs {
  std::string input, output, method = "none", idf_table;
  std::optional<double> ratio;
  std::uint64_t seed = 0;
  int kmeans_iters = 20;
  double kmeans_tol = 0.0;
  std::size_t jobs = 0;
};

struct SearchArgs {
  std::string docs, queries, run, tag = "mvseq";
  std::size_t k = 100;
  std::size_t jobs = 0;
};

struct EvalArgs {
  std::string run, qrels, csv, gain = "linear";
  std::size_t k_ndcg = 10, k_recall = 100;
};

struct SweepArgs {
  std::string docs, queries, qrels, report, timings, work_dir, dataset, gain = "linear";
  std::vector<std::string> methods;
  std::vector<double> ratios = mvseq::kDefaultRatios;
  std::uint64_t seed = 0;
  bool keep_work = false, keep_going = false;
  std::size_t jobs = 0, depth = 100;
  int kmeans_iters = 20;
};

int RunCompress(const CompressArgs& a) {
  mvseq::CompressionConfig config;
  config.method = mvseq::ParseMethod(a.method);
  if (config.method != mvseq::Method::kNone && !a.ratio) {
    throw mvseq::UsageError("--ratio is required for method " + a.method);
  }
  config.ratio = config.method == mvseq::Method::kNone ? 1.0 : *a.ratio;
  config.seed = a.seed;
  config.kmeans_max_iters = a.kmeans_iters;
  config.kmeans_tolerance = a.kmeans_tol;
  config.Validate();

  const auto corpus = mvseq::Corpus::Open(a.input);
  std::optional<mvseq::IdfTable> idf;
  if (mvseq::ScorerFor(config.method) == mvseq::ImportanceMethod::kIdf) {
    if (!a.idf_table.empty()) {
      idf = mvseq::IdfTable::Load(a.idf_table);
    } else {
      idf = mvseq::BuildIdfTable(corpus);
    }
  }
  const auto summary =
      mvseq::CompressCorpus(corpus, config, idf ? &*idf : nullptr, a.output, a.jobs);
  std::cout << summary.ToJson().dump(2) << '\n';
  return 0;
}

int RunSearch(const SearchArgs& a) {
  if (a.k == 0) throw mvseq::UsageError("-k must be >= 1");
  const auto queries = mvseq::Corpus::Open(a.queries);
  const auto docs = mvseq::Corpus::Open(a.docs);
  const auto run = mvseq::Search(queries, docs, a.k, a.jobs);
  mvseq::WriteRun(a.run, run, a.tag);
  return 0;
}

int RunEval(const EvalArgs& a) {
  mvseq::EvalOptions opt;
  opt.k_ndcg = a.k_ndcg;
  opt.k_recall = a.k_recall;
  opt.gain = mvseq::ParseGain(a.gain);
  const auto run = mvseq::ReadRun(a.run);
  const auto qrels = mvseq::LoadQrels(a.qrels);
  const auto report = mvseq::EvaluateRun(run, qrels, opt);
  std::cout << report.ToJson().dump(2) << '\n';
  if (!a.csv.empty()) {
    std::ofstream out(a.csv, std::ios::trunc);
    out << report.CsvHeader() << '\n' << report.CsvRow() << '\n';
    if (!out) throw mvseq::IoError("cannot write " + a.csv);
  }
  return 0;
}

int RunSweep(const SweepArgs& a) {
  mvseq::SweepOptions opt;
  opt.docs = a.docs;
  opt.queries = a.queries;
  opt.qrels = a.qrels;
  opt.dataset = a.dataset;
  if (!a.methods.empty()) {
    opt.methods.clear();
    for (const auto& m : a.methods) opt.methods.push_back(mvseq::ParseMethod(m));
  }
  opt.ratios = a.ratios;
  opt.seed = a.seed;
  opt.keep_work = a.keep_work;
  opt.keep_going = a.keep_going;
  opt.jobs = a.jobs;
  opt.depth = a.depth;
  opt.kmeans_max_iters = a.kmeans_iters;
  opt.eval.gain = mvseq::ParseGain(a.gain);

  const fs::path report_path = a.report;
  if (!a.work_dir.empty()) {
    opt.work_dir = a.work_dir;
  } else if (const char* env = std::getenv("MVSEQ_WORKDIR"); env != nullptr && *env != '\0') {
    opt.work_dir = env;
  } else {
    opt.work_dir = report_path.parent_path() / (report_path.stem().string() + ".work");
  }

  const auto report = mvseq::RunSweep(opt);
  report.WriteCsv(report_path);
  fs::path timings = a.timings;
  if (timings.empty()) {
    timings = report_path.parent_path() / (report_path.stem().string() + ".timings.csv");
  }
  report.WriteTimingsCsv(timings);
  for (const auto& f : report.failures) std::cerr << "failed " << f.message << '\n';
  std::cerr << "wrote " << report.rows.size() << " rows to " << report_path.string() << '\n';
  return report.failures.empty() ? 0 : kExitData;
}

int RunIdf(const std::string& corpus_dir, const std::string& output) {
  const auto corpus = mvseq::Corpus::Open(corpus_dir);
  mvseq::BuildIdfTable(corpus).Save(output);
  return 0;
}

int RunValidate(const std::string& corpus_dir) {
  const auto problems = mvseq::ValidateCorpus(corpus_dir);
  for (const auto& v : problems) std::cout << v.ToString() << '\n';
  if (problems.empty()) std::cout << "ok\n";
  return problems.empty() ? 0 : kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Token-sequence compression and evaluation for multi-vector retrieval"};
  app.require_subcommand(1);

  CompressArgs ca;
  auto* compress = app.add_subcommand("compress", "Compress a document corpus");
  compress->add_option("--input,-i", ca.input, "Input corpus directory")->required();
  compress->add_option("--output,-o", ca.output, "Output corpus directory")->required();
  compress->add_option("--method,-m", ca.method,
                       "none|prune_{random,attention,idf}|pool_{random,attention,idf,kmeans,"
                       "hierarchical}");
  compress->add_option("--ratio,-r", ca.ratio, "Keep ratio in (0,1]");
  compress->add_option("--seed", ca.seed, "Seed for random scores and k-means");
  compress->add_option("--idf-table", ca.idf_table, "IDF table JSON (built from input if absent)");
  compress->add_option("--kmeans-iters", ca.kmeans_iters, "Maximum k-means iterations");
  compress->add_option("--kmeans-tol", ca.kmeans_tol, "k-means objective tolerance (0 = stable)");
  compress->add_option("--jobs,-j", ca.jobs, "Worker threads (0 = all cores)");

  SearchArgs sa;
  auto* search = app.add_subcommand("search", "Exhaustive MaxSim search");
  search->add_option("--docs,-d", sa.docs, "Document corpus directory")->required();
  search->add_option("--queries,-q", sa.queries, "Query corpus directory")->required();
  search->add_option("-k", sa.k, "Results per query")->capture_default_str();
  search->add_option("--run,-o", sa.run, "Output TREC run file")->required();
  search->add_option("--tag", sa.tag, "Run tag column")->capture_default_str();
  search->add_option("--jobs,-j", sa.jobs, "Worker threads (0 = all cores)");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Evaluate a TREC run");
  eval->add_option("--run", ea.run, "TREC run file")->required();
  eval->add_option("--qrels", ea.qrels, "TREC qrels file")->required();
  eval->add_option("--k-ndcg", ea.k_ndcg, "nDCG cutoff")->capture_default_str();
  eval->add_option("--k-recall", ea.k_recall, "Recall cutoff")->capture_default_str();
  eval->add_option("--gain", ea.gain, "linear|exp")->capture_default_str();
  eval->add_option("--csv", ea.csv, "Also write a CSV header and row here");

  SweepArgs wa;
  auto* sweep = app.add_subcommand("sweep", "Sweep methods x keep ratios against a baseline");
  sweep->add_option("--docs", wa.docs, "Document corpus directory")->required();
  sweep->add_option("--queries", wa.queries, "Query corpus directory")->required();
  sweep->add_option("--qrels", wa.qrels, "TREC qrels file")->required();
  sweep->add_option("--report", wa.report, "Report CSV path")->required();
  sweep->add_option("--timings", wa.timings, "Timing CSV path (default <report>.timings.csv)");
  sweep->add_option("--methods", wa.methods, "Comma-separated methods (default: all eight)")
      ->delimiter(',');
  sweep->add_option("--ratios", wa.ratios, "Comma-separated keep ratios")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--seed", wa.seed, "Top-level seed");
  sweep->add_option("--dataset", wa.dataset, "Dataset label (default: docs dir name)");
  sweep->add_option("--work-dir", wa.work_dir, "Intermediate directory (env MVSEQ_WORKDIR)");
  sweep->add_flag("--keep-work", wa.keep_work, "Retain intermediate corpora and runs");
  sweep->add_flag("--keep-going", wa.keep_going, "Continue past failing cells");
  sweep->add_option("--jobs,-j", wa.jobs, "Worker threads (0 = all cores)");
  sweep->add_option("--depth", wa.depth, "Search cutoff per query")->capture_default_str();
  sweep->add_option("--gain", wa.gain, "linear|exp")->capture_default_str();
  sweep->add_option("--kmeans-iters", wa.kmeans_iters, "Maximum k-means iterations");

  std::string idf_corpus, idf_out;
  auto* idf = app.add_subcommand("idf", "Build an IDF table from a corpus with token ids");
  idf->add_option("--corpus", idf_corpus, "Corpus directory")->required();
  idf->add_option("--output,-o", idf_out, "Output JSON path")->required();

  std::string validate_corpus;
  auto* validate = app.add_subcommand("validate", "Check corpus invariants");
  validate->add_option("corpus", validate_corpus, "Corpus directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*compress) return RunCompress(ca);
    if (*search) return RunSearch(sa);
    if (*eval) return RunEval(ea);
    if (*sweep) return RunSweep(wa);
    if (*idf) return RunIdf(idf_corpus, idf_out);
    if (*validate) return RunValidate(validate_corpus);
  } catch (const mvseq::Error& e) {
    std::cerr << "mvseq: " << e.what() << '\n';
    return e.kind() == mvseq::ErrorKind::kUsage ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "mvseq: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
