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

#include <gtest/gtest.h>

#include <sstream>

#include "mvseq/error.hpp"
#include "synthetic.hpp"
#include "test_support.hpp"

namespace mvseq {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

testing::BundleSpec SmallSpec() {
  testing::BundleSpec s;
  s.docs = 12;
  s.bundles = 4;
  s.copies = 3;
  s.dim = 16;
  s.queries = 6;
  s.vocab = 40;
  return s;
}

SweepOptions Options(const testing::BundlePaths& p, const fs::path& work) {
  SweepOptions o;
  o.docs = p.docs;
  o.queries = p.queries;
  o.qrels = p.qrels;
  o.work_dir = work;
  o.jobs = 1;
  return o;
}

std::string Csv(const SweepReport& r) {
  std::ostringstream out;
  r.WriteCsv(out);
  return out.str();
}

TEST(Sweep, DefaultGridHasFortyOneRows) {
  TempDir tmp;
  const auto paths = testing::WriteBundleCorpus(tmp.path(), SmallSpec());
  const auto report = RunSweep(Options(paths, tmp / "work"));
  ASSERT_EQ(report.rows.size(), 41u);
  EXPECT_EQ(report.rows[0].method, Method::kNone);
  EXPECT_DOUBLE_EQ(report.rows[0].relative_ndcg, 1.0);
  EXPECT_EQ(report.rows[0].dataset, "docs");
  EXPECT_FALSE(fs::exists(tmp / "work"));
  const auto csv = Csv(report);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "dataset,method,ratio,achieved_ratio,mean_tokens_per_doc,ndcg@10,recall@100,"
            "relative_ndcg,relative_recall");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 42);
}

TEST(Sweep, SingleCellAndRetainedWorkDir) {
  TempDir tmp;
  const auto paths = testing::WriteBundleCorpus(tmp.path(), SmallSpec());
  auto opt = Options(paths, tmp / "work");
  opt.methods = {Method::kPoolHierarchical};
  opt.ratios = {0.2};
  opt.keep_work = true;
  const auto report = RunSweep(opt);
  ASSERT_EQ(report.rows.size(), 2u);
  EXPECT_EQ(report.rows[1].method, Method::kPoolHierarchical);
  EXPECT_TRUE(fs::exists(tmp / "work/pool_hierarchical/0.2/corpus/manifest.json"));
  EXPECT_TRUE(fs::exists(tmp / "work/pool_hierarchical/0.2/run.trec"));
  EXPECT_TRUE(fs::exists(tmp / "work/none/1/run.trec"));
}

TEST(Sweep, BaselineMatchesDirectSearchAndEval) {
  TempDir tmp;
  const auto paths = testing::WriteBundleCorpus(tmp.path(), SmallSpec());
  auto opt = Options(paths, tmp / "work");
  opt.methods = {};
  opt.ratios = {};
  const auto report = RunSweep(opt);
  ASSERT_EQ(report.rows.size(), 1u);
  const auto run = Search(Corpus::Open(paths.queries), Corpus::Open(paths.docs), 100);
  const auto eval = EvaluateRun(run, LoadQrels(paths.qrels));
  EXPECT_DOUBLE_EQ(report.rows[0].ndcg, eval.mean_ndcg);
  EXPECT_DOUBLE_EQ(report.rows[0].recall, eval.mean_recall);
}

TEST(Sweep, EqualSeedsGiveIdenticalCsv) {
  TempDir tmp;
  const auto paths = testing::WriteBundleCorpus(tmp.path(), SmallSpec());
  auto opt = Options(paths, tmp / "work");
  opt.ratios = {0.2, 0.5};
  opt.seed = 99;
  const auto a = Csv(RunSweep(opt));
  opt.jobs = 3;
  const auto b = Csv(RunSweep(opt));
  EXPECT_EQ(a, b);
}

TEST(Sweep, FailingCellCarriesContext) {
  TempDir tmp;
  const auto paths = testing::WriteBundleCorpus(tmp.path(), SmallSpec());
  // Remove token ids so idf methods fail while the others succeed.
  const auto corpus = Corpus::Open(paths.docs);
  std::vector<DocumentRecord> stripped;
  for (auto rec : corpus) {
    rec.token_ids.clear();
    stripped.push_back(std::move(rec));
  }
  WriteCorpus(stripped, tmp / "stripped");
  auto opt = Options(paths, tmp / "work");
  opt.docs = tmp / "stripped";
  opt.methods = {Method::kPruneIdf};
  opt.ratios = {0.5};
  try {
    RunSweep(opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("idf requires token ids"), std::string::npos);
  }
  // Built up front, so keep-going cannot skip it either.
  opt.keep_going = true;
  EXPECT_MVSEQ_ERROR(RunSweep(opt), kData);

  opt.methods = {Method::kPruneAttention, Method::kPoolRandom};
  const auto ok = RunSweep(opt);
  EXPECT_EQ(ok.rows.size(), 3u);
}

TEST(Sweep, KeepGoingRecordsFailures) {
  TempDir tmp;
  const auto paths = testing::WriteBundleCorpus(tmp.path(), SmallSpec());
  const auto corpus = Corpus::Open(paths.docs);
  std::vector<DocumentRecord> stripped;
  for (auto rec : corpus) {
    rec.attention.clear();
    stripped.push_back(std::move(rec));
  }
  WriteCorpus(stripped, tmp / "stripped");
  auto opt = Options(paths, tmp / "work");
  opt.docs = tmp / "stripped";
  opt.methods = {Method::kPruneAttention, Method::kPoolKMeans};
  opt.ratios = {0.5};
  try {
    RunSweep(opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("(prune_attention, 0.5)"), std::string::npos)
        << e.what();
  }
  opt.keep_going = true;
  const auto report = RunSweep(opt);
  EXPECT_EQ(report.rows.size(), 2u);
  ASSERT_EQ(report.failures.size(), 1u);
  EXPECT_EQ(report.failures[0].method, Method::kPruneAttention);
}

TEST(Sweep, RejectsBadRatios) {
  TempDir tmp;
  const auto paths = testing::WriteBundleCorpus(tmp.path(), SmallSpec());
  auto opt = Options(paths, tmp / "work");
  opt.ratios = {0.0};
  EXPECT_MVSEQ_ERROR(RunSweep(opt), kUsage);
}

TEST(Sweep, SeedsDependOnMethodOnly) {
  EXPECT_EQ(MethodSeed(5, Method::kPoolRandom), MethodSeed(5, Method::kPoolRandom));
  EXPECT_NE(MethodSeed(5, Method::kPoolRandom), MethodSeed(5, Method::kPruneRandom));
  EXPECT_EQ(FormatRatio(0.33), "0.33");
  EXPECT_EQ(FormatRatio(1.0), "1");
}

}  // namespace
}  // namespace mvseq
