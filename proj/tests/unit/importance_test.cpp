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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mvseq/error.hpp"
#include "mvseq/rng.hpp"
#include "test_support.hpp"

namespace mvseq {
namespace {

using testing::TempDir;

// Two documents: token 5 in both, token 7 in one, token 101 only as a marker.
IdfTable TwoDocTable() {
  IdfTable t;
  const std::vector<std::uint32_t> a{101, 5, 7, 7};
  const std::vector<std::uint32_t> b{101, 5};
  t.AddDocument(a);
  t.AddDocument(b);
  return t;
}

DocumentRecord Doc(std::size_t len) {
  DocumentRecord d;
  d.doc_id = "doc";
  d.embeddings = TokenMatrix(len, 2);
  for (auto& v : d.embeddings.values()) v = 1.0f;
  return d;
}

TEST(Rng, PinnedConstants) {
  // splitmix64's first output from state 0, and FNV-1a 64 reference values.
  EXPECT_EQ(Mix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(HashString(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(HashString("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(KeyedHash(1, "x", 2), Mix64(Mix64(Mix64(1) ^ HashString("x")) ^ 2));
  EXPECT_EQ(ToUnit(0), 0.0);
  EXPECT_LT(ToUnit(~0ULL), 1.0);
}

TEST(Idf, ValuesFollowSmoothedLog) {
  const auto t = TwoDocTable();
  EXPECT_EQ(t.doc_count(), 2u);
  EXPECT_EQ(t.df(7), 1u);  // counted once per document
  EXPECT_DOUBLE_EQ(t.idf(5), 0.0);
  EXPECT_NEAR(t.idf(7), 0.405465, 1e-6);
  EXPECT_NEAR(t.idf(9), 1.098612, 1e-6);
  EXPECT_NEAR(t.idf(7), std::log(3.0 / 2.0), 1e-15);
}

TEST(Idf, JsonRoundTrip) {
  TempDir tmp;
  const auto t = TwoDocTable();
  t.Save(tmp / "idf.json");
  const auto back = IdfTable::Load(tmp / "idf.json");
  EXPECT_EQ(back.doc_count(), t.doc_count());
  EXPECT_EQ(back.df_map(), t.df_map());
  EXPECT_EQ(t.ToJson()["df"]["7"], 1);
}

TEST(Idf, RejectsInconsistentTable) {
  EXPECT_MVSEQ_ERROR(IdfTable::FromJson({{"doc_count", 2}, {"df", {{"3", 5}}}}), kData);
  EXPECT_MVSEQ_ERROR(IdfTable::FromJson({{"doc_count", 2}, {"df", {{"x", 1}}}}), kData);
}

TEST(Idf, BuildFromCorpusNeedsTokenIds) {
  TempDir tmp;
  const std::vector<DocumentRecord> docs{Doc(3)};
  WriteCorpus(docs, tmp.path());
  try {
    BuildIdfTable(Corpus::Open(tmp.path()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
    EXPECT_STREQ(e.what(), "idf requires token ids");
  }
}

TEST(Idf, BuildFromCorpusCountsDocuments) {
  TempDir tmp;
  auto a = Doc(4);
  a.token_ids = {101, 5, 7, 7};
  auto b = Doc(2);
  b.doc_id = "b";
  b.token_ids = {101, 5};
  const std::vector<DocumentRecord> docs{a, b};
  WriteCorpus(docs, tmp.path());
  const auto t = BuildIdfTable(Corpus::Open(tmp.path()));
  EXPECT_EQ(t.df_map(), TwoDocTable().df_map());
}

TEST(ScoreTokens, AttentionDropsProtectedPosition) {
  auto d = Doc(4);
  d.attention = {0.0f, 3.0f, 1.0f, 2.0f};
  const auto s = ScoreTokens(d, ImportanceMethod::kAttention, nullptr, 0);
  EXPECT_EQ(s.scores, (std::vector<double>{3.0, 1.0, 2.0}));
  EXPECT_EQ(s.doc_id, "doc");
}

TEST(ScoreTokens, IdfLooksUpEachToken) {
  auto d = Doc(3);
  d.token_ids = {101, 5, 7};
  const auto t = TwoDocTable();
  const auto s = ScoreTokens(d, ImportanceMethod::kIdf, &t, 0);
  ASSERT_EQ(s.scores.size(), 2u);
  EXPECT_NEAR(s.scores[0], 0.0, 1e-12);
  EXPECT_NEAR(s.scores[1], 0.405465, 1e-6);
}

TEST(ScoreTokens, RandomIsKeyedBySeedDocAndPosition) {
  const auto d = Doc(50);
  const auto a = ScoreTokens(d, ImportanceMethod::kRandom, nullptr, 42);
  const auto b = ScoreTokens(d, ImportanceMethod::kRandom, nullptr, 42);
  const auto c = ScoreTokens(d, ImportanceMethod::kRandom, nullptr, 43);
  EXPECT_EQ(a.scores, b.scores);
  EXPECT_NE(a.scores, c.scores);
  EXPECT_EQ(a.scores[0], ToUnit(KeyedHash(42, "doc", 1)));
  // A longer document with the same id shares its prefix of scores.
  const auto longer = ScoreTokens(Doc(80), ImportanceMethod::kRandom, nullptr, 42);
  EXPECT_TRUE(std::equal(a.scores.begin(), a.scores.end(), longer.scores.begin()));
  for (double v : a.scores) {
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(ScoreTokens, MissingInputsAreErrors) {
  const auto d = Doc(3);
  const auto t = TwoDocTable();
  EXPECT_MVSEQ_ERROR(ScoreTokens(d, ImportanceMethod::kAttention, nullptr, 0), kData);
  EXPECT_MVSEQ_ERROR(ScoreTokens(d, ImportanceMethod::kIdf, &t, 0), kData);
  EXPECT_MVSEQ_ERROR(ScoreTokens(d, ImportanceMethod::kIdf, nullptr, 0), kData);
}

TEST(ScoreTokens, SingleTokenDocHasNoScores) {
  EXPECT_TRUE(ScoreTokens(Doc(1), ImportanceMethod::kRandom, nullptr, 1).scores.empty());
}

}  // namespace
}  // namespace mvseq
