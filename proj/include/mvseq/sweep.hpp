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

// Keep-ratio sweeps: compress, search and evaluate every (method, ratio)
// cell against an uncompressed baseline.
//
// Work-dir layout, one directory per cell:
//   <work>/<method>/<ratio>/corpus/   compressed corpus
//   <work>/<method>/<ratio>/run.trec  TREC run
// The baseline lives under <work>/none/1/.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mvseq/compressors.hpp"
#include "mvseq/metrics.hpp"

namespace mvseq {

inline const std::vector<double> kDefaultRatios = {0.10, 0.20, 0.33, 0.50, 0.75};

struct SweepOptions {
  std::filesystem::path docs;
  std::filesystem::path queries;
  std::filesystem::path qrels;
  std::string dataset;  // defaults to the docs directory name
  std::vector<Method> methods = AllCompressionMethods();
  std::vector<double> ratios = kDefaultRatios;
  std::uint64_t seed = 0;
  std::filesystem::path work_dir;  // required
  bool keep_work = false;
  bool keep_going = false;
  std::size_t jobs = 0;
  std::size_t depth = 100;  // search cutoff
  int kmeans_max_iters = 20;
  EvalOptions eval;
};

struct SweepRow {
  std::string dataset;
  Method method = Method::kNone;
  double ratio = 1.0;
  double achieved_ratio = 1.0;
  double mean_tokens_per_doc = 0.0;
  double ndcg = 0.0;
  double recall = 0.0;
  double relative_ndcg = 1.0;
  double relative_recall = 1.0;
  double compress_wall_time = 0.0;
  double search_wall_time = 0.0;
};

struct SweepFailure {
  Method method;
  double ratio;
  std::string message;
};

struct SweepReport {
  EvalOptions eval;
  std::vector<SweepRow> rows;  // baseline first, then methods x ratios
  std::vector<SweepFailure> failures;

  /// Deterministic quality columns only, so equal seeds give equal bytes.
  void WriteCsv(std::ostream& out) const;
  void WriteCsv(const std::filesystem::path& path) const;
  /// Wall-clock columns, keyed like the main report.
  void WriteTimingsCsv(std::ostream& out) const;
  void WriteTimingsCsv(const std::filesystem::path& path) const;
};

/// Seed for one method's compression. Derived per method rather than per
/// (method, ratio) so random scores are drawn once per document and shared by
/// every ratio.
std::uint64_t MethodSeed(std::uint64_t seed, Method method);

/// Shortest decimal that round-trips, e.g. 0.33 -> "0.33", 1 -> "1".
std::string FormatRatio(double ratio);

SweepReport RunSweep(const SweepOptions& options);

}  // namespace mvseq
