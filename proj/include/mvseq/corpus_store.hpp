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

// On-disk corpus container.
//
// A corpus directory holds
//   manifest.json   UTF-8 JSON metadata
//   embeddings.bin  concatenated little-endian float32 rows, L_i x d per doc
//   tokens.bin      concatenated little-endian uint32 token ids (optional)
//   attention.bin   concatenated little-endian float32 totals (optional)
// The binaries are headerless; every document is addressed by the byte
// offsets recorded in the manifest. Offsets into a file that is absent are
// written as 0 and ignored on read.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvseq/token_matrix.hpp"

namespace mvseq {

inline constexpr int kCorpusFormatVersion = 1;
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kEmbeddingsFile = "embeddings.bin";
inline constexpr const char* kTokensFile = "tokens.bin";
inline constexpr const char* kAttentionFile = "attention.bin";

struct DocumentRecord {
  std::string doc_id;
  TokenMatrix embeddings;
  std::vector<std::uint32_t> token_ids;  // empty when the corpus has none
  std::vector<float> attention;          // empty when the corpus has none

  std::size_t length() const noexcept { return embeddings.rows(); }
  bool operator==(const DocumentRecord&) const = default;
};

struct ManifestEntry {
  std::string id;
  std::uint64_t length = 0;
  std::uint64_t emb_offset = 0;
  std::uint64_t tok_offset = 0;
  std::uint64_t att_offset = 0;

  bool operator==(const ManifestEntry&) const = default;
};

struct CorpusManifest {
  int format_version = kCorpusFormatVersion;
  std::size_t dim = 0;
  std::size_t doc_count = 0;
  bool has_attention = false;
  bool has_token_ids = false;
  std::vector<ManifestEntry> docs;

  nlohmann::json ToJson() const;
  /// Parses without checking offsets; see ValidateCorpus for that.
  static CorpusManifest FromJson(const nlohmann::json& j);

  bool operator==(const CorpusManifest&) const = default;
};

/// Streams documents into a fresh corpus directory. Documents are appended
/// in call order, which becomes manifest order.
class CorpusWriter {
 public:
  CorpusWriter(const std::filesystem::path& dir, std::size_t dim,
               bool has_token_ids, bool has_attention);

  void Add(const DocumentRecord& record);
  /// Flushes binaries and writes manifest.json. Must be called exactly once.
  CorpusManifest Finish();

 private:
  std::filesystem::path dir_;
  CorpusManifest manifest_;
  std::ofstream emb_;
  std::ofstream tok_;
  std::ofstream att_;
  std::unordered_set<std::string> ids_;
  bool finished_ = false;
};

/// Writes `records` to `dir` (created if missing). Throws on an empty
/// record list, mixed dims, partial token_ids/attention, or duplicate ids.
CorpusManifest WriteCorpus(std::span<const DocumentRecord> records,
                           const std::filesystem::path& dir);

/// Immutable read handle. Records are loaded lazily with positional reads,
/// so one handle can be shared across threads.
class Corpus {
 public:
  /// Opens and checks the manifest against the binary file sizes.
  static Corpus Open(const std::filesystem::path& dir);

  const CorpusManifest& manifest() const noexcept { return *manifest_; }
  const std::filesystem::path& path() const noexcept { return dir_; }
  std::size_t size() const noexcept { return manifest_->docs.size(); }
  std::size_t dim() const noexcept { return manifest_->dim; }
  bool has_token_ids() const noexcept { return manifest_->has_token_ids; }
  bool has_attention() const noexcept { return manifest_->has_attention; }

  DocumentRecord Record(std::size_t index) const;
  DocumentRecord Record(std::string_view doc_id) const;
  std::optional<std::size_t> IndexOf(std::string_view doc_id) const;
  /// Embeddings only; skips token ids and attention.
  TokenMatrix Embeddings(std::size_t index) const;

  class Iterator {
   public:
    using value_type = DocumentRecord;
    using difference_type = std::ptrdiff_t;

    Iterator() = default;
    Iterator(const Corpus* corpus, std::size_t index)
        : corpus_(corpus), index_(index) {}
    DocumentRecord operator*() const { return corpus_->Record(index_); }
    Iterator& operator++() {
      ++index_;
      return *this;
    }
    Iterator operator++(int) {
      Iterator tmp = *this;
      ++index_;
      return tmp;
    }
    bool operator==(const Iterator& other) const {
      return index_ == other.index_;
    }

   private:
    const Corpus* corpus_ = nullptr;
    std::size_t index_ = 0;
  };

  Iterator begin() const { return {this, 0}; }
  Iterator end() const { return {this, size()}; }

 private:
  class File;

  std::filesystem::path dir_;
  std::shared_ptr<const CorpusManifest> manifest_;
  std::shared_ptr<const std::unordered_map<std::string, std::size_t>> index_;
  std::shared_ptr<const File> emb_;
  std::shared_ptr<const File> tok_;
  std::shared_ptr<const File> att_;
};

inline Corpus ReadCorpus(const std::filesystem::path& dir) {
  return Corpus::Open(dir);
}

struct Violation {
  std::string doc_id;  // empty for corpus-level problems
  std::string message;
  std::optional<std::size_t> row;
  std::optional<std::size_t> column;

  std::string ToString() const;
};

/// Checks every manifest and record invariant, including finiteness of all
/// embedding values. Problems are reported, never thrown.
std::vector<Violation> ValidateCorpus(const std::filesystem::path& dir);

}  // namespace mvseq
