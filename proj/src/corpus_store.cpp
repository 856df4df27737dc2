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

#include "mvseq/corpus_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <sstream>

namespace mvseq {

// The binary payloads are written and read with native layout.
static_assert(std::endian::native == std::endian::little,
              "corpus files are little-endian; add byte swapping for this target");

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kFloatBytes = 4;

std::string ErrnoText() { return std::strerror(errno); }

std::uint64_t FileSizeOrZero(const fs::path& p) {
  std::error_code ec;
  auto n = fs::file_size(p, ec);
  return ec ? 0 : static_cast<std::uint64_t>(n);
}

json ReadJsonFile(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("missing file: " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("malformed " + p.filename().string() + ": " + e.what());
  }
}

// Layout checks shared by Corpus::Open (throws on the first) and
// ValidateCorpus (reports all).
std::vector<Violation> CheckLayout(const CorpusManifest& m, const fs::path& dir) {
  std::vector<Violation> out;
  auto add = [&](std::string doc, std::string msg) {
    out.push_back({std::move(doc), std::move(msg), std::nullopt, std::nullopt});
  };
  if (m.dim == 0) add("", "dim must be >= 1");
  if (m.doc_count != m.docs.size()) {
    add("", "doc_count " + std::to_string(m.doc_count) + " but " +
                std::to_string(m.docs.size()) + " docs listed");
  }
  std::unordered_set<std::string> seen;
  std::uint64_t emb = 0, tok = 0, att = 0;
  for (const auto& e : m.docs) {
    if (e.id.empty()) add("", "empty doc id");
    if (!seen.insert(e.id).second) add(e.id, "duplicate doc id");
    if (e.length == 0) add(e.id, "document has zero rows");
    if (e.emb_offset != emb) {
      add(e.id, "emb_offset " + std::to_string(e.emb_offset) + " expected " +
                    std::to_string(emb));
    }
    emb = e.emb_offset + e.length * m.dim * kFloatBytes;
    if (m.has_token_ids) {
      if (e.tok_offset != tok) {
        add(e.id, "tok_offset " + std::to_string(e.tok_offset) + " expected " +
                      std::to_string(tok));
      }
      tok = e.tok_offset + e.length * 4;
    }
    if (m.has_attention) {
      if (e.att_offset != att) {
        add(e.id, "att_offset " + std::to_string(e.att_offset) + " expected " +
                      std::to_string(att));
      }
      att = e.att_offset + e.length * kFloatBytes;
    }
  }

  auto check_file = [&](const char* name, std::uint64_t expected) {
    fs::path p = dir / name;
    if (!fs::exists(p)) {
      add("", std::string("missing file: ") + name);
      return;
    }
    std::uint64_t actual = FileSizeOrZero(p);
    if (actual != expected) {
      add("", std::string("size mismatch: ") + name + " is " +
                  std::to_string(actual) + " bytes, manifest declares " +
                  std::to_string(expected));
    }
  };
  check_file(kEmbeddingsFile, emb);
  if (m.has_token_ids) check_file(kTokensFile, tok);
  if (m.has_attention) check_file(kAttentionFile, att);
  return out;
}

CorpusManifest LoadManifest(const fs::path& dir) {
  json j = ReadJsonFile(dir / kManifestFile);
  if (!j.is_object() || !j.contains("format_version")) {
    throw DataError("manifest.json lacks format_version");
  }
  int version = j.at("format_version").get<int>();
  if (version != kCorpusFormatVersion) {
    throw DataError("unsupported format_version " + std::to_string(version) +
                    " (expected " + std::to_string(kCorpusFormatVersion) + ")");
  }
  try {
    return CorpusManifest::FromJson(j);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed manifest.json: ") + e.what());
  }
}

template <typename T>
void WriteValues(std::ofstream& out, std::span<const T> values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size_bytes()));
}

}  // namespace

// ---------------------------------------------------------------------------
// Manifest

json CorpusManifest::ToJson() const {
  json docs_json = json::array();
  for (const auto& e : docs) {
    docs_json.push_back({{"id", e.id},
                         {"length", e.length},
                         {"emb_offset", e.emb_offset},
                         {"tok_offset", e.tok_offset},
                         {"att_offset", e.att_offset}});
  }
  return {{"format_version", format_version},
          {"dim", dim},
          {"doc_count", doc_count},
          {"has_attention", has_attention},
          {"has_token_ids", has_token_ids},
          {"docs", std::move(docs_json)}};
}

CorpusManifest CorpusManifest::FromJson(const json& j) {
  CorpusManifest m;
  m.format_version = j.at("format_version").get<int>();
  m.dim = j.at("dim").get<std::size_t>();
  m.doc_count = j.at("doc_count").get<std::size_t>();
  m.has_attention = j.at("has_attention").get<bool>();
  m.has_token_ids = j.at("has_token_ids").get<bool>();
  for (const auto& d : j.at("docs")) {
    ManifestEntry e;
    e.id = d.at("id").get<std::string>();
    e.length = d.at("length").get<std::uint64_t>();
    e.emb_offset = d.at("emb_offset").get<std::uint64_t>();
    e.tok_offset = d.value("tok_offset", std::uint64_t{0});
    e.att_offset = d.value("att_offset", std::uint64_t{0});
    m.docs.push_back(std::move(e));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Writing

CorpusWriter::CorpusWriter(const fs::path& dir, std::size_t dim,
                           bool has_token_ids, bool has_attention)
    : dir_(dir) {
  if (dim == 0) throw DataError("corpus dim must be >= 1");
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create " + dir_.string() + ": " + ec.message());
  manifest_.dim = dim;
  manifest_.has_token_ids = has_token_ids;
  manifest_.has_attention = has_attention;

  auto open = [&](std::ofstream& f, const char* name) {
    f.open(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + (dir_ / name).string() + ": " + ErrnoText());
  };
  open(emb_, kEmbeddingsFile);
  if (has_token_ids) open(tok_, kTokensFile);
  if (has_attention) open(att_, kAttentionFile);
}

void CorpusWriter::Add(const DocumentRecord& r) {
  if (finished_) throw UsageError("corpus writer already finished");
  if (r.doc_id.empty()) throw DataError("empty doc_id");
  if (r.embeddings.rows() == 0) throw DataError("document " + r.doc_id + " has zero rows");
  if (r.embeddings.dim() != manifest_.dim) {
    throw DataError("mixed dims: document " + r.doc_id + " has dim " +
                    std::to_string(r.embeddings.dim()) + ", corpus has " +
                    std::to_string(manifest_.dim));
  }
  const std::size_t len = r.embeddings.rows();
  if (manifest_.has_token_ids != !r.token_ids.empty() ||
      manifest_.has_attention != !r.attention.empty()) {
    throw DataError("token_ids/attention must be present for all records or none (doc " +
                    r.doc_id + ")");
  }
  if (manifest_.has_token_ids && r.token_ids.size() != len) {
    throw DataError("document " + r.doc_id + ": token_ids length differs from rows");
  }
  if (manifest_.has_attention && r.attention.size() != len) {
    throw DataError("document " + r.doc_id + ": attention length differs from rows");
  }
  if (!ids_.insert(r.doc_id).second) throw DataError("duplicate doc_id: " + r.doc_id);

  ManifestEntry e;
  e.id = r.doc_id;
  e.length = len;
  if (!manifest_.docs.empty()) {
    const auto& prev = manifest_.docs.back();
    e.emb_offset = prev.emb_offset + prev.length * manifest_.dim * kFloatBytes;
    if (manifest_.has_token_ids) e.tok_offset = prev.tok_offset + prev.length * 4;
    if (manifest_.has_attention) e.att_offset = prev.att_offset + prev.length * kFloatBytes;
  }
  WriteValues(emb_, r.embeddings.values());
  if (manifest_.has_token_ids) WriteValues(tok_, std::span<const std::uint32_t>(r.token_ids));
  if (manifest_.has_attention) WriteValues(att_, std::span<const float>(r.attention));
  if (!emb_ || (manifest_.has_token_ids && !tok_) || (manifest_.has_attention && !att_)) {
    throw IoError("write failed in " + dir_.string());
  }
  manifest_.docs.push_back(std::move(e));
}

CorpusManifest CorpusWriter::Finish() {
  if (finished_) throw UsageError("corpus writer already finished");
  finished_ = true;
  if (manifest_.docs.empty()) throw DataError("empty corpus");
  manifest_.doc_count = manifest_.docs.size();
  for (auto* f : {&emb_, &tok_, &att_}) {
    if (f->is_open()) {
      f->close();
      if (!*f) throw IoError("write failed in " + dir_.string());
    }
  }
  std::ofstream out(dir_ / kManifestFile, std::ios::trunc);
  out << manifest_.ToJson().dump(1) << '\n';
  if (!out) throw IoError("cannot write manifest in " + dir_.string());
  return manifest_;
}

CorpusManifest WriteCorpus(std::span<const DocumentRecord> records, const fs::path& dir) {
  if (records.empty()) throw DataError("empty corpus");
  const auto& first = records.front();
  CorpusWriter writer(dir, first.embeddings.dim(), !first.token_ids.empty(),
                      !first.attention.empty());
  for (const auto& r : records) writer.Add(r);
  return writer.Finish();
}

// ---------------------------------------------------------------------------
// Reading

class Corpus::File {
 public:
  explicit File(const fs::path& p) : path_(p) {
    fd_ = ::open(p.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd_ < 0) throw IoError("cannot open " + p.string() + ": " + ErrnoText());
  }
  ~File() {
    if (fd_ >= 0) ::close(fd_);
  }
  File(const File&) = delete;
  File& operator=(const File&) = delete;

  void ReadAt(std::uint64_t offset, void* dst, std::size_t bytes) const {
    auto* p = static_cast<char*>(dst);
    while (bytes > 0) {
      ssize_t n = ::pread(fd_, p, bytes, static_cast<off_t>(offset));
      if (n < 0) {
        if (errno == EINTR) continue;
        throw IoError("read failed on " + path_.string() + ": " + ErrnoText());
      }
      if (n == 0) throw DataError("unexpected end of " + path_.filename().string());
      p += n;
      bytes -= static_cast<std::size_t>(n);
      offset += static_cast<std::uint64_t>(n);
    }
  }

 private:
  fs::path path_;
  int fd_ = -1;
};

Corpus Corpus::Open(const fs::path& dir) {
  CorpusManifest m = LoadManifest(dir);
  auto problems = CheckLayout(m, dir);
  if (!problems.empty()) {
    const auto& v = problems.front();
    if (v.message.rfind("missing file", 0) == 0) throw IoError(v.message + " in " + dir.string());
    throw DataError(v.ToString());
  }

  Corpus c;
  c.dir_ = dir;
  auto index = std::make_shared<std::unordered_map<std::string, std::size_t>>();
  for (std::size_t i = 0; i < m.docs.size(); ++i) index->emplace(m.docs[i].id, i);
  c.index_ = std::move(index);
  c.emb_ = std::make_shared<File>(dir / kEmbeddingsFile);
  if (m.has_token_ids) c.tok_ = std::make_shared<File>(dir / kTokensFile);
  if (m.has_attention) c.att_ = std::make_shared<File>(dir / kAttentionFile);
  c.manifest_ = std::make_shared<const CorpusManifest>(std::move(m));
  return c;
}

TokenMatrix Corpus::Embeddings(std::size_t index) const {
  const auto& e = manifest_->docs.at(index);
  TokenMatrix mat(e.length, manifest_->dim);
  emb_->ReadAt(e.emb_offset, mat.values().data(), mat.values().size_bytes());
  return mat;
}

DocumentRecord Corpus::Record(std::size_t index) const {
  const auto& e = manifest_->docs.at(index);
  DocumentRecord r;
  r.doc_id = e.id;
  r.embeddings = Embeddings(index);
  if (tok_) {
    r.token_ids.resize(e.length);
    tok_->ReadAt(e.tok_offset, r.token_ids.data(), e.length * 4);
  }
  if (att_) {
    r.attention.resize(e.length);
    att_->ReadAt(e.att_offset, r.attention.data(), e.length * kFloatBytes);
  }
  return r;
}

std::optional<std::size_t> Corpus::IndexOf(std::string_view doc_id) const {
  auto it = index_->find(std::string(doc_id));
  if (it == index_->end()) return std::nullopt;
  return it->second;
}

DocumentRecord Corpus::Record(std::string_view doc_id) const {
  auto i = IndexOf(doc_id);
  if (!i) throw DataError("unknown doc_id: " + std::string(doc_id));
  return Record(*i);
}

// ---------------------------------------------------------------------------
// Validation

std::string Violation::ToString() const {
  std::ostringstream os;
  if (!doc_id.empty()) os << "doc " << doc_id << ": ";
  os << message;
  if (row) os << " (row " << *row;
  if (row && column) os << ", column " << *column;
  if (row) os << ")";
  return os.str();
}

std::vector<Violation> ValidateCorpus(const fs::path& dir) {
  CorpusManifest m;
  try {
    m = LoadManifest(dir);
  } catch (const Error& e) {
    return {{"", e.what(), std::nullopt, std::nullopt}};
  }
  auto out = CheckLayout(m, dir);
  if (!out.empty()) return out;  // record contents are not addressable

  Corpus c = Corpus::Open(dir);
  for (std::size_t i = 0; i < c.size(); ++i) {
    DocumentRecord r = c.Record(i);
    const auto& mat = r.embeddings;
    for (std::size_t row = 0; row < mat.rows(); ++row) {
      auto vals = mat.row(row);
      for (std::size_t col = 0; col < vals.size(); ++col) {
        if (!std::isfinite(vals[col])) {
          out.push_back({r.doc_id, "non-finite embedding value", row, col});
        }
      }
    }
    for (std::size_t row = 0; row < r.attention.size(); ++row) {
      float a = r.attention[row];
      if (!std::isfinite(a)) {
        out.push_back({r.doc_id, "non-finite attention", row, std::nullopt});
      } else if (a < 0.0f) {
        out.push_back({r.doc_id, "negative attention", row, std::nullopt});
      }
    }
  }
  return out;
}

}  // namespace mvseq
