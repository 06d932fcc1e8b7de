#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ng {

struct Date {
  int year = 0;
  int month = 0;
  int day = 0;
};

// Parses "YYYY-MM-DD" and validates calendar bounds (leap years included).
Date parse_date(const std::string& text);

// Normalization rule shared by document ids and keyword terms: trim
// surrounding whitespace, collapse internal whitespace runs to one space.
// Case, diacritics and slashes are preserved; multiword terms containing
// '/' stay whole.
std::string normalize_term(const std::string& raw);

struct DocumentRecord {
  std::string id;  // normalized, unique within a corpus
  Date pub_date;
  std::vector<std::string> keywords;  // normalized, first-occurrence dedup
  std::vector<std::string> keywords_sorted;  // ascending copy for set ops
  std::optional<std::int64_t> char_count;
};

// Immutable after construction; records are held in ascending-id order so
// every downstream computation is independent of input line order.
class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<DocumentRecord> records, std::string source);

  const std::vector<DocumentRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  const DocumentRecord* find(const std::string& id) const;
  const DocumentRecord& at(const std::string& id) const;  // throws InputError

  // Documents with at least one keyword.
  std::vector<const DocumentRecord*> keyworded() const;

  const std::string& source() const { return source_; }
  std::int64_t ingested_at() const { return ingested_at_; }

 private:
  std::vector<DocumentRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
  std::string source_;
  std::int64_t ingested_at_ = 0;
};

// Metadata JSONL: one {"id", "date", "keywords", "char_count"?} object per
// line. Records with char_count below min_chars are dropped; records
// without char_count always pass the filter.
Corpus load_metadata(const std::string& path,
                     std::optional<std::int64_t> min_chars = {});

// Fixed-dimension dense vectors keyed by document id. Ordered storage keeps
// exports byte-deterministic.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  bool normalized() const { return normalized_; }
  void set_normalized(bool v) { normalized_ = v; }

  // Rejects wrong dimension, non-finite components and duplicate ids.
  void add(const std::string& id, std::vector<float> vec);

  const std::vector<float>* find(const std::string& id) const;
  const std::map<std::string, std::vector<float>>& vectors() const {
    return vectors_;
  }
  std::vector<std::string> ids() const;  // ascending

 private:
  std::size_t dim_ = 0;
  bool normalized_ = false;
  std::map<std::string, std::vector<float>> vectors_;
};

// Accepts either format; binary files are recognized by their magic bytes.
EmbeddingStore load_embeddings(const std::string& path,
                               std::optional<std::size_t> expect_dim = {});

// JSONL: {"id": str, "vector": [float, ...]} per line, ascending id.
void save_embeddings_jsonl(const EmbeddingStore& store,
                           const std::string& path);

// Binary: "NGEM1\n", ASCII header "dim=<d> count=<n>\n", then n records of
// [u16-LE id byte length][id UTF-8][d little-endian f32]. Round-trips every
// vector bit-exactly.
void save_embeddings_binary(const EmbeddingStore& store,
                            const std::string& path);

// Ids present in every store and in the corpus, ascending.
std::vector<std::string> intersect_ids(
    const std::vector<const EmbeddingStore*>& stores, const Corpus& corpus);

}  // namespace ng
