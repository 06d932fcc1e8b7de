#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ng/corpus.hpp"
#include "ng/sampling.hpp"

namespace ng {

struct Neighbor {
  std::string id;
  double score = 0.0;
};

// Exhaustive inner-product index over unit vectors. Rows are stored in
// ascending-id order so construction is independent of insertion order.
class FlatIndex {
 public:
  // Requires a normalized store; verifies every row norm is within 1e-6 of 1.
  static FlatIndex build(const EmbeddingStore& store);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  std::span<const float> row(std::size_t i) const;

  // Top-k by exact inner product, sort key (score desc, id asc). Products
  // accumulate in double over float inputs so ties are stable. k saturates
  // at the number of available candidates.
  std::vector<Neighbor> search(
      std::span<const float> query, int k,
      const std::optional<std::string>& exclude_id = {}) const;

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<float> matrix_;  // row-major, one row per id
};

// Scales every vector to unit L2 norm (norms computed in double).
// Zero-norm vectors are an error naming the id.
EmbeddingStore l2_normalize(const EmbeddingStore& store);

struct RankedRun {
  std::string system_name;
  int k = 0;
  std::map<std::string, std::vector<Neighbor>> results;  // query id -> list
  std::vector<std::string> skipped;  // query ids absent from the store
};

// Issues each query with its own embedding, excluding the self-match.
// Queries missing from the store are recorded in `skipped`. Results are
// identical for any thread count.
RankedRun run_queries(const FlatIndex& index, const QuerySet& queries,
                      const EmbeddingStore& store, int k, int threads = 1);

// Interchange JSONL: {"query": id, "neighbors": [{"id", "score"}, ...]}
// per line, ascending query id. Loading validates the run invariants
// (scores non-increasing, neighbors distinct, no self-match).
std::string run_jsonl(const RankedRun& run);
void write_run_jsonl(const RankedRun& run, const std::string& path);
RankedRun read_run_jsonl(const std::string& path,
                         const std::string& system_name);

}  // namespace ng
