#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ng/corpus.hpp"

namespace ng {

// Row-major hidden-state matrix (one row per token position, special-token
// rows already removed upstream).
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  std::span<const float> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
  float& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  float at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct TokenSequence {
  std::string doc_id;
  std::vector<std::int64_t> token_ids;  // non-negative, length >= 1
};

struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive

  bool operator==(const TokenSpan&) const = default;
};

// Named chunking presets: 512-token windows, with a generic half-window
// stride and a denser stride for whole-decision encoding.
inline constexpr std::size_t kChunkWindow = 512;
inline constexpr std::size_t kChunkStrideGeneric = 256;
inline constexpr std::size_t kChunkStrideFullDecision = 128;

// Sliding-window spans over n_tokens positions: starts at multiples of
// stride while start + window <= n_tokens; a short remainder snaps to the
// fixed-length tail span [n_tokens - window, n_tokens). Documents shorter
// than the window yield the single span [0, n_tokens). Requires
// 1 <= stride <= window. Spans always cover [0, n_tokens).
std::vector<TokenSpan> chunk_spans(std::size_t n_tokens, std::size_t window,
                                   std::size_t stride);
std::vector<TokenSpan> chunk_spans(const TokenSequence& tokens,
                                   std::size_t window, std::size_t stride);

struct AttentionHead {
  std::vector<double> w;
};

// Head file JSON {"dim": d, "w": [floats]}.
AttentionHead load_head_json(const std::string& path);
void save_head_json(const AttentionHead& head, const std::string& path);

// Column-wise mean of the window's rows (double accumulation).
std::vector<double> mean_pool(const Matrix& window);

// softmax(w . h_i) with max-subtraction; weights are >= 0 and sum to 1.
std::vector<double> attention_weights(const Matrix& window,
                                      const AttentionHead& head);

// sum_i alpha_i h_i with alpha = attention_weights. A zero head reduces to
// mean_pool exactly (up to double rounding).
std::vector<double> attention_pool(const Matrix& window,
                                   const AttentionHead& head);

enum class PoolMode { kMean, kAttention };

PoolMode parse_pool_mode(const std::string& label);

// Average of per-window pooled vectors, L2-normalized to unit length.
// Errors: no windows, zero-norm aggregate, missing/mismatched head.
std::vector<double> doc_embedding(const std::vector<Matrix>& windows,
                                  PoolMode mode,
                                  const AttentionHead* head = nullptr);

struct WindowStates {
  std::string doc_id;
  std::vector<Matrix> windows;
};

// Hidden-state container: binary file "NGHS1\n" + "dim=<d>\n" header, then
// window records [u32-LE row count][rows of d little-endian f32]; a sidecar
// JSON manifest maps doc_id -> [record byte offsets].
class HiddenStatesFile {
 public:
  static HiddenStatesFile open(const std::string& states_path,
                               const std::string& manifest_path);

  std::size_t dim() const { return dim_; }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }
  std::vector<Matrix> windows_for(const std::string& doc_id) const;

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> doc_ids_;  // ascending
  std::map<std::string, std::vector<std::uint64_t>> offsets_;
  std::vector<unsigned char> bytes_;
};

void write_hidden_states(const std::vector<WindowStates>& docs,
                         const std::string& states_path,
                         const std::string& manifest_path);

// Pools every document in the container into an embedding store (unit
// vectors of the hidden size).
EmbeddingStore pool_documents(const HiddenStatesFile& states, PoolMode mode,
                              const AttentionHead* head = nullptr);

}  // namespace ng
