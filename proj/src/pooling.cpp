#include "ng/pooling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "ng/error.hpp"

namespace ng {

namespace {

using nlohmann::json;

constexpr char kStatesMagic[] = "NGHS1\n";

}  // namespace

std::vector<TokenSpan> chunk_spans(std::size_t n_tokens, std::size_t window,
                                   std::size_t stride) {
  if (n_tokens < 1) throw InputError("token sequence must be non-empty");
  if (window < 1) throw InputError("window must be >= 1");
  if (stride < 1) throw InputError("stride must be >= 1");
  if (stride > window)
    throw InputError("stride " + std::to_string(stride) +
                     " exceeds window " + std::to_string(window) +
                     " and would skip tokens");

  if (n_tokens <= window) return {{0, n_tokens}};

  std::vector<TokenSpan> spans;
  for (std::size_t start = 0; start + window <= n_tokens; start += stride)
    spans.push_back({start, start + window});
  // Remainder snaps to a full-width tail window instead of a short chunk.
  if (spans.back().end < n_tokens)
    spans.push_back({n_tokens - window, n_tokens});
  return spans;
}

std::vector<TokenSpan> chunk_spans(const TokenSequence& tokens,
                                   std::size_t window, std::size_t stride) {
  for (auto id : tokens.token_ids)
    if (id < 0) throw InputError("negative token id in \"" + tokens.doc_id + "\"");
  return chunk_spans(tokens.token_ids.size(), window, stride);
}

AttentionHead load_head_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InputError(path + ": malformed head JSON (" + e.what() + ")");
  }
  if (!doc.is_object() || !doc.contains("dim") || !doc.contains("w"))
    throw InputError(path + ": head file must contain dim and w");
  AttentionHead head;
  head.w = doc["w"].get<std::vector<double>>();
  if (head.w.size() != doc["dim"].get<std::size_t>())
    throw InputError(path + ": w length does not match declared dim");
  for (double v : head.w)
    if (!std::isfinite(v))
      throw InputError(path + ": non-finite head component");
  return head;
}

void save_head_json(const AttentionHead& head, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open file for writing: " + path);
  json doc;
  doc["dim"] = head.w.size();
  doc["w"] = head.w;
  out << doc.dump(2) << "\n";
}

std::vector<double> mean_pool(const Matrix& window) {
  if (window.rows == 0 || window.cols == 0)
    throw InputError("cannot pool an empty window");
  std::vector<double> out(window.cols, 0.0);
  for (std::size_t r = 0; r < window.rows; ++r)
    for (std::size_t c = 0; c < window.cols; ++c)
      out[c] += static_cast<double>(window.at(r, c));
  for (double& v : out) v /= static_cast<double>(window.rows);
  return out;
}

std::vector<double> attention_weights(const Matrix& window,
                                      const AttentionHead& head) {
  if (window.rows == 0 || window.cols == 0)
    throw InputError("cannot pool an empty window");
  if (head.w.size() != window.cols)
    throw InputError("attention head dimension " +
                     std::to_string(head.w.size()) +
                     " does not match hidden size " +
                     std::to_string(window.cols));
  std::vector<double> scores(window.rows, 0.0);
  for (std::size_t r = 0; r < window.rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < window.cols; ++c)
      s += head.w[c] * static_cast<double>(window.at(r, c));
    scores[r] = s;
  }
  const double max_score = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  for (double& s : scores) {
    s = std::exp(s - max_score);
    total += s;
  }
  for (double& s : scores) s /= total;
  return scores;
}

std::vector<double> attention_pool(const Matrix& window,
                                   const AttentionHead& head) {
  const auto alpha = attention_weights(window, head);
  std::vector<double> out(window.cols, 0.0);
  for (std::size_t r = 0; r < window.rows; ++r)
    for (std::size_t c = 0; c < window.cols; ++c)
      out[c] += alpha[r] * static_cast<double>(window.at(r, c));
  return out;
}

PoolMode parse_pool_mode(const std::string& label) {
  if (label == "mean") return PoolMode::kMean;
  if (label == "attention") return PoolMode::kAttention;
  throw InputError("unknown pooling mode \"" + label + "\"");
}

std::vector<double> doc_embedding(const std::vector<Matrix>& windows,
                                  PoolMode mode, const AttentionHead* head) {
  if (windows.empty()) throw InputError("document has no windows");
  if (mode == PoolMode::kAttention && !head)
    throw InputError("attention pooling requires a head");

  std::vector<double> sum;
  for (const auto& window : windows) {
    const auto pooled = mode == PoolMode::kMean ? mean_pool(window)
                                                : attention_pool(window, *head);
    if (sum.empty()) sum.assign(pooled.size(), 0.0);
    if (pooled.size() != sum.size())
      throw InputError("windows disagree on hidden size");
    for (std::size_t c = 0; c < pooled.size(); ++c) sum[c] += pooled[c];
  }
  for (double& v : sum) v /= static_cast<double>(windows.size());

  double norm = 0.0;
  for (double v : sum) norm += v * v;
  norm = std::sqrt(norm);
  if (norm == 0.0)
    throw InputError("document embedding has zero norm; cannot normalize");
  for (double& v : sum) v /= norm;
  return sum;
}

HiddenStatesFile HiddenStatesFile::open(const std::string& states_path,
                                        const std::string& manifest_path) {
  std::ifstream in(states_path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + states_path);
  HiddenStatesFile file;
  file.bytes_.assign((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());

  const std::size_t magic_len = std::strlen(kStatesMagic);
  if (file.bytes_.size() < magic_len ||
      std::memcmp(file.bytes_.data(), kStatesMagic, magic_len) != 0)
    throw InputError(states_path + ": bad magic, not a hidden-state file");
  std::size_t pos = magic_len;
  std::string header;
  while (pos < file.bytes_.size() && file.bytes_[pos] != '\n')
    header.push_back(static_cast<char>(file.bytes_[pos++]));
  if (pos == file.bytes_.size())
    throw InputError(states_path + ": truncated header");
  ++pos;
  if (std::sscanf(header.c_str(), "dim=%zu", &file.dim_) != 1 ||
      file.dim_ == 0)
    throw InputError(states_path + ": malformed header \"" + header + "\"");

  std::ifstream min(manifest_path);
  if (!min) throw InputError("cannot open file: " + manifest_path);
  json manifest;
  try {
    min >> manifest;
  } catch (const json::exception& e) {
    throw InputError(manifest_path + ": malformed manifest (" + e.what() + ")");
  }
  if (!manifest.is_object())
    throw InputError(manifest_path + ": manifest must map doc ids to offsets");
  for (const auto& [doc_id, offsets] : manifest.items()) {
    if (!offsets.is_array() || offsets.empty())
      throw InputError(manifest_path + ": \"" + doc_id +
                       "\" must list at least one window offset");
    file.offsets_.emplace(doc_id,
                          offsets.get<std::vector<std::uint64_t>>());
  }
  for (const auto& [doc_id, _] : file.offsets_)
    file.doc_ids_.push_back(doc_id);
  return file;
}

std::vector<Matrix> HiddenStatesFile::windows_for(
    const std::string& doc_id) const {
  auto it = offsets_.find(doc_id);
  if (it == offsets_.end())
    throw InputError("document \"" + doc_id + "\" not in hidden-state manifest");

  std::vector<Matrix> windows;
  windows.reserve(it->second.size());
  for (std::uint64_t offset : it->second) {
    if (offset + 4 > bytes_.size())
      throw InputError("window offset out of range for \"" + doc_id + "\"");
    std::uint32_t rows = 0;
    for (int b = 3; b >= 0; --b)
      rows = (rows << 8) |
             static_cast<std::uint32_t>(bytes_[offset + static_cast<std::uint64_t>(b)]);
    const std::uint64_t payload = offset + 4;
    const std::uint64_t need =
        static_cast<std::uint64_t>(rows) * dim_ * 4;
    if (rows == 0 || payload + need > bytes_.size())
      throw InputError("corrupt window record for \"" + doc_id + "\"");

    Matrix m;
    m.rows = rows;
    m.cols = dim_;
    m.data.resize(static_cast<std::size_t>(rows) * dim_);
    for (std::size_t e = 0; e < m.data.size(); ++e) {
      std::uint32_t bits = 0;
      for (int b = 3; b >= 0; --b)
        bits = (bits << 8) |
               static_cast<std::uint32_t>(bytes_[payload + 4 * e +
                                                 static_cast<std::uint64_t>(b)]);
      m.data[e] = std::bit_cast<float>(bits);
      if (!std::isfinite(m.data[e]))
        throw InputError("non-finite hidden state in \"" + doc_id + "\"");
    }
    windows.push_back(std::move(m));
  }
  return windows;
}

void write_hidden_states(const std::vector<WindowStates>& docs,
                         const std::string& states_path,
                         const std::string& manifest_path) {
  std::string bytes = kStatesMagic;
  if (docs.empty()) throw InputError("no documents to write");
  const std::size_t dim = docs.front().windows.empty()
                              ? 0
                              : docs.front().windows.front().cols;
  if (dim == 0) throw InputError("hidden size must be > 0");
  bytes += "dim=" + std::to_string(dim) + "\n";

  json manifest = json::object();
  for (const auto& doc : docs) {
    if (doc.windows.empty())
      throw InputError("document \"" + doc.doc_id + "\" has no windows");
    std::vector<std::uint64_t> offsets;
    for (const auto& window : doc.windows) {
      if (window.cols != dim)
        throw InputError("hidden-size mismatch in \"" + doc.doc_id + "\"");
      offsets.push_back(bytes.size());
      const auto rows = static_cast<std::uint32_t>(window.rows);
      for (int b = 0; b < 4; ++b)
        bytes.push_back(static_cast<char>((rows >> (8 * b)) & 0xff));
      for (float v : window.data) {
        const auto bits = std::bit_cast<std::uint32_t>(v);
        for (int b = 0; b < 4; ++b)
          bytes.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
      }
    }
    manifest[doc.doc_id] = offsets;
  }

  std::ofstream out(states_path, std::ios::binary);
  if (!out) throw InputError("cannot open file for writing: " + states_path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));

  std::ofstream mout(manifest_path, std::ios::binary);
  if (!mout) throw InputError("cannot open file for writing: " + manifest_path);
  mout << manifest.dump(2) << "\n";
}

EmbeddingStore pool_documents(const HiddenStatesFile& states, PoolMode mode,
                              const AttentionHead* head) {
  EmbeddingStore store(states.dim());
  for (const auto& doc_id : states.doc_ids()) {
    const auto windows = states.windows_for(doc_id);
    const auto embedding = doc_embedding(windows, mode, head);
    std::vector<float> vec(embedding.size());
    for (std::size_t i = 0; i < embedding.size(); ++i)
      vec[i] = static_cast<float>(embedding[i]);
    store.add(doc_id, std::move(vec));
  }
  return store;
}

}  // namespace ng
