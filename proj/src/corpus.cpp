#include "ng/corpus.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ng/error.hpp"

namespace ng {

namespace {

using nlohmann::json;

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

int days_in_month(int year, int month) {
  static const int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2) {
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return leap ? 29 : 28;
  }
  return kDays[month - 1];
}

std::ifstream open_input(const std::string& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw InputError("cannot open file: " + path);
  return in;
}

std::ofstream open_output(const std::string& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw InputError("cannot open file for writing: " + path);
  return out;
}

void put_u16_le(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_f32_le(std::string& out, float f) {
  const auto bits = std::bit_cast<std::uint32_t>(f);
  out.push_back(static_cast<char>(bits & 0xff));
  out.push_back(static_cast<char>((bits >> 8) & 0xff));
  out.push_back(static_cast<char>((bits >> 16) & 0xff));
  out.push_back(static_cast<char>((bits >> 24) & 0xff));
}

constexpr char kEmbeddingMagic[] = "NGEM1\n";

}  // namespace

Date parse_date(const std::string& text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-')
    throw InputError("unparseable date: \"" + text + "\"");
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (!std::isdigit(static_cast<unsigned char>(text[i])))
      throw InputError("unparseable date: \"" + text + "\"");
  }
  Date d;
  d.year = std::stoi(text.substr(0, 4));
  d.month = std::stoi(text.substr(5, 2));
  d.day = std::stoi(text.substr(8, 2));
  if (d.month < 1 || d.month > 12 || d.day < 1 ||
      d.day > days_in_month(d.year, d.month))
    throw InputError("invalid calendar date: \"" + text + "\"");
  return d;
}

std::string normalize_term(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (is_space(c)) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c);
  }
  return out;
}

Corpus::Corpus(std::vector<DocumentRecord> records, std::string source)
    : records_(std::move(records)), source_(std::move(source)) {
  std::sort(records_.begin(), records_.end(),
            [](const DocumentRecord& a, const DocumentRecord& b) {
              return a.id < b.id;
            });
  index_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    auto& rec = records_[i];
    if (rec.id.empty()) throw InputError("document with empty id");
    if (!index_.emplace(rec.id, i).second)
      throw InputError("duplicate document id: \"" + rec.id + "\"");
    if (rec.keywords_sorted.empty() && !rec.keywords.empty()) {
      rec.keywords_sorted = rec.keywords;
      std::sort(rec.keywords_sorted.begin(), rec.keywords_sorted.end());
    }
  }
  ingested_at_ = std::chrono::duration_cast<std::chrono::seconds>(
                     std::chrono::system_clock::now().time_since_epoch())
                     .count();
}

const DocumentRecord* Corpus::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &records_[it->second];
}

const DocumentRecord& Corpus::at(const std::string& id) const {
  const DocumentRecord* rec = find(id);
  if (!rec) throw InputError("unknown document id: \"" + id + "\"");
  return *rec;
}

std::vector<const DocumentRecord*> Corpus::keyworded() const {
  std::vector<const DocumentRecord*> out;
  for (const auto& rec : records_)
    if (!rec.keywords.empty()) out.push_back(&rec);
  return out;
}

Corpus load_metadata(const std::string& path,
                     std::optional<std::int64_t> min_chars) {
  auto in = open_input(path, std::ios::in);
  std::vector<DocumentRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw InputError(path + ":" + std::to_string(line_no) +
                       ": malformed metadata line (" + e.what() + ")");
    }
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("date") ||
        !obj.contains("keywords") || !obj["id"].is_string() ||
        !obj["date"].is_string() || !obj["keywords"].is_array())
      throw InputError(path + ":" + std::to_string(line_no) +
                       ": metadata line missing id/date/keywords");

    DocumentRecord rec;
    rec.id = normalize_term(obj["id"].get<std::string>());
    if (rec.id.empty())
      throw InputError(path + ":" + std::to_string(line_no) + ": empty id");
    try {
      rec.pub_date = parse_date(obj["date"].get<std::string>());
    } catch (const InputError& e) {
      throw InputError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    std::set<std::string> seen;
    for (const auto& kw : obj["keywords"]) {
      if (!kw.is_string())
        throw InputError(path + ":" + std::to_string(line_no) +
                         ": non-string keyword");
      std::string term = normalize_term(kw.get<std::string>());
      if (term.empty()) continue;
      if (seen.insert(term).second) rec.keywords.push_back(std::move(term));
    }
    if (obj.contains("char_count")) {
      if (!obj["char_count"].is_number_integer())
        throw InputError(path + ":" + std::to_string(line_no) +
                         ": char_count must be an integer");
      rec.char_count = obj["char_count"].get<std::int64_t>();
    }
    // Only records strictly longer than the threshold survive the filter;
    // records without a char_count always pass.
    if (min_chars && rec.char_count && *rec.char_count <= *min_chars) continue;
    records.push_back(std::move(rec));
  }
  // Corpus construction reports duplicate ids; prefixing the source path
  // keeps the message actionable.
  try {
    return Corpus(std::move(records), path);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

void EmbeddingStore::add(const std::string& id, std::vector<float> vec) {
  if (vec.empty())
    throw InputError("empty vector for \"" + id + "\"");
  if (dim_ == 0) dim_ = vec.size();
  if (vec.size() != dim_)
    throw InputError("vector for \"" + id + "\" has dimension " +
                     std::to_string(vec.size()) + ", expected " +
                     std::to_string(dim_));
  for (float v : vec)
    if (!std::isfinite(v))
      throw InputError("non-finite component in vector for \"" + id + "\"");
  if (!vectors_.emplace(id, std::move(vec)).second)
    throw InputError("duplicate embedding id: \"" + id + "\"");
}

const std::vector<float>* EmbeddingStore::find(const std::string& id) const {
  auto it = vectors_.find(id);
  return it == vectors_.end() ? nullptr : &it->second;
}

std::vector<std::string> EmbeddingStore::ids() const {
  std::vector<std::string> out;
  out.reserve(vectors_.size());
  for (const auto& [id, _] : vectors_) out.push_back(id);
  return out;
}

namespace {

EmbeddingStore load_embeddings_jsonl(const std::string& path,
                                     std::optional<std::size_t> expect_dim) {
  auto in = open_input(path, std::ios::in);
  EmbeddingStore store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw InputError(path + ":" + std::to_string(line_no) +
                       ": malformed embedding line (" + e.what() + ")");
    }
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("vector") ||
        !obj["id"].is_string() || !obj["vector"].is_array())
      throw InputError(path + ":" + std::to_string(line_no) +
                       ": embedding line missing id/vector");
    const std::string id = normalize_term(obj["id"].get<std::string>());
    std::vector<float> vec;
    vec.reserve(obj["vector"].size());
    for (const auto& v : obj["vector"]) {
      if (!v.is_number())
        throw InputError(path + ":" + std::to_string(line_no) +
                         ": non-numeric vector component for \"" + id + "\"");
      vec.push_back(static_cast<float>(v.get<double>()));
    }
    try {
      store.add(id, std::move(vec));
    } catch (const InputError& e) {
      throw InputError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (expect_dim && store.dim() != *expect_dim)
    throw InputError(path + ": dimension " + std::to_string(store.dim()) +
                     " does not match expected " + std::to_string(*expect_dim));
  return store;
}

EmbeddingStore load_embeddings_binary(const std::string& path,
                                      std::optional<std::size_t> expect_dim) {
  auto in = open_input(path, std::ios::in | std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  std::size_t pos = std::strlen(kEmbeddingMagic);
  if (bytes.size() < pos || bytes.compare(0, pos, kEmbeddingMagic) != 0)
    throw InputError(path + ": bad magic, not an embedding file");

  const std::size_t header_end = bytes.find('\n', pos);
  if (header_end == std::string::npos)
    throw InputError(path + ": truncated header");
  const std::string header = bytes.substr(pos, header_end - pos);
  std::size_t dim = 0, count = 0;
  if (std::sscanf(header.c_str(), "dim=%zu count=%zu", &dim, &count) != 2 ||
      dim == 0)
    throw InputError(path + ": malformed header \"" + header + "\"");
  pos = header_end + 1;

  EmbeddingStore store(dim);
  for (std::size_t r = 0; r < count; ++r) {
    if (pos + 2 > bytes.size())
      throw InputError(path + ": truncated record " + std::to_string(r));
    const std::uint16_t id_len =
        static_cast<std::uint16_t>(static_cast<unsigned char>(bytes[pos])) |
        static_cast<std::uint16_t>(
            static_cast<std::uint16_t>(static_cast<unsigned char>(bytes[pos + 1]))
            << 8);
    pos += 2;
    if (pos + id_len + 4 * dim > bytes.size())
      throw InputError(path + ": truncated record " + std::to_string(r));
    std::string id = normalize_term(bytes.substr(pos, id_len));
    pos += id_len;
    std::vector<float> vec(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      std::uint32_t bits = 0;
      for (int b = 3; b >= 0; --b)
        bits = (bits << 8) |
               static_cast<std::uint32_t>(
                   static_cast<unsigned char>(bytes[pos + 4 * j + b]));
      vec[j] = std::bit_cast<float>(bits);
    }
    pos += 4 * dim;
    store.add(id, std::move(vec));
  }
  if (pos != bytes.size())
    throw InputError(path + ": trailing bytes after last record");
  if (expect_dim && store.dim() != *expect_dim)
    throw InputError(path + ": dimension " + std::to_string(store.dim()) +
                     " does not match expected " + std::to_string(*expect_dim));
  return store;
}

}  // namespace

EmbeddingStore load_embeddings(const std::string& path,
                               std::optional<std::size_t> expect_dim) {
  {
    auto in = open_input(path, std::ios::in | std::ios::binary);
    char magic[6] = {};
    in.read(magic, 6);
    if (in.gcount() == 6 && std::memcmp(magic, kEmbeddingMagic, 6) == 0)
      return load_embeddings_binary(path, expect_dim);
  }
  return load_embeddings_jsonl(path, expect_dim);
}

void save_embeddings_jsonl(const EmbeddingStore& store,
                           const std::string& path) {
  auto out = open_output(path, std::ios::out);
  for (const auto& [id, vec] : store.vectors()) {
    json obj;
    obj["id"] = id;
    json arr = json::array();
    for (float v : vec) arr.push_back(static_cast<double>(v));
    obj["vector"] = std::move(arr);
    out << obj.dump() << "\n";
  }
}

void save_embeddings_binary(const EmbeddingStore& store,
                            const std::string& path) {
  std::string bytes;
  bytes += kEmbeddingMagic;
  bytes += "dim=" + std::to_string(store.dim()) +
           " count=" + std::to_string(store.size()) + "\n";
  for (const auto& [id, vec] : store.vectors()) {
    if (id.size() > 0xffff)
      throw InputError("id too long for binary format: \"" + id + "\"");
    put_u16_le(bytes, static_cast<std::uint16_t>(id.size()));
    bytes += id;
    for (float v : vec) put_f32_le(bytes, v);
  }
  auto out = open_output(path, std::ios::out | std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::string> intersect_ids(
    const std::vector<const EmbeddingStore*>& stores, const Corpus& corpus) {
  if (stores.empty()) throw InputError("intersect_ids needs at least one store");
  std::vector<std::string> out;
  for (const auto& [id, _] : stores.front()->vectors()) {
    if (!corpus.find(id)) continue;
    bool everywhere = true;
    for (std::size_t s = 1; s < stores.size(); ++s) {
      if (!stores[s]->find(id)) {
        everywhere = false;
        break;
      }
    }
    if (everywhere) out.push_back(id);
  }
  return out;  // map iteration is already ascending
}

}  // namespace ng
