#include "ng/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <thread>

#include <json.hpp>

#include "ng/error.hpp"

namespace ng {

namespace {

using nlohmann::json;

double l2_norm(std::span<const float> v) {
  double sum = 0.0;
  for (float x : v) sum += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(sum);
}

}  // namespace

EmbeddingStore l2_normalize(const EmbeddingStore& store) {
  EmbeddingStore out(store.dim());
  for (const auto& [id, vec] : store.vectors()) {
    const double norm = l2_norm(vec);
    if (norm == 0.0)
      throw InputError("zero-norm vector cannot be normalized: \"" + id + "\"");
    std::vector<float> unit(vec.size());
    for (std::size_t i = 0; i < vec.size(); ++i)
      unit[i] = static_cast<float>(static_cast<double>(vec[i]) / norm);
    out.add(id, std::move(unit));
  }
  out.set_normalized(true);
  return out;
}

FlatIndex FlatIndex::build(const EmbeddingStore& store) {
  if (store.size() == 0) throw InputError("cannot index an empty store");
  if (!store.normalized())
    throw InputError("store must be L2-normalized before indexing");
  FlatIndex index;
  index.dim_ = store.dim();
  index.ids_.reserve(store.size());
  index.matrix_.reserve(store.size() * store.dim());
  for (const auto& [id, vec] : store.vectors()) {
    const double norm = l2_norm(vec);
    if (std::abs(norm - 1.0) > 1e-6)
      throw InputError("row norm " + std::to_string(norm) +
                       " outside unit tolerance for \"" + id + "\"");
    index.ids_.push_back(id);
    index.matrix_.insert(index.matrix_.end(), vec.begin(), vec.end());
  }
  return index;
}

std::span<const float> FlatIndex::row(std::size_t i) const {
  return {matrix_.data() + i * dim_, dim_};
}

std::vector<Neighbor> FlatIndex::search(
    std::span<const float> query, int k,
    const std::optional<std::string>& exclude_id) const {
  if (query.size() != dim_)
    throw InputError("query dimension " + std::to_string(query.size()) +
                     " does not match index dimension " + std::to_string(dim_));
  if (k < 1) throw InputError("k must be >= 1");

  std::size_t exclude_row = ids_.size();
  if (exclude_id) {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), *exclude_id);
    if (it != ids_.end() && *it == *exclude_id)
      exclude_row = static_cast<std::size_t>(it - ids_.begin());
  }

  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(ids_.size());
  for (std::size_t r = 0; r < ids_.size(); ++r) {
    if (r == exclude_row) continue;
    const float* row_ptr = matrix_.data() + r * dim_;
    double s = 0.0;
    for (std::size_t j = 0; j < dim_; ++j)
      s += static_cast<double>(query[j]) * static_cast<double>(row_ptr[j]);
    scored.emplace_back(s, r);
  }

  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k),
                                          scored.size());
  // Row order equals ascending id, so index comparison is the id tie rule.
  const auto better = [](const std::pair<double, std::size_t>& a,
                         const std::pair<double, std::size_t>& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  };
  std::partial_sort(scored.begin(),
                    scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), better);

  std::vector<Neighbor> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i)
    out.push_back({ids_[scored[i].second], scored[i].first});
  return out;
}

RankedRun run_queries(const FlatIndex& index, const QuerySet& queries,
                      const EmbeddingStore& store, int k, int threads) {
  RankedRun run;
  run.k = k;

  std::vector<const QueryEntry*> present;
  present.reserve(queries.entries.size());
  for (const auto& entry : queries.entries) {
    if (store.find(entry.id)) present.push_back(&entry);
    else run.skipped.push_back(entry.id);
  }

  std::vector<std::vector<Neighbor>> slots(present.size());
  const auto worker_count = std::max(1, threads);
  if (worker_count == 1 || present.size() < 2) {
    for (std::size_t i = 0; i < present.size(); ++i)
      slots[i] = index.search(*store.find(present[i]->id), k, present[i]->id);
  } else {
    std::vector<std::thread> workers;
    std::size_t begin = 0;
    for (int w = 0; w < worker_count && begin < present.size(); ++w) {
      const std::size_t remaining = present.size() - begin;
      const std::size_t chunk =
          (remaining + static_cast<std::size_t>(worker_count - w) - 1) /
          static_cast<std::size_t>(worker_count - w);
      workers.emplace_back([&, begin, chunk] {
        for (std::size_t i = begin; i < begin + chunk; ++i)
          slots[i] = index.search(*store.find(present[i]->id), k,
                                  present[i]->id);
      });
      begin += chunk;
    }
    for (auto& t : workers) t.join();
  }

  for (std::size_t i = 0; i < present.size(); ++i)
    run.results.emplace(present[i]->id, std::move(slots[i]));
  return run;
}

std::string run_jsonl(const RankedRun& run) {
  std::string out;
  for (const auto& [qid, neighbors] : run.results) {
    json obj;
    obj["query"] = qid;
    json arr = json::array();
    for (const auto& n : neighbors) {
      json item;
      item["id"] = n.id;
      item["score"] = n.score;
      arr.push_back(std::move(item));
    }
    obj["neighbors"] = std::move(arr);
    out += obj.dump();
    out += "\n";
  }
  return out;
}

void write_run_jsonl(const RankedRun& run, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open file for writing: " + path);
  out << run_jsonl(run);
}

RankedRun read_run_jsonl(const std::string& path,
                         const std::string& system_name) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path);
  RankedRun run;
  run.system_name = system_name;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string context = path + ":" + std::to_string(line_no);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw InputError(context + ": malformed run line (" + e.what() + ")");
    }
    if (!obj.is_object() || !obj.contains("query") ||
        !obj.contains("neighbors") || !obj["query"].is_string() ||
        !obj["neighbors"].is_array())
      throw InputError(context + ": run line missing query/neighbors");
    const std::string qid = obj["query"].get<std::string>();
    std::vector<Neighbor> neighbors;
    std::set<std::string> seen;
    double prev_score = 0.0;
    for (const auto& item : obj["neighbors"]) {
      if (!item.is_object() || !item.contains("id") || !item.contains("score"))
        throw InputError(context + ": neighbor missing id/score");
      Neighbor n{item["id"].get<std::string>(), item["score"].get<double>()};
      if (n.id == qid)
        throw InputError(context + ": self-match \"" + qid +
                         "\" present in its own result list");
      if (!seen.insert(n.id).second)
        throw InputError(context + ": duplicate neighbor \"" + n.id + "\"");
      if (!neighbors.empty() && n.score > prev_score)
        throw InputError(context + ": scores must be non-increasing");
      prev_score = n.score;
      neighbors.push_back(std::move(n));
    }
    if (!run.results.emplace(qid, std::move(neighbors)).second)
      throw InputError(context + ": duplicate query \"" + qid + "\"");
    run.k = std::max(run.k,
                     static_cast<int>(run.results[qid].size()));
  }
  return run;
}

}  // namespace ng
