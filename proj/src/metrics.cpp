#include "ng/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "ng/error.hpp"

namespace ng {

namespace {

using nlohmann::json;

int binarize_at(double gain, double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw InputError("threshold tau must lie in (0, 1)");
  return gain >= tau ? 1 : 0;
}

double gain_at(const GainVector& gains, int i) {  // zero-padded access
  return i < static_cast<int>(gains.size()) ? gains[static_cast<std::size_t>(i)]
                                            : 0.0;
}

}  // namespace

std::string map_normalization_label(MapNormalization mode) {
  return mode == MapNormalization::kTopkHits ? "topk-hits" : "r-tau-capped";
}

MapNormalization parse_map_normalization(const std::string& label) {
  if (label == "topk-hits") return MapNormalization::kTopkHits;
  if (label == "r-tau-capped") return MapNormalization::kRTauCapped;
  throw InputError("unknown map_normalization \"" + label + "\"");
}

std::string tau_str(double tau) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", tau);
  return buf;
}

std::string metric_key(const std::string& base, int k) {
  return base + "@" + std::to_string(k);
}

std::string metric_key(const std::string& base, int k, double tau) {
  return base + "@" + std::to_string(k) + "@" + tau_str(tau);
}

std::optional<double> ndcg_at_k(const GainVector& gains,
                                const GainVector& ideal, int k) {
  if (k < 1) throw InputError("k must be >= 1");
  double dcg = 0.0, idcg = 0.0;
  for (int i = 0; i < k; ++i) {
    const double discount = std::log2(static_cast<double>(i) + 2.0);
    dcg += (std::exp2(gain_at(gains, i)) - 1.0) / discount;
    idcg += (std::exp2(gain_at(ideal, i)) - 1.0) / discount;
  }
  if (idcg == 0.0) return std::nullopt;
  return dcg / idcg;
}

double precision_at_k(const GainVector& gains, double tau, int k) {
  if (k < 1) throw InputError("k must be >= 1");
  int hits = 0;
  for (int i = 0; i < k; ++i) hits += binarize_at(gain_at(gains, i), tau);
  return static_cast<double>(hits) / static_cast<double>(k);
}

double map_at_k(const GainVector& gains, double tau, int k) {
  if (k < 1) throw InputError("k must be >= 1");
  int hits = 0;
  double sum = 0.0;
  for (int i = 0; i < k; ++i) {
    if (binarize_at(gain_at(gains, i), tau)) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  if (hits == 0) return 0.0;
  return sum / static_cast<double>(hits);
}

double map_at_k_capped(const GainVector& gains, double tau, int k,
                       std::int64_t r_tau) {
  if (k < 1) throw InputError("k must be >= 1");
  const auto denom = std::min<std::int64_t>(r_tau, k);
  if (denom <= 0) return 0.0;
  int hits = 0;
  double sum = 0.0;
  for (int i = 0; i < k; ++i) {
    if (binarize_at(gain_at(gains, i), tau)) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(denom);
}

double hitrate_at_k(const GainVector& gains, double tau, int k) {
  if (k < 1) throw InputError("k must be >= 1");
  for (int i = 0; i < k; ++i)
    if (binarize_at(gain_at(gains, i), tau)) return 1.0;
  return 0.0;
}

double rbp_at_10(const GainVector& gains, double tau, double p) {
  if (!(p > 0.0 && p < 1.0))
    throw InputError("RBP persistence p must lie in (0, 1)");
  double weight = 1.0;  // p^(i-1)
  double sum = 0.0;
  for (int i = 0; i < 10; ++i) {
    sum += weight * binarize_at(gain_at(gains, i), tau);
    weight *= p;
  }
  return (1.0 - p) * sum;
}

Evaluator::Evaluator(const Corpus& corpus, const IdfTable& idf,
                     EvalConfig config)
    : corpus_(&corpus), idf_(&idf), config_(std::move(config)) {
  if (config_.k_list.empty()) throw InputError("k_list must not be empty");
  if (config_.tau_list.empty()) throw InputError("tau_list must not be empty");
  for (double tau : config_.tau_list)
    if (!(tau > 0.0 && tau < 1.0))
      throw InputError("threshold tau must lie in (0, 1)");
  if (!(config_.rbp_p > 0.0 && config_.rbp_p < 1.0))
    throw InputError("RBP persistence p must lie in (0, 1)");

  const auto& records = corpus.records();
  for (std::size_t i = 0; i < records.size(); ++i)
    for (const auto& term : records[i].keywords)
      postings_[term].push_back(i);

  int max_k = 10;  // RBP depth is fixed at 10
  for (int k : config_.k_list) {
    if (k < 1) throw InputError("k must be >= 1");
    max_k = std::max(max_k, k);
  }
  discount_.resize(static_cast<std::size_t>(max_k));
  for (int i = 0; i < max_k; ++i)
    discount_[static_cast<std::size_t>(i)] =
        std::log2(static_cast<double>(i) + 2.0);
}

const DocumentRecord& Evaluator::lookup(const std::string& id,
                                        const char* role) const {
  const DocumentRecord* rec = corpus_->find(id);
  if (!rec)
    throw InputError(std::string(role) + " id \"" + id +
                     "\" not present in the corpus (mismatched snapshots?)");
  return *rec;
}

GainVector Evaluator::gains_for(const std::string& query_id,
                                const std::vector<Neighbor>& neighbors) const {
  const DocumentRecord& query = lookup(query_id, "query");
  GainVector gains;
  gains.reserve(neighbors.size());
  for (const auto& n : neighbors) {
    const DocumentRecord& doc = lookup(n.id, "neighbor");
    gains.push_back(doc.keywords.empty()
                        ? 0.0
                        : weighted_jaccard_sorted(query.keywords_sorted,
                                                  doc.keywords_sorted, *idf_));
  }
  return gains;
}

std::vector<double> Evaluator::candidate_gains(
    const DocumentRecord& query) const {
  // Union of postings over the query's terms = every document sharing at
  // least one keyword.
  std::vector<std::size_t> candidates;
  for (const auto& term : query.keywords) {
    auto it = postings_.find(term);
    if (it != postings_.end())
      candidates.insert(candidates.end(), it->second.begin(), it->second.end());
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());

  std::vector<double> gains;
  gains.reserve(candidates.size());
  const auto& records = corpus_->records();
  for (std::size_t idx : candidates) {
    const auto& doc = records[idx];
    if (doc.id == query.id) continue;
    gains.push_back(weighted_jaccard_sorted(query.keywords_sorted,
                                            doc.keywords_sorted, *idf_));
  }
  std::sort(gains.begin(), gains.end(), std::greater<>());
  return gains;
}

GainVector Evaluator::ideal_gains(const std::string& query_id, int k) const {
  if (k < 1) throw InputError("k must be >= 1");
  const auto all = candidate_gains(lookup(query_id, "query"));
  GainVector ideal(static_cast<std::size_t>(k), 0.0);
  const auto take = std::min<std::size_t>(all.size(),
                                          static_cast<std::size_t>(k));
  std::copy(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take),
            ideal.begin());
  return ideal;
}

std::int64_t Evaluator::relevant_count(const std::string& query_id,
                                       double tau) const {
  const auto all = candidate_gains(lookup(query_id, "query"));
  std::int64_t count = 0;
  for (double g : all) {
    if (g >= tau) ++count;
    else break;  // sorted non-increasing
  }
  return count;
}

std::pair<std::int64_t, double> Evaluator::overlap_at_k(
    const std::string& query_id, const std::vector<Neighbor>& neighbors,
    int k) const {
  const DocumentRecord& query = lookup(query_id, "query");
  std::int64_t count = 0;
  double weighted = 0.0;
  const auto limit = std::min<std::size_t>(static_cast<std::size_t>(k),
                                           neighbors.size());
  for (std::size_t i = 0; i < limit; ++i) {
    const DocumentRecord& doc = lookup(neighbors[i].id, "neighbor");
    const auto& a = query.keywords_sorted;
    const auto& b = doc.keywords_sorted;
    std::size_t x = 0, y = 0;
    while (x < a.size() && y < b.size()) {
      const int cmp = a[x].compare(b[y]);
      if (cmp < 0) ++x;
      else if (cmp > 0) ++y;
      else {
        ++count;
        weighted += idf_->weight(a[x]);
        ++x;
        ++y;
      }
    }
  }
  return {count, weighted};
}

MetricsReport Evaluator::evaluate(const RankedRun& run,
                                  bool keep_per_query) const {
  MetricsReport report;
  report.config = config_;
  report.system_name = run.system_name;

  std::map<std::string, std::vector<double>> sums;  // metric -> values
  auto record = [&](const std::string& qid, const std::string& key,
                    double value, std::map<std::string, double>& row) {
    sums[key].push_back(value);
    if (keep_per_query) row[key] = value;
    else (void)qid;
  };

  for (const auto& [qid, neighbors] : run.results) {
    const GainVector gains = gains_for(qid, neighbors);
    const auto all_candidates = candidate_gains(lookup(qid, "query"));
    std::map<std::string, double>& row = report.per_query[qid];

    for (int k : config_.k_list) {
      // nDCG against the true ideal over all keyword-sharing documents.
      GainVector ideal(static_cast<std::size_t>(k), 0.0);
      const auto take = std::min<std::size_t>(all_candidates.size(),
                                              static_cast<std::size_t>(k));
      std::copy(all_candidates.begin(),
                all_candidates.begin() + static_cast<std::ptrdiff_t>(take),
                ideal.begin());
      double dcg = 0.0, idcg = 0.0;
      for (int i = 0; i < k; ++i) {
        const double d = discount_[static_cast<std::size_t>(i)];
        dcg += (std::exp2(gain_at(gains, i)) - 1.0) / d;
        idcg += (std::exp2(ideal[static_cast<std::size_t>(i)]) - 1.0) / d;
      }
      const std::string ndcg_key = metric_key("ndcg", k);
      if (idcg == 0.0) {
        report.exclusions[ndcg_key].push_back(qid);
      } else {
        record(qid, ndcg_key, dcg / idcg, row);
      }

      const auto [ocount, oweight] = overlap_at_k(qid, neighbors, k);
      record(qid, metric_key("overlap_count", k),
             static_cast<double>(ocount), row);
      record(qid, metric_key("weighted_overlap", k), oweight, row);

      for (double tau : config_.tau_list) {
        record(qid, metric_key("p", k, tau), precision_at_k(gains, tau, k),
               row);
        record(qid, metric_key("hit", k, tau), hitrate_at_k(gains, tau, k),
               row);
        double ap;
        if (config_.map_norm == MapNormalization::kRTauCapped) {
          std::int64_t r_tau = 0;
          for (double g : all_candidates) {
            if (g >= tau) ++r_tau;
            else break;
          }
          ap = map_at_k_capped(gains, tau, k, r_tau);
        } else {
          ap = map_at_k(gains, tau, k);
        }
        record(qid, metric_key("map", k, tau), ap, row);
      }
    }

    for (double tau : config_.tau_list) {
      record(qid, "rbp@10@" + tau_str(tau),
             rbp_at_10(gains, tau, config_.rbp_p), row);
      std::int64_t r_tau = 0;
      for (double g : all_candidates) {
        if (g >= tau) ++r_tau;
        else break;
      }
      record(qid, "r_tau@" + tau_str(tau), static_cast<double>(r_tau), row);
    }
  }

  if (!keep_per_query) report.per_query.clear();

  for (auto& [key, values] : sums) {
    Aggregate agg;
    agg.n = static_cast<std::int64_t>(values.size());
    if (!values.empty()) {
      double total = 0.0;
      for (double v : values) total += v;  // values arrive in ascending-qid order
      agg.mean = total / static_cast<double>(values.size());
    }
    report.aggregates.emplace(key, agg);
  }
  // Metrics whose contributing set is empty still appear with n = 0.
  for (int k : config_.k_list) {
    const std::string key = metric_key("ndcg", k);
    report.aggregates.try_emplace(key, Aggregate{});
    auto it = report.exclusions.find(key);
    if (it != report.exclusions.end())
      std::sort(it->second.begin(), it->second.end());
  }
  return report;
}

std::string report_json(const MetricsReport& report, bool include_per_query) {
  json config;
  config["k_list"] = report.config.k_list;
  config["tau_list"] = report.config.tau_list;
  config["rbp_p"] = report.config.rbp_p;
  config["map_normalization"] = map_normalization_label(report.config.map_norm);

  json aggregates = json::object();
  for (const auto& [key, agg] : report.aggregates) {
    json cell;
    if (agg.mean) cell["mean"] = *agg.mean;
    cell["n"] = agg.n;
    aggregates[key] = std::move(cell);
  }

  json exclusions = json::object();
  for (const auto& [key, ids] : report.exclusions) exclusions[key] = ids;

  json doc;
  doc["config"] = std::move(config);
  doc["system"] = report.system_name;
  doc["aggregates"] = std::move(aggregates);
  doc["exclusions"] = std::move(exclusions);
  if (include_per_query) {
    json per_query = json::object();
    for (const auto& [qid, metrics] : report.per_query) {
      json row = json::object();
      for (const auto& [key, value] : metrics) row[key] = value;
      per_query[qid] = std::move(row);
    }
    doc["per_query"] = std::move(per_query);
  }
  return doc.dump(2) + "\n";
}

void write_report_json(const MetricsReport& report, const std::string& path,
                       bool include_per_query) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open file for writing: " + path);
  out << report_json(report, include_per_query);
}

MetricsReport read_report_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InputError(path + ": malformed report JSON (" + e.what() + ")");
  }
  if (!doc.is_object() || !doc.contains("config") ||
      !doc.contains("aggregates"))
    throw InputError(path + ": not a metrics report");

  MetricsReport report;
  const auto& config = doc["config"];
  report.config.k_list = config.at("k_list").get<std::vector<int>>();
  report.config.tau_list = config.at("tau_list").get<std::vector<double>>();
  report.config.rbp_p = config.at("rbp_p").get<double>();
  report.config.map_norm =
      parse_map_normalization(config.at("map_normalization").get<std::string>());
  if (doc.contains("system")) report.system_name = doc["system"];

  for (const auto& [key, cell] : doc["aggregates"].items()) {
    Aggregate agg;
    if (cell.contains("mean")) agg.mean = cell["mean"].get<double>();
    agg.n = cell.at("n").get<std::int64_t>();
    report.aggregates.emplace(key, agg);
  }
  if (doc.contains("exclusions"))
    for (const auto& [key, ids] : doc["exclusions"].items())
      report.exclusions.emplace(key, ids.get<std::vector<std::string>>());
  if (doc.contains("per_query"))
    for (const auto& [qid, row] : doc["per_query"].items()) {
      auto& dest = report.per_query[qid];
      for (const auto& [key, value] : row.items())
        dest.emplace(key, value.get<double>());
    }
  return report;
}

}  // namespace ng
