#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ng/corpus.hpp"
#include "ng/relevance.hpp"
#include "ng/retrieval.hpp"

namespace ng {

// Graded gains r_1..r_n aligned to a result list, each in [0, 1].
using GainVector = std::vector<double>;

enum class MapNormalization {
  kTopkHits,    // divide by the number of hits within the top-k
  kRTauCapped,  // divide by min(R_tau, k)
};

std::string map_normalization_label(MapNormalization mode);
MapNormalization parse_map_normalization(const std::string& label);

struct EvalConfig {
  std::vector<int> k_list{10, 20, 100};
  std::vector<double> tau_list{0.20, 0.28};
  double rbp_p = 0.9;
  MapNormalization map_norm = MapNormalization::kTopkHits;

  bool operator==(const EvalConfig&) const = default;
};

// Metric key conventions used in reports and comparisons, e.g. "ndcg@10",
// "p@10@0.2", "rbp@10@0.28", "r_tau@0.2".
std::string tau_str(double tau);
std::string metric_key(const std::string& base, int k);
std::string metric_key(const std::string& base, int k, double tau);

struct Aggregate {
  std::optional<double> mean;  // absent when nothing contributed
  std::int64_t n = 0;
};

struct MetricsReport {
  EvalConfig config;
  std::string system_name;
  // query id -> metric key -> value. Excluded nDCG cells are omitted here
  // and listed in `exclusions` instead.
  std::map<std::string, std::map<std::string, double>> per_query;
  std::map<std::string, Aggregate> aggregates;
  std::map<std::string, std::vector<std::string>> exclusions;  // "ndcg@k" -> ids
};

// --- single-list metrics -------------------------------------------------
// Lists shorter than k count as padded with zero-gain entries.

// DCG@k = sum (2^r_i - 1) / log2(i + 1); normalized by the ideal DCG.
// Returns nullopt ("excluded") when IDCG@k is zero.
std::optional<double> ndcg_at_k(const GainVector& gains,
                                const GainVector& ideal, int k);

double precision_at_k(const GainVector& gains, double tau, int k);

// Displayed-formula AP@k with the within-top-k hit-count denominator;
// 0 when there is no hit.
double map_at_k(const GainVector& gains, double tau, int k);

// Alternate normalization: divide by min(r_tau, k).
double map_at_k_capped(const GainVector& gains, double tau, int k,
                       std::int64_t r_tau);

double hitrate_at_k(const GainVector& gains, double tau, int k);

// RBP over the first 10 ranks: (1-p) * sum p^(i-1) b_i, 0 < p < 1.
double rbp_at_10(const GainVector& gains, double tau, double p);

// --- run evaluation ------------------------------------------------------

// Computes every configured metric per query plus aggregates. Holds an
// inverted keyword index so true-ideal gains and R_tau are exhaustive over
// the corpus without rescanning it per query.
class Evaluator {
 public:
  Evaluator(const Corpus& corpus, const IdfTable& idf, EvalConfig config);

  MetricsReport evaluate(const RankedRun& run, bool keep_per_query = true) const;

  // r_i = wJacc(query keywords, neighbor keywords); keywordless neighbors
  // get 0. Neighbors missing from the corpus are a hard error.
  GainVector gains_for(const std::string& query_id,
                       const std::vector<Neighbor>& neighbors) const;

  // wJacc of every keyword-sharing document (query excluded), sorted
  // non-increasing, truncated or zero-padded to k.
  GainVector ideal_gains(const std::string& query_id, int k) const;

  // R_tau: corpus documents (query excluded) with wJacc >= tau.
  std::int64_t relevant_count(const std::string& query_id, double tau) const;

  // (OverlapCount@k, WeightedOverlap@k) for one query's neighbor list.
  std::pair<std::int64_t, double> overlap_at_k(
      const std::string& query_id, const std::vector<Neighbor>& neighbors,
      int k) const;

  const EvalConfig& config() const { return config_; }

 private:
  std::vector<double> candidate_gains(const DocumentRecord& query) const;
  const DocumentRecord& lookup(const std::string& id, const char* role) const;

  const Corpus* corpus_;
  const IdfTable* idf_;
  EvalConfig config_;
  std::unordered_map<std::string, std::vector<std::size_t>> postings_;
  std::vector<double> discount_;  // log2(i + 2), precomputed to max k
};

// Report JSON: {"config", "system", "aggregates", "exclusions",
// "per_query"?}. Deterministic key order and float formatting.
std::string report_json(const MetricsReport& report, bool include_per_query);
void write_report_json(const MetricsReport& report, const std::string& path,
                       bool include_per_query = true);
MetricsReport read_report_json(const std::string& path);

}  // namespace ng
