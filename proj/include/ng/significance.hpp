#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ng/metrics.hpp"

namespace ng {

struct BootstrapResult {
  std::string metric;   // display label, e.g. "nDCG@10"
  double tau = 0.0;     // track the row belongs to (0 when not applicable)
  double delta_mean = 0.0;  // mean of per-query A - B
  double ci_low = 0.0;      // 2.5th percentile of resample means
  double ci_high = 0.0;     // 97.5th percentile
  double p_two_sided = 1.0;
  std::int64_t b_resamples = 0;
  std::uint64_t seed = 0;
  std::int64_t n_queries = 0;
  bool mismatched_keys = false;  // inputs did not share the same query set
};

// Paired bootstrap over queries: d_q = a_q - b_q on the common query set;
// B resamples with replacement (substream b seeded from (seed, b)); 95%
// percentile CI; two-sided p = 2*min(#(mean<=0)+1, #(mean>=0)+1)/(B+1)
// clamped to 1. Requires B >= 100 and a nonempty common query set.
BootstrapResult paired_bootstrap(const std::map<std::string, double>& a,
                                 const std::map<std::string, double>& b,
                                 std::int64_t b_resamples, std::uint64_t seed);

struct CompareRequest {
  std::vector<std::string> bases{"ndcg", "p", "hit"};  // of: ndcg,map,p,hit,rbp
  int k = 10;
};

// One BootstrapResult per (base metric, tau) cell. nDCG rows use only
// queries non-excluded in both reports and repeat across tau tracks.
// Reports must share config and carry per-query values.
std::vector<BootstrapResult> compare_runs(const MetricsReport& a,
                                          const MetricsReport& b,
                                          const CompareRequest& request,
                                          std::int64_t b_resamples,
                                          std::uint64_t seed);

// Comparison table, columns: comparison, metric, delta, 95% CI, p;
// p rendered "<0.001" below 0.001; rows grouped by tau track.
std::string comparison_markdown(const std::string& name_a,
                                const std::string& name_b,
                                std::span<const BootstrapResult> rows);
std::string comparison_csv(const std::string& name_a,
                           const std::string& name_b,
                           std::span<const BootstrapResult> rows);

}  // namespace ng
