#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ng/corpus.hpp"

namespace ng {

// Per-year keyword statistics. entropy_bits is the doc-frequency entropy
// H = -sum p(t) log2 p(t) with p(t) = df_year(t) / sum df_year; n_eff = 2^H
// is the effective active vocabulary.
struct YearStats {
  int year = 0;
  std::int64_t n_docs = 0;
  double mean_k = 0.0;
  double median_k = 0.0;
  std::int64_t n_unique = 0;
  double zero_ratio = 0.0;
  double entropy_bits = 0.0;
  double n_eff = 1.0;
  std::int64_t n_keyworded = 0;  // 0 flags a degenerate year
};

std::vector<YearStats> annual_stats(const Corpus& corpus);  // ascending year

struct OverlapEstimate {
  double expected_overlap = 0.0;  // k^2 / n_eff
  double p_zero = 1.0;            // exp(-k^2 / n_eff)
};

// Back-of-the-envelope overlap between two documents with k tags each drawn
// from an effective vocabulary of n_eff terms. Requires k >= 0, n_eff > 0.
OverlapEstimate overlap_model(double k, double n_eff);

struct OverlapScenario {
  std::string name;
  double k = 0.0;
  double entropy_bits = 0.0;
  double n_eff = 1.0;
  double expected_overlap = 0.0;
  double p_zero = 1.0;
};

// E and P(zero) always derive from (k, n_eff); entropy_bits is carried as
// given since printed H and N_eff need not satisfy n_eff = 2^H exactly.
OverlapScenario make_scenario(const std::string& name, double k,
                              double entropy_bits, double n_eff);

// Baseline scenario grid: typical-year (3, 6.9, 118), richer-year
// (3, 7.8, 226), aggressive-tagging (5, 6.9, 118).
std::vector<OverlapScenario> default_scenarios();

struct EmpiricalOverlap {
  double mean_overlap = 0.0;
  double zero_fraction = 1.0;
  std::int64_t pairs = 0;
};

// Mean intersection size and zero-intersection fraction over sample_pairs
// random unordered pairs of distinct keyworded documents (seeded; pairs
// drawn with replacement across draws). Needs >= 2 keyworded documents.
EmpiricalOverlap empirical_overlap(
    const std::vector<const DocumentRecord*>& subset,
    std::int64_t sample_pairs, std::uint64_t seed);
EmpiricalOverlap empirical_overlap(const Corpus& corpus,
                                   std::int64_t sample_pairs,
                                   std::uint64_t seed);

// CSV emitters.
std::string annual_stats_csv(std::span<const YearStats> stats);
std::string scenario_csv(std::span<const OverlapScenario> scenarios);

}  // namespace ng
