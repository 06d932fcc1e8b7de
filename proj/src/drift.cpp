#include "ng/drift.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "ng/error.hpp"
#include "ng/format.hpp"
#include "ng/rng.hpp"

namespace ng {

std::vector<YearStats> annual_stats(const Corpus& corpus) {
  if (corpus.size() == 0) throw InputError("corpus is empty");

  std::map<int, std::vector<const DocumentRecord*>> by_year;
  for (const auto& rec : corpus.records())
    by_year[rec.pub_date.year].push_back(&rec);

  std::vector<YearStats> out;
  out.reserve(by_year.size());
  for (const auto& [year, docs] : by_year) {
    YearStats stats;
    stats.year = year;
    stats.n_docs = static_cast<std::int64_t>(docs.size());

    std::vector<std::size_t> counts;
    counts.reserve(docs.size());
    std::map<std::string, std::int64_t> df;
    std::int64_t zero = 0;
    for (const auto* doc : docs) {
      counts.push_back(doc->keywords.size());
      if (doc->keywords.empty()) {
        ++zero;
        continue;
      }
      ++stats.n_keyworded;
      for (const auto& term : doc->keywords) ++df[term];
    }

    double total_k = 0.0;
    for (std::size_t c : counts) total_k += static_cast<double>(c);
    stats.mean_k = total_k / static_cast<double>(counts.size());
    std::sort(counts.begin(), counts.end());
    const std::size_t m = counts.size();
    stats.median_k = (m % 2 == 1)
                         ? static_cast<double>(counts[m / 2])
                         : (static_cast<double>(counts[m / 2 - 1]) +
                            static_cast<double>(counts[m / 2])) / 2.0;
    stats.n_unique = static_cast<std::int64_t>(df.size());
    stats.zero_ratio = static_cast<double>(zero) /
                       static_cast<double>(docs.size());

    if (!df.empty()) {
      double df_total = 0.0;
      for (const auto& [_, c] : df) df_total += static_cast<double>(c);
      double h = 0.0;
      for (const auto& [_, c] : df) {
        const double p = static_cast<double>(c) / df_total;
        h -= p * std::log2(p);
      }
      stats.entropy_bits = std::max(h, 0.0);  // guard tiny negative rounding
      stats.n_eff = std::exp2(stats.entropy_bits);
    }
    out.push_back(std::move(stats));
  }
  return out;
}

OverlapEstimate overlap_model(double k, double n_eff) {
  if (k < 0.0) throw InputError("k must be >= 0");
  if (!(n_eff > 0.0)) throw InputError("n_eff must be > 0");
  OverlapEstimate est;
  est.expected_overlap = k * k / n_eff;
  est.p_zero = std::exp(-est.expected_overlap);
  return est;
}

OverlapScenario make_scenario(const std::string& name, double k,
                              double entropy_bits, double n_eff) {
  const OverlapEstimate est = overlap_model(k, n_eff);
  return {name, k, entropy_bits, n_eff, est.expected_overlap, est.p_zero};
}

std::vector<OverlapScenario> default_scenarios() {
  return {
      make_scenario("typical-year", 3.0, 6.9, 118.0),
      make_scenario("richer-year", 3.0, 7.8, 226.0),
      make_scenario("aggressive-tagging", 5.0, 6.9, 118.0),
  };
}

EmpiricalOverlap empirical_overlap(
    const std::vector<const DocumentRecord*>& subset,
    std::int64_t sample_pairs, std::uint64_t seed) {
  if (sample_pairs < 1) throw InputError("sample_pairs must be >= 1");
  std::vector<const DocumentRecord*> docs;
  docs.reserve(subset.size());
  for (const auto* doc : subset)
    if (doc && !doc->keywords.empty()) docs.push_back(doc);
  if (docs.size() < 2)
    throw InputError("need at least 2 keyworded documents to sample pairs");

  Rng rng(seed);
  std::int64_t zero = 0;
  double total = 0.0;
  for (std::int64_t p = 0; p < sample_pairs; ++p) {
    const std::size_t i = rng.bounded(docs.size());
    std::size_t j = rng.bounded(docs.size() - 1);
    if (j >= i) ++j;  // distinct pair, uniform over unordered pairs
    const auto& a = docs[i]->keywords_sorted;
    const auto& b = docs[j]->keywords_sorted;
    std::size_t x = 0, y = 0, shared = 0;
    while (x < a.size() && y < b.size()) {
      const int cmp = a[x].compare(b[y]);
      if (cmp < 0) ++x;
      else if (cmp > 0) ++y;
      else {
        ++shared;
        ++x;
        ++y;
      }
    }
    total += static_cast<double>(shared);
    if (shared == 0) ++zero;
  }

  EmpiricalOverlap result;
  result.pairs = sample_pairs;
  result.mean_overlap = total / static_cast<double>(sample_pairs);
  result.zero_fraction = static_cast<double>(zero) /
                         static_cast<double>(sample_pairs);
  return result;
}

EmpiricalOverlap empirical_overlap(const Corpus& corpus,
                                   std::int64_t sample_pairs,
                                   std::uint64_t seed) {
  return empirical_overlap(corpus.keyworded(), sample_pairs, seed);
}

std::string annual_stats_csv(std::span<const YearStats> stats) {
  std::string out =
      "year,n_docs,mean_k,median_k,n_unique,zero_ratio,entropy_bits,n_eff\n";
  for (const auto& s : stats) {
    out += std::to_string(s.year) + "," + std::to_string(s.n_docs) + "," +
           fmt_g(s.mean_k) + "," + fmt_g(s.median_k) + "," +
           std::to_string(s.n_unique) + "," + fmt_g(s.zero_ratio) + "," +
           fmt_g(s.entropy_bits) + "," + fmt_g(s.n_eff) + "\n";
  }
  return out;
}

std::string scenario_csv(std::span<const OverlapScenario> scenarios) {
  std::string out = "scenario,k,H,N_eff,E,P_zero\n";
  for (const auto& s : scenarios) {
    out += csv_escape(s.name) + "," + fmt_g(s.k) + "," +
           fmt_g(s.entropy_bits) + "," + fmt_g(s.n_eff) + "," +
           fmt_g(s.expected_overlap) + "," + fmt_g(s.p_zero) + "\n";
  }
  return out;
}

}  // namespace ng
