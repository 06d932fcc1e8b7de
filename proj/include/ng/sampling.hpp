#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ng/corpus.hpp"
#include "ng/relevance.hpp"

namespace ng {

enum class KwBin : int { kTwoToThree = 0, kFourToSeven = 1, kEightPlus = 2 };
enum class Rarity : int { kCommon = 0, kRarer = 1 };

std::string kw_bin_label(KwBin bin);      // "2-3", "4-7", "8+"
std::string rarity_label(Rarity rarity);  // "common", "rarer"

// One cell of the 3 (keyword-count bin) x 2 (rarity) x 3 (year tercile)
// grid; at most 18 distinct keys.
struct StratumKey {
  KwBin kw_bin = KwBin::kTwoToThree;
  Rarity rarity = Rarity::kCommon;
  int year_bin = 0;  // 0..2; fewer bins when year terciles collapse

  auto operator<=>(const StratumKey&) const = default;
};

struct QueryEntry {
  std::string id;
  StratumKey stratum;
};

struct QuerySet {
  std::vector<QueryEntry> entries;  // ascending id
  std::uint64_t seed = 0;
  std::int64_t target_n = 0;
  bool pool_exhausted = false;  // target_n exceeded the eligible pool
};

// Stratum for every eligible document (>= 2 keywords, optionally restricted
// to `restrict_to`). Rarity splits per-document median IDF at the global
// median (lower-median convention, ties -> common); year bins come from
// empirical year terciles with duplicate edges merged.
std::map<std::string, StratumKey> assign_strata(
    const Corpus& corpus, const IdfTable& idf,
    const std::set<std::string>* restrict_to = nullptr);

// Evenly allocates target_n across nonempty strata (floor quota; remainder
// and underpopulation deficits go to strata in descending population
// order), then draws uniformly without replacement under the seed.
QuerySet sample_queries(const Corpus& corpus, const IdfTable& idf,
                        std::int64_t target_n, std::uint64_t seed,
                        const std::set<std::string>* restrict_to = nullptr);

// CSV export: one "# seed=... target_n=..." comment line, then
// "id,kw_bin,rarity,year_bin" rows in ascending-id order.
std::string queryset_csv(const QuerySet& queries);
void write_queryset_csv(const QuerySet& queries, const std::string& path);
QuerySet read_queryset_csv(const std::string& path);

}  // namespace ng
