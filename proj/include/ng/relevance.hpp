#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ng/corpus.hpp"

namespace ng {

struct IdfEntry {
  std::int64_t df = 0;
  double idf = 0.0;  // ln(N / df)
};

enum class UnknownTermPolicy {
  kMaxRarity,  // terms absent from the table get ln(N / 1)
  kError,
};

// IDF over keyworded documents; immutable once computed.
class IdfTable {
 public:
  IdfTable(std::int64_t n_keyworded, std::map<std::string, IdfEntry> entries);

  std::int64_t n_keyworded() const { return n_; }
  const std::map<std::string, IdfEntry>& entries() const { return entries_; }

  double weight(const std::string& term,
                UnknownTermPolicy policy = UnknownTermPolicy::kMaxRarity) const;

 private:
  std::int64_t n_ = 0;
  std::map<std::string, IdfEntry> entries_;
};

// N = documents with >= 1 keyword; df(t) counts documents whose deduplicated
// keyword set contains t; idf uses the natural log.
IdfTable compute_idf(const Corpus& corpus);

// IDF-weighted Jaccard gain in [0, 1]:
//   sum IDF over A∩B / (sum over A + sum over B - sum over A∩B).
// Degenerate inputs (zero denominator) yield 0. Inputs may be unsorted;
// duplicates are ignored.
double weighted_jaccard(
    const std::vector<std::string>& a, const std::vector<std::string>& b,
    const IdfTable& idf,
    UnknownTermPolicy policy = UnknownTermPolicy::kMaxRarity);

// Hot-path variant: both spans must be sorted ascending and deduplicated.
double weighted_jaccard_sorted(
    std::span<const std::string> a_sorted, std::span<const std::string> b_sorted,
    const IdfTable& idf,
    UnknownTermPolicy policy = UnknownTermPolicy::kMaxRarity);

// 1 if r >= tau else 0; tau must lie in (0, 1).
int binarize(double gain, double tau);

// CSV "term,df,idf" sorted by descending idf, ties by term.
std::string idf_csv(const IdfTable& table);
void write_idf_csv(const IdfTable& table, const std::string& path);

}  // namespace ng
