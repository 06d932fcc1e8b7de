#include "ng/relevance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ng/error.hpp"
#include "ng/format.hpp"

namespace ng {

IdfTable::IdfTable(std::int64_t n_keyworded,
                   std::map<std::string, IdfEntry> entries)
    : n_(n_keyworded), entries_(std::move(entries)) {}

double IdfTable::weight(const std::string& term,
                        UnknownTermPolicy policy) const {
  auto it = entries_.find(term);
  if (it != entries_.end()) return it->second.idf;
  if (policy == UnknownTermPolicy::kError)
    throw InputError("term not in IDF table: \"" + term + "\"");
  // Unseen terms are maximally rare: df treated as 1.
  return std::log(static_cast<double>(n_));
}

IdfTable compute_idf(const Corpus& corpus) {
  std::map<std::string, IdfEntry> entries;
  std::int64_t n_keyworded = 0;
  for (const auto& rec : corpus.records()) {
    if (rec.keywords.empty()) continue;
    ++n_keyworded;
    for (const auto& term : rec.keywords) ++entries[term].df;
  }
  if (n_keyworded == 0)
    throw InputError("corpus has no keyworded documents; cannot compute IDF");
  for (auto& [term, entry] : entries)
    entry.idf = std::log(static_cast<double>(n_keyworded) /
                         static_cast<double>(entry.df));
  return IdfTable(n_keyworded, std::move(entries));
}

double weighted_jaccard(const std::vector<std::string>& a,
                        const std::vector<std::string>& b,
                        const IdfTable& idf, UnknownTermPolicy policy) {
  auto sorted_unique = [](std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  const auto sa = sorted_unique(a);
  const auto sb = sorted_unique(b);
  return weighted_jaccard_sorted(sa, sb, idf, policy);
}

double weighted_jaccard_sorted(std::span<const std::string> a_sorted,
                               std::span<const std::string> b_sorted,
                               const IdfTable& idf,
                               UnknownTermPolicy policy) {
  double sum_a = 0.0, sum_b = 0.0, sum_both = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a_sorted.size() && j < b_sorted.size()) {
    const int cmp = a_sorted[i].compare(b_sorted[j]);
    if (cmp < 0) {
      sum_a += idf.weight(a_sorted[i++], policy);
    } else if (cmp > 0) {
      sum_b += idf.weight(b_sorted[j++], policy);
    } else {
      const double w = idf.weight(a_sorted[i], policy);
      sum_a += w;
      sum_b += w;
      sum_both += w;
      ++i;
      ++j;
    }
  }
  for (; i < a_sorted.size(); ++i) sum_a += idf.weight(a_sorted[i], policy);
  for (; j < b_sorted.size(); ++j) sum_b += idf.weight(b_sorted[j], policy);

  const double denom = sum_a + sum_b - sum_both;
  if (denom <= 0.0) return 0.0;
  return sum_both / denom;
}

int binarize(double gain, double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw InputError("threshold tau must lie in (0, 1)");
  return gain >= tau ? 1 : 0;
}

std::string idf_csv(const IdfTable& table) {
  struct Row {
    const std::string* term;
    const IdfEntry* entry;
  };
  std::vector<Row> rows;
  rows.reserve(table.entries().size());
  for (const auto& [term, entry] : table.entries())
    rows.push_back({&term, &entry});
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.entry->idf != b.entry->idf) return a.entry->idf > b.entry->idf;
    return *a.term < *b.term;
  });

  std::string out = "term,df,idf\n";
  for (const Row& row : rows) {
    out += csv_escape(*row.term);
    out += "," + std::to_string(row.entry->df);
    out += "," + fmt_g(row.entry->idf) + "\n";
  }
  return out;
}

void write_idf_csv(const IdfTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open file for writing: " + path);
  out << idf_csv(table);
}

}  // namespace ng
