#include "ng/sampling.hpp"

#include <algorithm>
#include <fstream>

#include "ng/error.hpp"
#include "ng/format.hpp"
#include "ng/rng.hpp"

namespace ng {

namespace {

// Lower median: element at floor((m-1)/2) of the sorted values. One fixed
// convention shared by the per-document and the global rarity medians.
double lower_median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return values[(values.size() - 1) / 2];
}

KwBin kw_bin_for(std::size_t n_keywords) {
  if (n_keywords <= 3) return KwBin::kTwoToThree;
  if (n_keywords <= 7) return KwBin::kFourToSeven;
  return KwBin::kEightPlus;
}

// Linear-interpolated empirical quantile over sorted values.
double quantile(const std::vector<int>& sorted, double p) {
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return static_cast<double>(sorted[lo]) +
         frac * (static_cast<double>(sorted[lo + 1]) -
                 static_cast<double>(sorted[lo]));
}

struct EligibleDoc {
  const DocumentRecord* rec;
  double median_idf;
};

std::vector<EligibleDoc> eligible_docs(const Corpus& corpus,
                                       const IdfTable& idf,
                                       const std::set<std::string>* restrict_to) {
  std::vector<EligibleDoc> out;
  for (const auto& rec : corpus.records()) {
    if (rec.keywords.size() < 2) continue;
    if (restrict_to && !restrict_to->count(rec.id)) continue;
    std::vector<double> weights;
    weights.reserve(rec.keywords.size());
    for (const auto& term : rec.keywords) weights.push_back(idf.weight(term));
    out.push_back({&rec, lower_median(std::move(weights))});
  }
  return out;
}

}  // namespace

std::string kw_bin_label(KwBin bin) {
  switch (bin) {
    case KwBin::kTwoToThree: return "2-3";
    case KwBin::kFourToSeven: return "4-7";
    case KwBin::kEightPlus: return "8+";
  }
  return "?";
}

std::string rarity_label(Rarity rarity) {
  return rarity == Rarity::kCommon ? "common" : "rarer";
}

std::map<std::string, StratumKey> assign_strata(
    const Corpus& corpus, const IdfTable& idf,
    const std::set<std::string>* restrict_to) {
  const auto docs = eligible_docs(corpus, idf, restrict_to);
  if (docs.empty())
    throw InputError("no eligible documents (need >= 2 keywords)");

  std::vector<double> medians;
  medians.reserve(docs.size());
  for (const auto& d : docs) medians.push_back(d.median_idf);
  const double global_median = lower_median(std::move(medians));

  std::vector<int> years;
  years.reserve(docs.size());
  for (const auto& d : docs) years.push_back(d.rec->pub_date.year);
  std::sort(years.begin(), years.end());
  // Tercile edges; duplicates merged and edges at the maximum dropped, so a
  // single-year pool collapses to one bin.
  std::vector<double> edges;
  for (double p : {1.0 / 3.0, 2.0 / 3.0}) {
    const double e = quantile(years, p);
    if (e < static_cast<double>(years.back()) &&
        (edges.empty() || e > edges.back()))
      edges.push_back(e);
  }

  std::map<std::string, StratumKey> out;
  for (const auto& d : docs) {
    StratumKey key;
    key.kw_bin = kw_bin_for(d.rec->keywords.size());
    key.rarity = d.median_idf <= global_median ? Rarity::kCommon : Rarity::kRarer;
    int bin = 0;
    for (double e : edges)
      if (static_cast<double>(d.rec->pub_date.year) > e) ++bin;
    key.year_bin = bin;
    out.emplace(d.rec->id, key);
  }
  return out;
}

QuerySet sample_queries(const Corpus& corpus, const IdfTable& idf,
                        std::int64_t target_n, std::uint64_t seed,
                        const std::set<std::string>* restrict_to) {
  if (target_n < 1) throw InputError("target_n must be >= 1");
  const auto strata = assign_strata(corpus, idf, restrict_to);

  std::map<StratumKey, std::vector<std::string>> members;
  for (const auto& [id, key] : strata) members[key].push_back(id);
  // map iteration gives ids ascending per stratum and strata in key order.

  QuerySet qs;
  qs.seed = seed;
  qs.target_n = target_n;

  const auto pool_size = static_cast<std::int64_t>(strata.size());
  if (target_n >= pool_size) {
    qs.pool_exhausted = target_n > pool_size;
    for (const auto& [id, key] : strata) qs.entries.push_back({id, key});
    return qs;
  }

  struct Stratum {
    StratumKey key;
    const std::vector<std::string>* ids;
    std::int64_t alloc = 0;
  };
  std::vector<Stratum> order;
  order.reserve(members.size());
  for (const auto& [key, ids] : members) order.push_back({key, &ids});
  // Reallocation ranking: descending population, ties by key order.
  std::stable_sort(order.begin(), order.end(),
                   [](const Stratum& a, const Stratum& b) {
                     return a.ids->size() > b.ids->size();
                   });

  const auto base = target_n / static_cast<std::int64_t>(order.size());
  std::int64_t assigned = 0;
  for (auto& s : order) {
    s.alloc = std::min<std::int64_t>(base,
                                     static_cast<std::int64_t>(s.ids->size()));
    assigned += s.alloc;
  }
  // Remainder plus any deficits from underpopulated strata, one extra per
  // stratum per round, most populated first.
  std::int64_t deficit = target_n - assigned;
  while (deficit > 0) {
    bool progressed = false;
    for (auto& s : order) {
      if (deficit == 0) break;
      if (s.alloc < static_cast<std::int64_t>(s.ids->size())) {
        ++s.alloc;
        --deficit;
        progressed = true;
      }
    }
    if (!progressed) break;  // every stratum exhausted; cannot happen when
                             // target_n < pool size, kept as a guard
  }

  Rng rng(seed);
  for (const auto& [key, ids] : members) {
    // Locate the allocation for this stratum (draw order is fixed by key
    // order so results do not depend on the population ranking tie-break).
    std::int64_t alloc = 0;
    for (const auto& s : order)
      if (s.key == key) {
        alloc = s.alloc;
        break;
      }
    if (alloc == 0) continue;
    std::vector<std::string> pool = ids;
    // Partial Fisher-Yates: the first `alloc` slots become the sample.
    for (std::int64_t i = 0; i < alloc; ++i) {
      const auto j = static_cast<std::size_t>(i) +
                     rng.bounded(pool.size() - static_cast<std::size_t>(i));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    for (std::int64_t i = 0; i < alloc; ++i)
      qs.entries.push_back({pool[static_cast<std::size_t>(i)], key});
  }

  std::sort(qs.entries.begin(), qs.entries.end(),
            [](const QueryEntry& a, const QueryEntry& b) { return a.id < b.id; });
  return qs;
}

std::string queryset_csv(const QuerySet& queries) {
  std::string out = "# seed=" + std::to_string(queries.seed) +
                    " target_n=" + std::to_string(queries.target_n) +
                    " selected=" + std::to_string(queries.entries.size()) +
                    (queries.pool_exhausted ? " pool_exhausted=1" : "") + "\n";
  out += "id,kw_bin,rarity,year_bin\n";
  for (const auto& e : queries.entries) {
    out += csv_escape(e.id) + "," + kw_bin_label(e.stratum.kw_bin) + "," +
           rarity_label(e.stratum.rarity) + "," +
           std::to_string(e.stratum.year_bin) + "\n";
  }
  return out;
}

void write_queryset_csv(const QuerySet& queries, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open file for writing: " + path);
  out << queryset_csv(queries);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

KwBin parse_kw_bin(const std::string& label, const std::string& context) {
  if (label == "2-3") return KwBin::kTwoToThree;
  if (label == "4-7") return KwBin::kFourToSeven;
  if (label == "8+") return KwBin::kEightPlus;
  throw InputError(context + ": unknown kw_bin \"" + label + "\"");
}

}  // namespace

QuerySet read_queryset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path);
  QuerySet qs;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string context = path + ":" + std::to_string(line_no);
    if (line.empty() || line[0] == '\r') continue;
    if (line[0] == '#') {
      unsigned long long seed = 0;
      long long target = 0;
      if (std::sscanf(line.c_str(), "# seed=%llu target_n=%lld", &seed,
                      &target) == 2) {
        qs.seed = seed;
        qs.target_n = target;
      }
      if (line.find("pool_exhausted=1") != std::string::npos)
        qs.pool_exhausted = true;
      continue;
    }
    if (!header_seen) {
      if (line.rfind("id,", 0) != 0)
        throw InputError(context + ": expected query CSV header");
      header_seen = true;
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != 4)
      throw InputError(context + ": expected 4 fields, got " +
                       std::to_string(fields.size()));
    QueryEntry entry;
    entry.id = fields[0];
    entry.stratum.kw_bin = parse_kw_bin(fields[1], context);
    if (fields[2] == "common") entry.stratum.rarity = Rarity::kCommon;
    else if (fields[2] == "rarer") entry.stratum.rarity = Rarity::kRarer;
    else throw InputError(context + ": unknown rarity \"" + fields[2] + "\"");
    try {
      entry.stratum.year_bin = std::stoi(fields[3]);
    } catch (const std::exception&) {
      throw InputError(context + ": bad year_bin \"" + fields[3] + "\"");
    }
    qs.entries.push_back(std::move(entry));
  }
  if (!header_seen) throw InputError(path + ": missing query CSV header");
  return qs;
}

}  // namespace ng
