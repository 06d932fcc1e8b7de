#include "ng/significance.hpp"

#include <algorithm>
#include <cmath>

#include "ng/error.hpp"
#include "ng/format.hpp"
#include "ng/rng.hpp"

namespace ng {

namespace {

// Linear interpolation at position p*(n-1) of sorted values.
double percentile(const std::vector<double>& sorted, double p) {
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::string display_metric(const std::string& base, int k) {
  if (base == "ndcg") return "nDCG@" + std::to_string(k);
  if (base == "p") return "P@" + std::to_string(k);
  if (base == "map") return "MAP@" + std::to_string(k);
  if (base == "hit") return "Hit@" + std::to_string(k);
  if (base == "rbp") return "RBP@10";
  throw InputError("unknown comparison metric \"" + base + "\"");
}

}  // namespace

BootstrapResult paired_bootstrap(const std::map<std::string, double>& a,
                                 const std::map<std::string, double>& b,
                                 std::int64_t b_resamples, std::uint64_t seed) {
  if (b_resamples < 100)
    throw InputError("bootstrap needs B >= 100 resamples");

  // Differences over the common query set, ascending query id.
  std::vector<double> diffs;
  diffs.reserve(std::min(a.size(), b.size()));
  for (const auto& [qid, va] : a) {
    auto it = b.find(qid);
    if (it != b.end()) diffs.push_back(va - it->second);
  }
  if (diffs.empty())
    throw InputError("paired bootstrap has no common queries");

  BootstrapResult result;
  result.b_resamples = b_resamples;
  result.seed = seed;
  result.n_queries = static_cast<std::int64_t>(diffs.size());
  result.mismatched_keys =
      diffs.size() != a.size() || diffs.size() != b.size();

  double total = 0.0;
  for (double d : diffs) total += d;
  result.delta_mean = total / static_cast<double>(diffs.size());

  const auto n = diffs.size();
  std::vector<double> means(static_cast<std::size_t>(b_resamples));
  std::int64_t non_positive = 0, non_negative = 0;
  for (std::int64_t r = 0; r < b_resamples; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += diffs[rng.bounded(n)];
    const double mean = sum / static_cast<double>(n);
    means[static_cast<std::size_t>(r)] = mean;
    if (mean <= 0.0) ++non_positive;
    if (mean >= 0.0) ++non_negative;
  }
  std::sort(means.begin(), means.end());
  result.ci_low = percentile(means, 0.025);
  result.ci_high = percentile(means, 0.975);

  const double p = 2.0 *
                   static_cast<double>(std::min(non_positive, non_negative) + 1) /
                   static_cast<double>(b_resamples + 1);
  result.p_two_sided = std::min(p, 1.0);
  return result;
}

std::vector<BootstrapResult> compare_runs(const MetricsReport& a,
                                          const MetricsReport& b,
                                          const CompareRequest& request,
                                          std::int64_t b_resamples,
                                          std::uint64_t seed) {
  if (!(a.config == b.config))
    throw IntegrityError(
        "reports were produced under different configurations (k/tau grid)");
  if (a.per_query.empty() || b.per_query.empty())
    throw InputError("comparison requires reports with per-query values");
  if (std::find(a.config.k_list.begin(), a.config.k_list.end(), request.k) ==
      a.config.k_list.end())
    throw InputError("requested k=" + std::to_string(request.k) +
                     " is not in the reports' k grid");

  auto values_for = [](const MetricsReport& report, const std::string& key) {
    std::map<std::string, double> out;
    for (const auto& [qid, row] : report.per_query) {
      auto it = row.find(key);
      if (it != row.end()) out.emplace(qid, it->second);
    }
    return out;
  };

  std::vector<BootstrapResult> rows;
  for (double tau : a.config.tau_list) {
    for (const auto& base : request.bases) {
      std::string key;
      if (base == "ndcg") key = metric_key("ndcg", request.k);
      else if (base == "rbp") key = "rbp@10@" + tau_str(tau);
      else key = metric_key(base, request.k, tau);

      // Excluded nDCG queries carry no per-query value, so the common-key
      // intersection inside paired_bootstrap is exactly "non-excluded in
      // both reports".
      BootstrapResult row = paired_bootstrap(
          values_for(a, key), values_for(b, key), b_resamples, seed);
      row.metric = display_metric(base, request.k);
      row.tau = tau;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace {

std::string render_p(double p) {
  if (p < 0.001) return "<0.001";
  return fmt_fixed(p, 3);
}

std::string render_delta(double delta) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%+.3f", delta);
  return buf;
}

}  // namespace

std::string comparison_markdown(const std::string& name_a,
                                const std::string& name_b,
                                std::span<const BootstrapResult> rows) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"Comparison", "Metric", "Delta", "95% CI", "p"});
  double current_tau = -1.0;
  for (const auto& row : rows) {
    if (row.tau != current_tau) {
      current_tau = row.tau;
      cells.push_back({"tau = " + tau_str(row.tau), "", "", "", ""});
    }
    cells.push_back({name_a + " - " + name_b, row.metric,
                     render_delta(row.delta_mean),
                     "[" + fmt_fixed(row.ci_low, 3) + ", " +
                         fmt_fixed(row.ci_high, 3) + "]",
                     render_p(row.p_two_sided)});
  }

  std::vector<std::size_t> widths(cells[0].size(), 0);
  for (const auto& line : cells)
    for (std::size_t c = 0; c < line.size(); ++c)
      widths[c] = std::max(widths[c], line[c].size());

  std::string out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    out += "|";
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      out += " " + cells[r][c];
      out.append(widths[c] - cells[r][c].size(), ' ');
      out += " |";
    }
    out += "\n";
    if (r == 0) {
      out += "|";
      for (std::size_t c = 0; c < widths.size(); ++c) {
        out.append(widths[c] + 2, '-');
        out += "|";
      }
      out += "\n";
    }
  }
  return out;
}

std::string comparison_csv(const std::string& name_a,
                           const std::string& name_b,
                           std::span<const BootstrapResult> rows) {
  std::string out =
      "comparison,metric,tau,delta,ci_low,ci_high,p_value,p_rendered,"
      "n_queries,B,seed\n";
  for (const auto& row : rows) {
    out += csv_escape(name_a + " - " + name_b) + "," + row.metric + "," +
           tau_str(row.tau) + "," + fmt_g(row.delta_mean) + "," +
           fmt_g(row.ci_low) + "," + fmt_g(row.ci_high) + "," +
           fmt_g(row.p_two_sided) + "," + render_p(row.p_two_sided) + "," +
           std::to_string(row.n_queries) + "," +
           std::to_string(row.b_resamples) + "," + std::to_string(row.seed) +
           "\n";
  }
  return out;
}

}  // namespace ng
