#include "ng/report_tables.hpp"

#include <algorithm>

#include "ng/error.hpp"
#include "ng/format.hpp"

namespace ng {

namespace {

std::string agg_str(const MetricsReport& report, const std::string& key,
                    int digits) {
  auto it = report.aggregates.find(key);
  if (it == report.aggregates.end() || !it->second.mean) return "-";
  return fmt_fixed(*it->second.mean, digits);
}

std::string agg_raw(const MetricsReport& report, const std::string& key) {
  auto it = report.aggregates.find(key);
  if (it == report.aggregates.end() || !it->second.mean) return "";
  return fmt_g(*it->second.mean);
}

std::string render_markdown(const std::vector<std::vector<std::string>>& cells) {
  std::vector<std::size_t> widths(cells[0].size(), 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c)
      widths[c] = std::max(widths[c], row[c].size());

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

void check_reports(std::span<const NamedReport> reports) {
  if (reports.empty()) throw InputError("no reports to tabulate");
  for (const auto& named : reports) {
    if (!named.report) throw InputError("null report for " + named.name);
    if (!(named.report->config == reports.front().report->config))
      throw IntegrityError("reports carry different configurations");
  }
}

}  // namespace

std::string full_table_markdown(std::span<const NamedReport> reports, int k,
                                double tau) {
  check_reports(reports);
  const std::string ks = std::to_string(k);
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"Model", "nDCG@" + ks, "MAP@" + ks, "P@" + ks,
                   "HitRate@" + ks, "RBP@10", "Weighted/Cnt@" + ks});
  for (const auto& named : reports) {
    const auto& r = *named.report;
    cells.push_back({named.name, agg_str(r, metric_key("ndcg", k), 3),
                     agg_str(r, metric_key("map", k, tau), 5),
                     agg_str(r, metric_key("p", k, tau), 3),
                     agg_str(r, metric_key("hit", k, tau), 3),
                     agg_str(r, "rbp@10@" + tau_str(tau), 3),
                     agg_str(r, metric_key("weighted_overlap", k), 2) + " / " +
                         agg_str(r, metric_key("overlap_count", k), 2)});
  }
  return "Results at k = " + ks + " with tau = " + tau_str(tau) + "\n\n" +
         render_markdown(cells);
}

std::string full_table_csv(std::span<const NamedReport> reports, int k,
                           double tau) {
  check_reports(reports);
  const std::string ks = std::to_string(k);
  std::string out = "model,ndcg@" + ks + ",map@" + ks + ",p@" + ks + ",hit@" +
                    ks + ",rbp@10,weighted_overlap@" + ks + ",overlap_count@" +
                    ks + ",tau\n";
  for (const auto& named : reports) {
    const auto& r = *named.report;
    out += csv_escape(named.name) + "," + agg_raw(r, metric_key("ndcg", k)) +
           "," + agg_raw(r, metric_key("map", k, tau)) + "," +
           agg_raw(r, metric_key("p", k, tau)) + "," +
           agg_raw(r, metric_key("hit", k, tau)) + "," +
           agg_raw(r, "rbp@10@" + tau_str(tau)) + "," +
           agg_raw(r, metric_key("weighted_overlap", k)) + "," +
           agg_raw(r, metric_key("overlap_count", k)) + "," + tau_str(tau) +
           "\n";
  }
  return out;
}

std::string compact_table_markdown(std::span<const NamedReport> reports,
                                   int k) {
  check_reports(reports);
  const auto& taus = reports.front().report->config.tau_list;
  const std::string ks = std::to_string(k);
  std::string tau_pair;
  for (std::size_t i = 0; i < taus.size(); ++i)
    tau_pair += (i ? "/" : "") + tau_str(taus[i]);

  std::vector<std::vector<std::string>> cells;
  cells.push_back({"Model", "nDCG@" + ks, "P@" + ks + " (" + tau_pair + ")",
                   "Hit@" + ks + " (" + tau_pair + ")"});
  for (const auto& named : reports) {
    const auto& r = *named.report;
    std::string p_cell, hit_cell;
    for (std::size_t i = 0; i < taus.size(); ++i) {
      p_cell += (i ? "/" : "") + agg_str(r, metric_key("p", k, taus[i]), 3);
      hit_cell += (i ? "/" : "") + agg_str(r, metric_key("hit", k, taus[i]), 3);
    }
    cells.push_back(
        {named.name, agg_str(r, metric_key("ndcg", k), 3), p_cell, hit_cell});
  }
  return "Results at k = " + ks + "\n\n" + render_markdown(cells);
}

std::string compact_table_csv(std::span<const NamedReport> reports, int k) {
  check_reports(reports);
  const auto& taus = reports.front().report->config.tau_list;
  const std::string ks = std::to_string(k);
  std::string out = "model,ndcg@" + ks;
  for (double tau : taus) out += ",p@" + ks + "@" + tau_str(tau);
  for (double tau : taus) out += ",hit@" + ks + "@" + tau_str(tau);
  out += "\n";
  for (const auto& named : reports) {
    const auto& r = *named.report;
    out += csv_escape(named.name) + "," + agg_raw(r, metric_key("ndcg", k));
    for (double tau : taus) out += "," + agg_raw(r, metric_key("p", k, tau));
    for (double tau : taus) out += "," + agg_raw(r, metric_key("hit", k, tau));
    out += "\n";
  }
  return out;
}

std::string report_tables_markdown(std::span<const NamedReport> reports) {
  check_reports(reports);
  const auto& config = reports.front().report->config;
  std::string out;
  bool first_k = true;
  for (int k : config.k_list) {
    if (first_k) {
      for (double tau : config.tau_list) {
        out += full_table_markdown(reports, k, tau);
        out += "\n";
      }
      first_k = false;
    } else {
      out += compact_table_markdown(reports, k);
      out += "\n";
    }
  }
  return out;
}

std::string report_tables_csv(std::span<const NamedReport> reports) {
  check_reports(reports);
  const auto& config = reports.front().report->config;
  std::string out;
  bool first_k = true;
  for (int k : config.k_list) {
    if (first_k) {
      for (double tau : config.tau_list) out += full_table_csv(reports, k, tau);
      first_k = false;
    } else {
      out += compact_table_csv(reports, k);
    }
  }
  return out;
}

}  // namespace ng
