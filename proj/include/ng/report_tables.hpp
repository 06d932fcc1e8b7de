#pragma once

#include <span>
#include <string>

#include "ng/metrics.hpp"

namespace ng {

struct NamedReport {
  std::string name;
  const MetricsReport* report = nullptr;
};

// One model per row. Full shape: nDCG@k, MAP@k, P@k, HitRate@k, RBP@10 and
// Weighted/Cnt@k at a single tau. Compact shape: nDCG@k plus P@k and Hit@k
// rendered as "tau1/tau2" pairs.
std::string full_table_markdown(std::span<const NamedReport> reports, int k,
                                double tau);
std::string full_table_csv(std::span<const NamedReport> reports, int k,
                           double tau);
std::string compact_table_markdown(std::span<const NamedReport> reports,
                                   int k);
std::string compact_table_csv(std::span<const NamedReport> reports, int k);

// Full document: full tables per tau for the first configured k, compact
// tables for the rest.
std::string report_tables_markdown(std::span<const NamedReport> reports);
std::string report_tables_csv(std::span<const NamedReport> reports);

}  // namespace ng
