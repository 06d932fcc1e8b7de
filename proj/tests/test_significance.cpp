#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ng/error.hpp"
#include "ng/rng.hpp"
#include "ng/significance.hpp"

namespace {

std::map<std::string, double> constant_values(int n, double value) {
  std::map<std::string, double> out;
  for (int i = 0; i < n; ++i)
    out["Q" + std::to_string(1000 + i)] = value;
  return out;
}

}  // namespace

TEST_CASE("identical systems give a null result") {
  const auto a = constant_values(200, 0.42);
  const auto result = ng::paired_bootstrap(a, a, 500, 9);
  CHECK(result.delta_mean == 0.0);
  CHECK(result.ci_low == 0.0);
  CHECK(result.ci_high == 0.0);
  CHECK(result.p_two_sided == 1.0);  // clamped
  CHECK(result.n_queries == 200);
}

TEST_CASE("constant difference degenerates to a point interval") {
  const auto a = constant_values(500, 0.6);
  const auto b = constant_values(500, 0.5);
  const std::int64_t B = 2000;
  const auto result = ng::paired_bootstrap(a, b, B, 9);
  CHECK(result.delta_mean == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(result.ci_low == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(result.ci_high == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(result.p_two_sided ==
        doctest::Approx(2.0 / static_cast<double>(B + 1)).epsilon(1e-15));
}

TEST_CASE("guards") {
  const auto a = constant_values(10, 0.5);
  CHECK_THROWS_AS(ng::paired_bootstrap(a, a, 99, 1), ng::InputError);
  const auto disjoint = constant_values(10, 0.5);
  std::map<std::string, double> other{{"ZZZ", 0.1}};
  CHECK_THROWS_AS(ng::paired_bootstrap(a, other, 500, 1), ng::InputError);

  SUBCASE("partial overlap flags mismatched keys") {
    auto b = a;
    b.erase(b.begin());
    b["EXTRA"] = 0.9;
    const auto result = ng::paired_bootstrap(a, b, 200, 1);
    CHECK(result.mismatched_keys);
    CHECK(result.n_queries == 9);
  }
}

TEST_CASE("determinism and antisymmetry") {
  ng::Rng rng(77);
  std::map<std::string, double> a, b;
  for (int i = 0; i < 300; ++i) {
    const auto id = "Q" + std::to_string(1000 + i);
    a[id] = rng.next_double();
    b[id] = rng.next_double();
  }

  const auto r1 = ng::paired_bootstrap(a, b, 1000, 123);
  const auto r2 = ng::paired_bootstrap(a, b, 1000, 123);
  CHECK(r1.delta_mean == r2.delta_mean);
  CHECK(r1.ci_low == r2.ci_low);
  CHECK(r1.ci_high == r2.ci_high);
  CHECK(r1.p_two_sided == r2.p_two_sided);

  const auto swapped = ng::paired_bootstrap(b, a, 1000, 123);
  CHECK(swapped.delta_mean == -r1.delta_mean);
  // Endpoint mirroring is exact in real arithmetic; the interpolated
  // percentile rounds differently by one ulp under negation.
  CHECK(swapped.ci_low == doctest::Approx(-r1.ci_high).epsilon(1e-14));
  CHECK(swapped.ci_high == doctest::Approx(-r1.ci_low).epsilon(1e-14));
  CHECK(swapped.p_two_sided == r1.p_two_sided);
}

TEST_CASE("interval endpoints converge as B grows") {
  ng::Rng rng(4242);
  std::map<std::string, double> a, b;
  for (int i = 0; i < 500; ++i) {
    const auto id = "Q" + std::to_string(1000 + i);
    const double base = rng.next_double();
    a[id] = base + 0.05 + 0.02 * (rng.next_double() - 0.5);
    b[id] = base;
  }
  const auto coarse = ng::paired_bootstrap(a, b, 1000, 5);
  const auto fine = ng::paired_bootstrap(a, b, 10000, 5);
  CHECK(std::abs(coarse.ci_low - fine.ci_low) < 0.005);
  CHECK(std::abs(coarse.ci_high - fine.ci_high) < 0.005);
}

namespace {

ng::MetricsReport tiny_report(const std::string& name, double p_base,
                              double lift) {
  ng::MetricsReport report;
  report.system_name = name;
  report.config.k_list = {10};
  report.config.tau_list = {0.20, 0.28};
  ng::Rng rng(name.size() + 19);
  for (int i = 0; i < 500; ++i) {
    const auto qid = "Q" + std::to_string(1000 + i);
    auto& row = report.per_query[qid];
    const double noise = 0.05 * (rng.next_double() - 0.5);
    row["ndcg@10"] = std::min(1.0, std::max(0.0, p_base + lift + noise));
    for (double tau : {0.20, 0.28}) {
      const double v =
          std::min(1.0, std::max(0.0, p_base + lift + noise - tau / 4.0));
      row[ng::metric_key("p", 10, tau)] = v;
      row[ng::metric_key("hit", 10, tau)] = v > 0.3 ? 1.0 : 0.0;
      row[ng::metric_key("map", 10, tau)] = v / 2.0;
      row["rbp@10@" + ng::tau_str(tau)] = v / 3.0;
    }
  }
  // aggregates are irrelevant for comparison; fill counts only
  for (const auto& [qid, row] : report.per_query)
    for (const auto& [key, value] : row) {
      auto& agg = report.aggregates[key];
      agg.n += 1;
      agg.mean = agg.mean.value_or(0.0) + value;
    }
  for (auto& [key, agg] : report.aggregates)
    agg.mean = *agg.mean / static_cast<double>(agg.n);
  return report;
}

}  // namespace

TEST_CASE("compare_runs expands the requested grid") {
  const auto a = tiny_report("sysA", 0.4, 0.2);
  const auto b = tiny_report("sysB", 0.4, 0.0);

  ng::CompareRequest request;  // ndcg, p, hit at k=10
  const auto rows = ng::compare_runs(a, b, request, 500, 31);
  REQUIRE(rows.size() == 6);  // 3 metrics x 2 tau tracks

  SUBCASE("nDCG rows repeat identically across tau") {
    CHECK(rows[0].metric == "nDCG@10");
    CHECK(rows[3].metric == "nDCG@10");
    CHECK(rows[0].delta_mean == rows[3].delta_mean);
    CHECK(rows[0].ci_low == rows[3].ci_low);
    CHECK(rows[0].p_two_sided == rows[3].p_two_sided);
    CHECK(rows[0].tau != rows[3].tau);
  }

  SUBCASE("a clear winner is significant") {
    for (const auto& row : rows) {
      if (row.metric != "P@10") continue;
      CHECK(row.delta_mean > 0.1);
      CHECK(row.p_two_sided < 0.01);
      CHECK(row.ci_low <= row.ci_high);
    }
  }

  SUBCASE("config mismatch is an integrity error") {
    auto c = b;
    c.config.tau_list = {0.20};
    CHECK_THROWS_AS(ng::compare_runs(a, c, request, 500, 31),
                    ng::IntegrityError);
  }

  SUBCASE("requested k must be on the grid") {
    ng::CompareRequest bad;
    bad.k = 55;
    CHECK_THROWS_AS(ng::compare_runs(a, b, bad, 500, 31), ng::InputError);
  }
}

TEST_CASE("nDCG exclusions drop queries missing from either report") {
  auto a = tiny_report("sysA", 0.5, 0.1);
  auto b = tiny_report("sysB", 0.5, 0.0);
  // Simulate IDCG-zero exclusions: remove the ndcg value on each side.
  a.per_query["Q1000"].erase("ndcg@10");
  a.exclusions["ndcg@10"].push_back("Q1000");
  b.per_query["Q1001"].erase("ndcg@10");
  b.exclusions["ndcg@10"].push_back("Q1001");

  ng::CompareRequest request;
  request.bases = {"ndcg"};
  const auto rows = ng::compare_runs(a, b, request, 500, 7);
  CHECK(rows[0].n_queries == 498);
}

TEST_CASE("comparison rendering") {
  std::vector<ng::BootstrapResult> rows(2);
  rows[0] = {"nDCG@10", 0.20, 0.099, 0.093, 0.105, 0.0004998, 2000, 1, 2000,
             false};
  rows[1] = {"P@10", 0.20, 0.154, 0.144, 0.165, 0.012, 2000, 1, 2000, false};

  const auto md = ng::comparison_markdown("sysA", "sysB", rows);
  CHECK(md.find("| sysA - sysB | nDCG@10 | +0.099 | [0.093, 0.105] | <0.001 |")
        != std::string::npos);
  CHECK(md.find("0.012") != std::string::npos);
  CHECK(md.find("tau = 0.2") != std::string::npos);

  const auto csv = ng::comparison_csv("sysA", "sysB", rows);
  CHECK(csv.rfind("comparison,metric,tau,delta,ci_low,ci_high,p_value,"
                  "p_rendered,n_queries,B,seed\n", 0) == 0);
  CHECK(csv.find("<0.001") != std::string::npos);
}
