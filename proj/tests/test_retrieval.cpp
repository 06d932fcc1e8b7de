#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

#include "ng/error.hpp"
#include "ng/retrieval.hpp"
#include "ng/rng.hpp"
#include "reference.hpp"
#include "test_util.hpp"

namespace {

ng::EmbeddingStore unit_store(
    std::initializer_list<std::pair<const char*, std::vector<float>>> rows) {
  ng::EmbeddingStore store;
  for (const auto& [id, vec] : rows) store.add(id, vec);
  return ng::l2_normalize(store);
}

}  // namespace

TEST_CASE("l2_normalize") {
  ng::EmbeddingStore store(2);
  store.add("A", {3.0f, 4.0f});
  const auto unit = ng::l2_normalize(store);
  CHECK(unit.normalized());
  const auto& v = *unit.find("A");
  CHECK(v[0] == doctest::Approx(0.6).epsilon(1e-7));
  CHECK(v[1] == doctest::Approx(0.8).epsilon(1e-7));

  SUBCASE("idempotent on unit vectors") {
    const auto twice = ng::l2_normalize(unit);
    const auto& w = *twice.find("A");
    CHECK(std::abs(static_cast<double>(w[0]) - static_cast<double>(v[0])) <
          1e-12);
    CHECK(std::abs(static_cast<double>(w[1]) - static_cast<double>(v[1])) <
          1e-12);
  }

  SUBCASE("zero vectors are an error naming the id") {
    ng::EmbeddingStore bad(2);
    bad.add("Z", {0.0f, 0.0f});
    CHECK_THROWS_WITH_AS(ng::l2_normalize(bad), doctest::Contains("Z"),
                         ng::InputError);
  }
}

TEST_CASE("build_index") {
  const auto store = unit_store({{"B", {0.0f, 1.0f}}, {"A", {1.0f, 0.0f}}});
  const auto index = ng::FlatIndex::build(store);
  CHECK(index.size() == 2);
  CHECK(index.ids() == std::vector<std::string>{"A", "B"});  // ascending id

  SUBCASE("deterministic rebuild") {
    const auto again = ng::FlatIndex::build(store);
    CHECK(again.ids() == index.ids());
    for (std::size_t r = 0; r < index.size(); ++r)
      for (std::size_t j = 0; j < index.dim(); ++j)
        CHECK(again.row(r)[j] == index.row(r)[j]);
  }

  SUBCASE("unnormalized store is rejected") {
    ng::EmbeddingStore raw(2);
    raw.add("A", {1.0f, 1.0f});
    CHECK_THROWS_AS(ng::FlatIndex::build(raw), ng::InputError);
  }

  SUBCASE("a lying normalized flag is caught by the row-norm check") {
    ng::EmbeddingStore lying(2);
    lying.add("A", {1.0f, 1.0f});
    lying.set_normalized(true);
    CHECK_THROWS_AS(ng::FlatIndex::build(lying), ng::InputError);
  }

  SUBCASE("empty store is rejected") {
    ng::EmbeddingStore empty(2);
    empty.set_normalized(true);
    CHECK_THROWS_AS(ng::FlatIndex::build(empty), ng::InputError);
  }
}

TEST_CASE("search worked example") {
  const auto store = unit_store({{"A", {1.0f, 0.0f}},
                                 {"B", {0.0f, 1.0f}},
                                 {"C", {0.8f, 0.6f}}});
  const auto index = ng::FlatIndex::build(store);
  const std::vector<float> query{1.0f, 0.0f};

  const auto top2 = index.search(query, 2);
  REQUIRE(top2.size() == 2);
  CHECK(top2[0].id == "A");
  CHECK(top2[0].score == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(top2[1].id == "C");
  CHECK(top2[1].score == doctest::Approx(0.8).epsilon(1e-7));

  const auto excluded = index.search(query, 2, std::string("A"));
  REQUIRE(excluded.size() == 2);
  CHECK(excluded[0].id == "C");
  CHECK(excluded[1].id == "B");
  CHECK(excluded[1].score == doctest::Approx(0.0).epsilon(1e-7));

  SUBCASE("ties break toward the lower id") {
    const auto tied = unit_store({{"Y", {1.0f, 0.0f}},
                                  {"X", {1.0f, 0.0f}},
                                  {"Z", {0.0f, 1.0f}}});
    const auto tindex = ng::FlatIndex::build(tied);
    const auto result = tindex.search(query, 2);
    CHECK(result[0].id == "X");
    CHECK(result[1].id == "Y");
    CHECK(result[0].score == result[1].score);
  }

  SUBCASE("dimension mismatch") {
    const std::vector<float> bad{1.0f, 0.0f, 0.0f};
    CHECK_THROWS_AS(index.search(bad, 2), ng::InputError);
  }

  SUBCASE("k saturates at available candidates") {
    CHECK(index.search(query, 50).size() == 3);
    CHECK(index.search(query, 50, std::string("A")).size() == 2);
  }
}

TEST_CASE("search equals the scalar brute-force reference") {
  ng::Rng rng(71);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 20 + rng.bounded(80);
    const std::size_t dim = 2 + rng.bounded(15);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i)
      ids.push_back(ngtest::padded_id("V", i));
    auto store = ngtest::random_unit_store(rng, ids, dim);
    store = ng::l2_normalize(store);
    const auto index = ng::FlatIndex::build(store);

    for (int q = 0; q < 10; ++q) {
      const auto& qid = ids[rng.bounded(ids.size())];
      const auto& qvec = *store.find(qid);
      const int k = 1 + static_cast<int>(rng.bounded(n));
      const auto got = index.search(qvec, k, qid);
      const auto want = ngref::search_ref(store, qvec, k, qid);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].id == want[i].id);
        CHECK(got[i].score == doctest::Approx(want[i].score).epsilon(1e-6));
        CHECK(got[i].id != qid);  // self-exclusion
        CHECK(got[i].score <= 1.0 + 1e-5);
        CHECK(got[i].score >= -1.0 - 1e-5);
      }
    }
  }
}

TEST_CASE("insertion order does not change results") {
  ng::Rng rng(5);
  std::vector<std::pair<std::string, std::vector<float>>> rows;
  for (std::size_t i = 0; i < 30; ++i)
    rows.emplace_back(ngtest::padded_id("P", i),
                      ngtest::random_unit_vector(rng, 6));

  ng::EmbeddingStore fwd(6), rev(6);
  for (const auto& [id, vec] : rows) fwd.add(id, vec);
  for (auto it = rows.rbegin(); it != rows.rend(); ++it)
    rev.add(it->first, it->second);

  const auto i1 = ng::FlatIndex::build(ng::l2_normalize(fwd));
  const auto i2 = ng::FlatIndex::build(ng::l2_normalize(rev));
  const auto q = ngtest::random_unit_vector(rng, 6);
  const auto r1 = i1.search(q, 10);
  const auto r2 = i2.search(q, 10);
  REQUIRE(r1.size() == r2.size());
  for (std::size_t i = 0; i < r1.size(); ++i) {
    CHECK(r1[i].id == r2[i].id);
    CHECK(r1[i].score == r2[i].score);
  }
}

TEST_CASE("run_queries") {
  ng::Rng rng(13);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < 10; ++i) ids.push_back(ngtest::padded_id("R", i));
  auto store = ng::l2_normalize(ngtest::random_unit_store(rng, ids, 4));
  const auto index = ng::FlatIndex::build(store);

  ng::QuerySet queries;
  queries.entries.push_back({"R0001", {}});
  queries.entries.push_back({"R0005", {}});
  queries.entries.push_back({"MISSING", {}});

  const auto run = ng::run_queries(index, queries, store, 100);
  CHECK(run.results.size() == 2);
  CHECK(run.skipped == std::vector<std::string>{"MISSING"});
  for (const auto& [qid, neighbors] : run.results) {
    CHECK(neighbors.size() == 9);  // k saturated at n - 1
    for (const auto& n : neighbors) CHECK(n.id != qid);
    for (std::size_t i = 1; i < neighbors.size(); ++i)
      CHECK(neighbors[i - 1].score >= neighbors[i].score);
  }

  SUBCASE("thread count does not change the run") {
    ng::QuerySet all = ngtest::all_queries(
        ngtest::make_corpus([&] {
          std::vector<ngtest::DocSpec> specs;
          for (const auto& id : ids) specs.push_back({id, 2001, {"x", "y"}});
          return specs;
        }()));
    const auto seq = ng::run_queries(index, all, store, 5, 1);
    const auto par = ng::run_queries(index, all, store, 5, 4);
    CHECK(ng::run_jsonl(seq) == ng::run_jsonl(par));
  }
}

TEST_CASE("run JSONL round trip and validation") {
  ng::RankedRun run;
  run.system_name = "sys";
  run.k = 2;
  run.results["Q1"] = {{"N1", 0.9}, {"N2", 0.5}};
  run.results["Q2"] = {{"N9", 0.25}};

  const auto dir = std::filesystem::temp_directory_path() / "ng_retrieval";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "run.jsonl").string();
  ng::write_run_jsonl(run, path);
  const auto loaded = ng::read_run_jsonl(path, "sys");
  CHECK(loaded.k == 2);
  REQUIRE(loaded.results.size() == 2);
  CHECK(loaded.results.at("Q1")[0].id == "N1");
  CHECK(loaded.results.at("Q1")[1].score == 0.5);

  auto write_and_expect_error = [&](const std::string& content,
                                    const char* what) {
    const auto bad = (dir / "bad.jsonl").string();
    std::ofstream out(bad, std::ios::binary);
    out << content;
    out.close();
    CHECK_THROWS_WITH_AS(ng::read_run_jsonl(bad, "sys"),
                         doctest::Contains(what), ng::InputError);
  };

  write_and_expect_error(
      R"({"query":"Q","neighbors":[{"id":"Q","score":1.0}]})" "\n",
      "self-match");
  write_and_expect_error(
      R"({"query":"Q","neighbors":[{"id":"A","score":0.1},{"id":"A","score":0.1}]})" "\n",
      "duplicate");
  write_and_expect_error(
      R"({"query":"Q","neighbors":[{"id":"A","score":0.1},{"id":"B","score":0.5}]})" "\n",
      "non-increasing");
}

TEST_CASE("run scores survive the JSONL interchange bit-exactly") {
  ng::Rng rng(607);
  ng::RankedRun run;
  run.k = 20;
  for (int q = 0; q < 10; ++q) {
    std::vector<ng::Neighbor> neighbors;
    double score = 1.0;
    for (int i = 0; i < 20; ++i) {
      score -= rng.next_double() * 0.05;  // strictly decreasing doubles
      neighbors.push_back({ngtest::padded_id("N", rng.bounded(100000)), score});
    }
    // Neighbor ids must be distinct per query; regenerate collisions.
    std::set<std::string> seen;
    for (auto& n : neighbors)
      while (!seen.insert(n.id).second)
        n.id = ngtest::padded_id("N", rng.bounded(100000));
    run.results[ngtest::padded_id("Q", static_cast<std::size_t>(q))] =
        std::move(neighbors);
  }

  const auto dir = std::filesystem::temp_directory_path() / "ng_retrieval";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "precision.jsonl").string();
  ng::write_run_jsonl(run, path);
  const auto loaded = ng::read_run_jsonl(path, "x");
  for (const auto& [qid, neighbors] : run.results) {
    const auto& got = loaded.results.at(qid);
    REQUIRE(got.size() == neighbors.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].id == neighbors[i].id);
      CHECK(std::memcmp(&got[i].score, &neighbors[i].score, sizeof(double)) ==
            0);
    }
  }
}
