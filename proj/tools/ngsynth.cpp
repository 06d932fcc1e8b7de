// ngsynth: deterministic synthetic corpus generator for pipeline smoke runs
// and the bundled sample data. Two embedding systems are derived from the
// same keyword-topic latents with different noise levels, so system "sysA"
// genuinely retrieves better than "sysB".

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ng/corpus.hpp"
#include "ng/pooling.hpp"
#include "ng/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<double> random_unit(ng::Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double norm = 0.0;
  for (auto& x : v) {
    // Box-Muller from two uniforms.
    const double u1 = rng.next_double();
    const double u2 = rng.next_double();
    x = std::sqrt(-2.0 * std::log(u1 + 1e-300)) *
        std::cos(2.0 * 3.14159265358979323846 * u2);
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

std::string doc_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "CASE-%04zu", i + 1);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic corpus generator"};
  std::string out_dir = "data/synthetic";
  std::uint64_t seed = 7;
  std::size_t n_docs = 200;
  std::size_t dim = 12;
  app.add_option("--out-dir", out_dir, "output directory");
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--docs", n_docs, "document count");
  app.add_option("--dim", dim, "embedding dimension");
  CLI11_PARSE(app, argc, argv);

  fs::create_directories(out_dir);
  ng::Rng rng(seed);

  // Vocabulary with a skewed document-frequency profile: low-index terms are
  // common (low IDF), high-index terms rare (high IDF).
  const std::size_t vocab = 40;
  std::vector<std::string> terms(vocab);
  for (std::size_t t = 0; t < vocab; ++t) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "kw%02zu", t);
    terms[t] = buf;
  }

  struct Doc {
    std::string id;
    int year;
    std::vector<std::size_t> term_idx;
    std::int64_t chars;
    bool has_chars;
  };
  std::vector<Doc> docs(n_docs);
  for (std::size_t i = 0; i < n_docs; ++i) {
    Doc& d = docs[i];
    d.id = doc_id(i);
    d.year = 2001 + static_cast<int>(rng.bounded(12));
    // Keyword count profile: a few 0/1-keyword docs, the bulk with 2..10.
    const std::uint64_t roll = rng.bounded(100);
    std::size_t count;
    if (roll < 5) count = 0;
    else if (roll < 10) count = 1;
    else if (roll < 45) count = 2 + rng.bounded(2);       // 2-3
    else if (roll < 80) count = 4 + rng.bounded(4);       // 4-7
    else count = 8 + rng.bounded(3);                      // 8-10
    while (d.term_idx.size() < count) {
      // Triangular skew toward low indices.
      const std::size_t a = rng.bounded(vocab);
      const std::size_t b = rng.bounded(vocab);
      const std::size_t pick = std::min(a, b);
      bool seen = false;
      for (std::size_t existing : d.term_idx)
        if (existing == pick) { seen = true; break; }
      if (!seen) d.term_idx.push_back(pick);
    }
    d.chars = 6000 + static_cast<std::int64_t>(rng.bounded(30000));
    d.has_chars = rng.bounded(10) != 0;  // ~10% lack char_count
  }

  // metadata.jsonl
  {
    std::ofstream out(fs::path(out_dir) / "metadata.jsonl", std::ios::binary);
    for (const auto& d : docs) {
      json obj;
      obj["id"] = d.id;
      char date[16];
      std::snprintf(date, sizeof date, "%04d-%02d-%02d", d.year,
                    1 + static_cast<int>(rng.bounded(12)),
                    1 + static_cast<int>(rng.bounded(28)));
      obj["date"] = date;
      json kws = json::array();
      for (std::size_t t : d.term_idx) kws.push_back(terms[t]);
      obj["keywords"] = std::move(kws);
      if (d.has_chars) obj["char_count"] = d.chars;
      out << obj.dump() << "\n";
    }
  }

  // Topic latents and the two systems.
  std::vector<std::vector<double>> topic(vocab);
  for (auto& v : topic) v = random_unit(rng, dim);

  auto write_system = [&](const std::string& name, double noise,
                          std::size_t drop_last) {
    std::ofstream out(fs::path(out_dir) / name, std::ios::binary);
    for (std::size_t i = 0; i + drop_last < docs.size(); ++i) {
      const auto& d = docs[i];
      std::vector<double> latent(dim, 0.0);
      if (d.term_idx.empty()) {
        latent = random_unit(rng, dim);
      } else {
        for (std::size_t t : d.term_idx)
          for (std::size_t c = 0; c < dim; ++c) latent[c] += topic[t][c];
      }
      const auto noise_vec = random_unit(rng, dim);
      double norm = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        latent[c] += noise * noise_vec[c];
        norm += latent[c] * latent[c];
      }
      norm = std::sqrt(norm);
      json obj;
      obj["id"] = d.id;
      json vec = json::array();
      for (std::size_t c = 0; c < dim; ++c) vec.push_back(latent[c] / norm);
      obj["vector"] = std::move(vec);
      out << obj.dump() << "\n";
    }
  };
  write_system("emb_sysA.jsonl", 0.6, 0);
  write_system("emb_sysB.jsonl", 2.4, 3);  // noisier, and misses 3 docs

  // Hidden states for the pooling stage demo: first 6 docs, small windows.
  {
    std::vector<ng::WindowStates> states;
    const std::size_t hidden = 8;
    for (std::size_t i = 0; i < 6; ++i) {
      ng::WindowStates ws;
      ws.doc_id = docs[i].id;
      const std::size_t n_windows = 1 + rng.bounded(3);
      for (std::size_t w = 0; w < n_windows; ++w) {
        ng::Matrix m;
        m.rows = 4 + rng.bounded(4);
        m.cols = hidden;
        m.data.resize(m.rows * m.cols);
        for (auto& x : m.data)
          x = static_cast<float>(rng.next_double() * 2.0 - 1.0);
        ws.windows.push_back(std::move(m));
      }
      states.push_back(std::move(ws));
    }
    ng::write_hidden_states(states,
                            (fs::path(out_dir) / "hidden_states.nghs").string(),
                            (fs::path(out_dir) / "hidden_states.windows.json")
                                .string());
    ng::AttentionHead head;
    head.w = random_unit(rng, hidden);
    ng::save_head_json(head,
                       (fs::path(out_dir) / "attention_head.json").string());
  }

  // Ready-to-run pipeline config (paths relative to the config location).
  {
    json cfg;
    cfg["metadata"] = "metadata.jsonl";
    cfg["stores"] = {{"sysA", "emb_sysA.jsonl"}, {"sysB", "emb_sysB.jsonl"}};
    cfg["query_n"] = 100;
    cfg["k_list"] = {10, 20, 100};
    cfg["tau_list"] = {0.20, 0.28};
    cfg["rbp_p"] = 0.9;
    cfg["bootstrap_B"] = 2000;
    cfg["seed_sampling"] = 42;
    cfg["seed_bootstrap"] = 42;
    cfg["map_normalization"] = "topk-hits";
    std::ofstream out(fs::path(out_dir) / "config.json", std::ios::binary);
    out << cfg.dump(2) << "\n";
  }

  std::cout << "wrote synthetic corpus (" << n_docs << " docs, dim " << dim
            << ") to " << out_dir << "\n";
  return 0;
}
