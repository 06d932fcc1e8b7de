// ngeval: noise-aware evaluation pipeline for embedding-based retrieval.
// Subcommands: idf, drift, sample, pool, index, search, eval, compare,
// report. Exit codes: 0 ok, 2 usage, 3 input error, 4 integrity error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ng/corpus.hpp"
#include "ng/drift.hpp"
#include "ng/error.hpp"
#include "ng/format.hpp"
#include "ng/manifest.hpp"
#include "ng/metrics.hpp"
#include "ng/pooling.hpp"
#include "ng/relevance.hpp"
#include "ng/report_tables.hpp"
#include "ng/retrieval.hpp"
#include "ng/sampling.hpp"
#include "ng/significance.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunConfig {
  std::string metadata;
  std::map<std::string, std::string> stores;  // system name -> path
  std::string out_dir = ".";
  std::vector<int> k_list{10, 20, 100};
  std::vector<double> tau_list{0.20, 0.28};
  double rbp_p = 0.9;
  std::int64_t bootstrap_b = 2000;
  std::uint64_t seed_sampling = 42;
  std::uint64_t seed_bootstrap = 42;
  std::int64_t query_n = 2000;
  std::string map_normalization = "topk-hits";
  std::optional<std::int64_t> min_chars;
  int threads = 1;
};

std::string resolve_against(const fs::path& base, const std::string& path) {
  if (path.empty()) return path;
  fs::path p(path);
  if (p.is_absolute()) return p.string();
  return (base / p).lexically_normal().string();
}

RunConfig load_config(const std::string& path) {
  RunConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw ng::InputError("cannot open config: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ng::InputError(path + ": malformed config JSON (" + e.what() + ")");
  }
  const fs::path base = fs::path(path).parent_path();
  if (doc.contains("metadata"))
    cfg.metadata = resolve_against(base, doc["metadata"].get<std::string>());
  if (doc.contains("stores"))
    for (const auto& [name, p] : doc["stores"].items())
      cfg.stores[name] = resolve_against(base, p.get<std::string>());
  if (doc.contains("out_dir")) cfg.out_dir = doc["out_dir"].get<std::string>();
  if (doc.contains("k_list")) cfg.k_list = doc["k_list"].get<std::vector<int>>();
  if (doc.contains("tau_list"))
    cfg.tau_list = doc["tau_list"].get<std::vector<double>>();
  if (doc.contains("rbp_p")) cfg.rbp_p = doc["rbp_p"].get<double>();
  if (doc.contains("bootstrap_B"))
    cfg.bootstrap_b = doc["bootstrap_B"].get<std::int64_t>();
  if (doc.contains("seed_sampling"))
    cfg.seed_sampling = doc["seed_sampling"].get<std::uint64_t>();
  if (doc.contains("seed_bootstrap"))
    cfg.seed_bootstrap = doc["seed_bootstrap"].get<std::uint64_t>();
  if (doc.contains("query_n")) cfg.query_n = doc["query_n"].get<std::int64_t>();
  if (doc.contains("map_normalization"))
    cfg.map_normalization = doc["map_normalization"].get<std::string>();
  if (doc.contains("min_chars") && !doc["min_chars"].is_null())
    cfg.min_chars = doc["min_chars"].get<std::int64_t>();
  if (doc.contains("threads")) cfg.threads = doc["threads"].get<int>();

  std::sort(cfg.k_list.begin(), cfg.k_list.end());
  cfg.k_list.erase(std::unique(cfg.k_list.begin(), cfg.k_list.end()),
                   cfg.k_list.end());
  std::sort(cfg.tau_list.begin(), cfg.tau_list.end());
  cfg.tau_list.erase(std::unique(cfg.tau_list.begin(), cfg.tau_list.end()),
                     cfg.tau_list.end());
  return cfg;
}

// Hash of the semantic configuration only: everything that changes results,
// nothing that merely locates files. Stages staged under different hashes
// are mixed snapshots.
std::string config_hash(const RunConfig& cfg) {
  json doc;
  doc["k_list"] = cfg.k_list;
  doc["tau_list"] = cfg.tau_list;
  doc["rbp_p"] = cfg.rbp_p;
  doc["bootstrap_B"] = cfg.bootstrap_b;
  doc["seed_sampling"] = cfg.seed_sampling;
  doc["seed_bootstrap"] = cfg.seed_bootstrap;
  doc["query_n"] = cfg.query_n;
  doc["map_normalization"] = cfg.map_normalization;
  if (cfg.min_chars) doc["min_chars"] = *cfg.min_chars;
  return ng::digest_string(doc.dump());
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  fs::path p(name);
  if (p.is_absolute()) return p.string();
  fs::create_directories(cfg.out_dir);
  return (fs::path(cfg.out_dir) / p).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ng::InputError("cannot open file for writing: " + path);
  out << text;
}

ng::EvalConfig eval_config(const RunConfig& cfg) {
  ng::EvalConfig ec;
  ec.k_list = cfg.k_list;
  ec.tau_list = cfg.tau_list;
  ec.rbp_p = cfg.rbp_p;
  ec.map_norm = ng::parse_map_normalization(cfg.map_normalization);
  return ec;
}

const std::string& require_metadata(const RunConfig& cfg) {
  if (cfg.metadata.empty())
    throw ng::InputError("no metadata path (set it in the config or --metadata)");
  return cfg.metadata;
}

void check_config_hash(const std::optional<ng::StageManifest>& manifest,
                       const RunConfig& cfg, const std::string& artifact) {
  if (!manifest || manifest->config_hash.empty()) return;
  if (manifest->config_hash != config_hash(cfg))
    throw ng::IntegrityError(
        artifact + " was staged under a different configuration (hash " +
        manifest->config_hash + " != " + config_hash(cfg) + ")");
}

// ---------------------------------------------------------------------------

int cmd_idf(const RunConfig& cfg, const std::string& out_name) {
  const auto& meta = require_metadata(cfg);
  const ng::Corpus corpus = ng::load_metadata(meta, cfg.min_chars);
  const ng::IdfTable idf = ng::compute_idf(corpus);
  const std::string out = out_path(cfg, out_name);
  ng::write_idf_csv(idf, out);

  ng::StageManifest manifest;
  manifest.stage = "idf";
  manifest.config_hash = config_hash(cfg);
  manifest.input_paths["metadata"] = meta;
  manifest.input_digests["metadata"] = ng::digest_file(meta);
  manifest.metadata_digest = manifest.input_digests["metadata"];
  ng::write_stage_manifest(out, manifest);
  std::cout << "wrote " << out << " (" << idf.entries().size() << " terms, N="
            << idf.n_keyworded() << ")\n";
  return 0;
}

int cmd_drift(const RunConfig& cfg, const std::string& prefix,
              std::int64_t pairs) {
  const auto& meta = require_metadata(cfg);
  const ng::Corpus corpus = ng::load_metadata(meta, cfg.min_chars);

  const auto stats = ng::annual_stats(corpus);
  const std::string yearly = out_path(cfg, prefix + "_yearly.csv");
  write_text(yearly, ng::annual_stats_csv(stats));

  const auto scenarios = ng::default_scenarios();
  const std::string scen = out_path(cfg, prefix + "_scenarios.csv");
  write_text(scen, ng::scenario_csv(scenarios));

  ng::StageManifest manifest;
  manifest.stage = "drift";
  manifest.config_hash = config_hash(cfg);
  manifest.input_paths["metadata"] = meta;
  manifest.input_digests["metadata"] = ng::digest_file(meta);
  manifest.metadata_digest = manifest.input_digests["metadata"];
  ng::write_stage_manifest(yearly, manifest);

  std::cout << "wrote " << yearly << " and " << scen << "\n";
  if (pairs > 0) {
    const auto emp = ng::empirical_overlap(corpus, pairs, cfg.seed_sampling);
    const std::string epath = out_path(cfg, prefix + "_empirical.csv");
    write_text(epath, "pairs,mean_overlap,zero_fraction,seed\n" +
                          std::to_string(emp.pairs) + "," +
                          ng::fmt_g(emp.mean_overlap) + "," +
                          ng::fmt_g(emp.zero_fraction) + "," +
                          std::to_string(cfg.seed_sampling) + "\n");
    std::cout << "wrote " << epath << "\n";
  }
  return 0;
}

int cmd_sample(const RunConfig& cfg, const std::string& out_name,
               std::int64_t n, bool no_intersect) {
  const auto& meta = require_metadata(cfg);
  const ng::Corpus corpus = ng::load_metadata(meta, cfg.min_chars);
  const ng::IdfTable idf = ng::compute_idf(corpus);

  std::optional<std::set<std::string>> restrict_to;
  std::vector<ng::EmbeddingStore> loaded;
  if (!no_intersect && !cfg.stores.empty()) {
    std::vector<const ng::EmbeddingStore*> ptrs;
    loaded.reserve(cfg.stores.size());
    for (const auto& [name, path] : cfg.stores) {
      loaded.push_back(ng::load_embeddings(path));
      ptrs.push_back(&loaded.back());
    }
    const auto ids = ng::intersect_ids(ptrs, corpus);
    restrict_to.emplace(ids.begin(), ids.end());
  }

  const auto queries =
      ng::sample_queries(corpus, idf, n, cfg.seed_sampling,
                         restrict_to ? &*restrict_to : nullptr);
  if (queries.pool_exhausted)
    std::cerr << "warning: target_n=" << n << " exceeds the eligible pool; "
              << queries.entries.size() << " queries selected\n";

  const std::string out = out_path(cfg, out_name);
  ng::write_queryset_csv(queries, out);

  ng::StageManifest manifest;
  manifest.stage = "sample";
  manifest.config_hash = config_hash(cfg);
  manifest.input_paths["metadata"] = meta;
  manifest.input_digests["metadata"] = ng::digest_file(meta);
  manifest.metadata_digest = manifest.input_digests["metadata"];
  for (const auto& [name, path] : cfg.stores) {
    if (no_intersect) break;
    manifest.input_paths["store:" + name] = path;
    manifest.input_digests["store:" + name] = ng::digest_file(path);
  }
  ng::write_stage_manifest(out, manifest);
  std::cout << "wrote " << out << " (" << queries.entries.size()
            << " queries)\n";
  return 0;
}

int cmd_pool(const RunConfig& cfg, const std::string& states_path,
             const std::string& states_manifest, const std::string& mode_label,
             const std::string& head_path, const std::string& out_name) {
  const auto states = ng::HiddenStatesFile::open(states_path, states_manifest);
  const ng::PoolMode mode = ng::parse_pool_mode(mode_label);
  std::optional<ng::AttentionHead> head;
  if (!head_path.empty()) head = ng::load_head_json(head_path);
  if (mode == ng::PoolMode::kAttention && !head)
    throw ng::InputError("attention pooling requires --head");

  const auto store =
      ng::pool_documents(states, mode, head ? &*head : nullptr);
  const std::string out = out_path(cfg, out_name);
  if (out.ends_with(".jsonl")) ng::save_embeddings_jsonl(store, out);
  else ng::save_embeddings_binary(store, out);

  ng::StageManifest manifest;
  manifest.stage = "pool";
  manifest.config_hash = config_hash(cfg);
  manifest.input_paths["states"] = states_path;
  manifest.input_digests["states"] = ng::digest_file(states_path);
  manifest.input_paths["states_manifest"] = states_manifest;
  manifest.input_digests["states_manifest"] = ng::digest_file(states_manifest);
  if (!head_path.empty()) {
    manifest.input_paths["head"] = head_path;
    manifest.input_digests["head"] = ng::digest_file(head_path);
  }
  ng::write_stage_manifest(out, manifest);
  std::cout << "wrote " << out << " (" << store.size() << " vectors, dim "
            << store.dim() << ")\n";
  return 0;
}

int cmd_index(const RunConfig& cfg, const std::string& embeddings_path,
              std::optional<std::size_t> expect_dim,
              const std::string& out_name) {
  const auto raw = ng::load_embeddings(embeddings_path, expect_dim);
  const auto unit = ng::l2_normalize(raw);
  ng::FlatIndex::build(unit);  // validates; the artifact is the store itself
  const std::string out = out_path(cfg, out_name);
  ng::save_embeddings_binary(unit, out);

  ng::StageManifest manifest;
  manifest.stage = "index";
  manifest.config_hash = config_hash(cfg);
  manifest.input_paths["embeddings"] = embeddings_path;
  manifest.input_digests["embeddings"] = ng::digest_file(embeddings_path);
  ng::write_stage_manifest(out, manifest);
  std::cout << "wrote " << out << " (" << unit.size() << " vectors, dim "
            << unit.dim() << ")\n";
  return 0;
}

int cmd_search(const RunConfig& cfg, const std::string& index_path,
               const std::string& queries_path, int k,
               const std::string& out_name) {
  auto store = ng::load_embeddings(index_path);
  store = ng::l2_normalize(store);  // normalization is idempotent on units
  const auto index = ng::FlatIndex::build(store);
  const auto queries = ng::read_queryset_csv(queries_path);
  if (k < 1) k = cfg.k_list.empty() ? 100 : cfg.k_list.back();

  auto run = ng::run_queries(index, queries, store, k, cfg.threads);
  if (!run.skipped.empty())
    std::cerr << "warning: " << run.skipped.size()
              << " queries missing from the store were skipped\n";

  const std::string out = out_path(cfg, out_name);
  ng::write_run_jsonl(run, out);

  ng::StageManifest manifest;
  manifest.stage = "search";
  manifest.config_hash = config_hash(cfg);
  manifest.input_paths["index"] = index_path;
  manifest.input_digests["index"] = ng::digest_file(index_path);
  manifest.input_paths["queries"] = queries_path;
  manifest.input_digests["queries"] = ng::digest_file(queries_path);
  if (auto upstream = ng::read_stage_manifest(queries_path))
    manifest.metadata_digest = upstream->metadata_digest;
  if (!run.skipped.empty()) {
    std::string joined;
    for (const auto& id : run.skipped)
      joined += (joined.empty() ? "" : ";") + id;
    manifest.input_paths["skipped_queries"] = joined;
  }
  ng::write_stage_manifest(out, manifest);
  std::cout << "wrote " << out << " (" << run.results.size() << " queries, k="
            << k << ")\n";
  return 0;
}

int cmd_eval(const RunConfig& cfg, const std::string& run_path,
             const std::string& system_name, const std::string& out_name,
             bool per_query) {
  const auto& meta = require_metadata(cfg);
  const std::string meta_digest = ng::digest_file(meta);

  // Refuse runs staged against a different corpus snapshot.
  if (auto manifest = ng::read_stage_manifest(run_path)) {
    if (!manifest->metadata_digest.empty() &&
        manifest->metadata_digest != meta_digest)
      throw ng::IntegrityError(
          "run " + run_path + " was produced against metadata digest " +
          manifest->metadata_digest + ", but " + meta + " has digest " +
          meta_digest);
    check_config_hash(manifest, cfg, run_path);
  }

  const ng::Corpus corpus = ng::load_metadata(meta, cfg.min_chars);
  const ng::IdfTable idf = ng::compute_idf(corpus);
  std::string name = system_name;
  if (name.empty()) name = fs::path(run_path).stem().string();
  auto run = ng::read_run_jsonl(run_path, name);

  const ng::Evaluator evaluator(corpus, idf, eval_config(cfg));
  const auto report = evaluator.evaluate(run, per_query);
  const std::string out = out_path(cfg, out_name);
  ng::write_report_json(report, out, per_query);

  ng::StageManifest manifest;
  manifest.stage = "eval";
  manifest.config_hash = config_hash(cfg);
  manifest.input_paths["run"] = run_path;
  manifest.input_digests["run"] = ng::digest_file(run_path);
  manifest.input_paths["metadata"] = meta;
  manifest.input_digests["metadata"] = meta_digest;
  manifest.metadata_digest = meta_digest;
  ng::write_stage_manifest(out, manifest);
  std::cout << "wrote " << out << " (" << run.results.size()
            << " queries scored)\n";
  return 0;
}

int cmd_compare(const RunConfig& cfg, const std::string& report_a_path,
                const std::string& report_b_path, std::string name_a,
                std::string name_b, const std::string& metrics_csv, int k,
                const std::string& out_prefix) {
  const auto report_a = ng::read_report_json(report_a_path);
  const auto report_b = ng::read_report_json(report_b_path);
  if (name_a.empty())
    name_a = report_a.system_name.empty() ? "A" : report_a.system_name;
  if (name_b.empty())
    name_b = report_b.system_name.empty() ? "B" : report_b.system_name;

  const auto ma = ng::read_stage_manifest(report_a_path);
  const auto mb = ng::read_stage_manifest(report_b_path);
  if (ma && mb && !ma->metadata_digest.empty() &&
      !mb->metadata_digest.empty() &&
      ma->metadata_digest != mb->metadata_digest)
    throw ng::IntegrityError(
        "reports were evaluated against different corpus snapshots");

  ng::CompareRequest request;
  request.k = k;
  if (!metrics_csv.empty()) {
    request.bases.clear();
    std::string cur;
    for (char c : metrics_csv + ",") {
      if (c == ',') {
        if (!cur.empty()) request.bases.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
  }

  const auto rows = ng::compare_runs(report_a, report_b, request,
                                     cfg.bootstrap_b, cfg.seed_bootstrap);
  const std::string md = out_path(cfg, out_prefix + ".md");
  const std::string csv = out_path(cfg, out_prefix + ".csv");
  write_text(md, ng::comparison_markdown(name_a, name_b, rows));
  write_text(csv, ng::comparison_csv(name_a, name_b, rows));

  ng::StageManifest manifest;
  manifest.stage = "compare";
  manifest.config_hash = config_hash(cfg);
  manifest.input_paths["report_a"] = report_a_path;
  manifest.input_digests["report_a"] = ng::digest_file(report_a_path);
  manifest.input_paths["report_b"] = report_b_path;
  manifest.input_digests["report_b"] = ng::digest_file(report_b_path);
  if (ma && !ma->metadata_digest.empty())
    manifest.metadata_digest = ma->metadata_digest;
  ng::write_stage_manifest(csv, manifest);
  std::cout << "wrote " << md << " and " << csv << " (" << rows.size()
            << " rows)\n";
  return 0;
}

int cmd_report(const RunConfig& cfg,
               const std::vector<std::string>& report_paths,
               std::vector<std::string> names, const std::string& out_prefix) {
  if (report_paths.empty()) throw ng::InputError("no reports given");
  std::vector<ng::MetricsReport> reports;
  reports.reserve(report_paths.size());
  for (const auto& path : report_paths)
    reports.push_back(ng::read_report_json(path));
  while (names.size() < reports.size()) {
    const auto& r = reports[names.size()];
    names.push_back(r.system_name.empty()
                        ? fs::path(report_paths[names.size()]).stem().string()
                        : r.system_name);
  }
  std::vector<ng::NamedReport> named;
  for (std::size_t i = 0; i < reports.size(); ++i)
    named.push_back({names[i], &reports[i]});

  const std::string md = out_path(cfg, out_prefix + ".md");
  const std::string csv = out_path(cfg, out_prefix + ".csv");
  write_text(md, ng::report_tables_markdown(named));
  write_text(csv, ng::report_tables_csv(named));
  std::cout << "wrote " << md << " and " << csv << "\n";
  return 0;
}

void emit_error(const char* kind, const std::string& message) {
  json err;
  err["error"] = kind;
  err["message"] = message;
  std::cerr << err.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"noise-aware retrieval evaluation toolkit"};
  app.require_subcommand(1);

  std::string config_path, metadata_flag, out_dir_flag;
  std::optional<std::uint64_t> seed_sampling_flag, seed_bootstrap_flag;
  std::optional<int> threads_flag;
  std::optional<std::int64_t> min_chars_flag;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--metadata", metadata_flag, "metadata JSONL (overrides config)");
  app.add_option("--out-dir", out_dir_flag, "output directory");
  app.add_option("--seed-sampling", seed_sampling_flag, "query sampling seed");
  app.add_option("--seed-bootstrap", seed_bootstrap_flag, "bootstrap seed");
  app.add_option("--threads", threads_flag, "worker threads for search");
  app.add_option("--min-chars", min_chars_flag,
                 "drop records with char_count below this");

  auto* sc_idf = app.add_subcommand("idf", "compute the IDF table");
  std::string idf_out = "idf.csv";
  sc_idf->add_option("--out", idf_out, "output CSV name");

  auto* sc_drift = app.add_subcommand("drift", "label-drift diagnostics");
  std::string drift_prefix = "drift";
  std::int64_t drift_pairs = 0;
  sc_drift->add_option("--out-prefix", drift_prefix, "output prefix");
  sc_drift->add_option("--pairs", drift_pairs,
                       "also sample this many document pairs");

  auto* sc_sample = app.add_subcommand("sample", "stratified query sampling");
  std::string sample_out = "queries.csv";
  std::int64_t sample_n = -1;
  bool no_intersect = false;
  sc_sample->add_option("--out", sample_out, "output CSV name");
  sc_sample->add_option("--n", sample_n, "target query count");
  sc_sample->add_flag("--no-intersect", no_intersect,
                      "sample from the whole corpus, not the store intersection");

  auto* sc_pool = app.add_subcommand("pool", "pool hidden states to embeddings");
  std::string pool_states, pool_manifest, pool_mode = "mean", pool_head;
  std::string pool_out = "pooled.ngem";
  sc_pool->add_option("--states", pool_states, "hidden-state file")->required();
  sc_pool->add_option("--states-manifest", pool_manifest,
                      "sidecar window manifest")->required();
  sc_pool->add_option("--mode", pool_mode, "mean | attention");
  sc_pool->add_option("--head", pool_head, "attention head JSON");
  sc_pool->add_option("--out", pool_out,
                      "output store (.jsonl for JSONL, else binary)");

  auto* sc_index = app.add_subcommand("index", "normalize and freeze a store");
  std::string index_embeddings, index_out = "index.ngem";
  std::optional<std::size_t> index_dim;
  sc_index->add_option("--embeddings", index_embeddings, "input store")
      ->required();
  sc_index->add_option("--expect-dim", index_dim, "required dimension");
  sc_index->add_option("--out", index_out, "output binary store");

  auto* sc_search = app.add_subcommand("search", "exact top-k retrieval");
  std::string search_index, search_queries, search_out = "run.jsonl";
  int search_k = -1;
  sc_search->add_option("--index", search_index, "index store")->required();
  sc_search->add_option("--queries", search_queries, "query CSV")->required();
  sc_search->add_option("--k", search_k, "neighbors per query");
  sc_search->add_option("--out", search_out, "output run JSONL");

  auto* sc_eval = app.add_subcommand("eval", "score a ranked run");
  std::string eval_run, eval_system, eval_out = "report.json";
  bool eval_no_per_query = false;
  sc_eval->add_option("--run", eval_run, "run JSONL")->required();
  sc_eval->add_option("--system", eval_system, "system name for the report");
  sc_eval->add_option("--out", eval_out, "output report JSON");
  sc_eval->add_flag("--no-per-query", eval_no_per_query,
                    "omit per-query values (disables later comparison)");

  auto* sc_compare = app.add_subcommand("compare", "paired bootstrap of two reports");
  std::string cmp_a, cmp_b, cmp_name_a, cmp_name_b, cmp_metrics;
  std::string cmp_out = "comparison";
  int cmp_k = 10;
  sc_compare->add_option("--report-a", cmp_a, "first report")->required();
  sc_compare->add_option("--report-b", cmp_b, "second report")->required();
  sc_compare->add_option("--name-a", cmp_name_a, "label for A");
  sc_compare->add_option("--name-b", cmp_name_b, "label for B");
  sc_compare->add_option("--metrics", cmp_metrics,
                         "comma list of ndcg,p,map,hit,rbp");
  sc_compare->add_option("--k", cmp_k, "depth for the comparison");
  sc_compare->add_option("--out-prefix", cmp_out, "output prefix");

  auto* sc_report = app.add_subcommand("report", "render metric tables");
  std::vector<std::string> report_paths, report_names;
  std::string report_out = "tables";
  sc_report->add_option("--report", report_paths, "report JSON (repeatable)")
      ->required();
  sc_report->add_option("--name", report_names, "model label (repeatable)");
  sc_report->add_option("--out-prefix", report_out, "output prefix");

  // Global flags remain usable after the subcommand name.
  for (auto* sub : app.get_subcommands({})) sub->fallthrough(true);

  try {
    app.parse(argc, argv);

    RunConfig cfg = load_config(config_path);
    if (!metadata_flag.empty()) cfg.metadata = metadata_flag;
    if (!out_dir_flag.empty()) cfg.out_dir = out_dir_flag;
    if (seed_sampling_flag) cfg.seed_sampling = *seed_sampling_flag;
    if (seed_bootstrap_flag) cfg.seed_bootstrap = *seed_bootstrap_flag;
    if (threads_flag) cfg.threads = *threads_flag;
    if (min_chars_flag) cfg.min_chars = *min_chars_flag;

    if (sc_idf->parsed()) return cmd_idf(cfg, idf_out);
    if (sc_drift->parsed()) return cmd_drift(cfg, drift_prefix, drift_pairs);
    if (sc_sample->parsed())
      return cmd_sample(cfg, sample_out,
                        sample_n > 0 ? sample_n : cfg.query_n, no_intersect);
    if (sc_pool->parsed())
      return cmd_pool(cfg, pool_states, pool_manifest, pool_mode, pool_head,
                      pool_out);
    if (sc_index->parsed())
      return cmd_index(cfg, index_embeddings, index_dim, index_out);
    if (sc_search->parsed())
      return cmd_search(cfg, search_index, search_queries, search_k,
                        search_out);
    if (sc_eval->parsed())
      return cmd_eval(cfg, eval_run, eval_system, eval_out,
                      !eval_no_per_query);
    if (sc_compare->parsed())
      return cmd_compare(cfg, cmp_a, cmp_b, cmp_name_a, cmp_name_b,
                         cmp_metrics, cmp_k, cmp_out);
    if (sc_report->parsed())
      return cmd_report(cfg, report_paths, report_names, report_out);
    emit_error("usage", "no subcommand given");
    return 2;
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    emit_error("usage", e.what());
    return 2;
  } catch (const ng::IntegrityError& e) {
    emit_error("integrity", e.what());
    return 4;
  } catch (const ng::InputError& e) {
    emit_error("input", e.what());
    return 3;
  } catch (const std::exception& e) {
    emit_error("input", e.what());
    return 3;
  }
}
