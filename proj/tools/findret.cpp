// findret: index, query, evaluate and simulate from the command line.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "findret/findret.hpp"

namespace fs = std::filesystem;
using namespace findret;

namespace {

constexpr int kExitComputation = 1;
constexpr int kExitUsage = 2;

struct Globals {
  std::size_t threads = default_thread_count();
  std::uint64_t seed = 0;
};

struct TokenizerFlags {
  std::string stopwords = std::string(FINDRET_DATA_DIR) + "/stopwords_en.txt";
  std::string lemmas = std::string(FINDRET_DATA_DIR) + "/lemmas_en.tsv";
  double min_df = 0.0005;
  double max_df = 0.9;
  int ngram = 3;
  std::size_t colloc_min_count = 5;

  TokenizerConfig config() const {
    TokenizerConfig cfg;
    cfg.lexicon = Lexicon::load(stopwords, lemmas);
    cfg.min_df = min_df;
    cfg.max_df = max_df;
    cfg.ngram_max = ngram;
    cfg.collocation_min_count = colloc_min_count;
    return cfg;
  }
};

struct LexicalFlags {
  std::optional<double> k1;
  std::optional<double> b;
  std::optional<double> delta;

  std::optional<Bm25Params> params(LexicalVariant v) const {
    if (!k1 && !b && !delta) return std::nullopt;
    auto p = Bm25Params::defaults_for(v);
    if (k1) p.k1 = *k1;
    if (b) p.b = *b;
    if (delta) p.delta = *delta;
    return p;
  }
};

struct PrefilterFlags {
  bool enabled = false;
  double jaccard_min = 1.0 / 3.0;
  double hier_min = 1.0 / 3.0;

  PrefilterConfig config() const {
    PrefilterConfig c;
    c.jaccard_min = jaccard_min;
    c.hier_min = hier_min;
    return c;
  }
};

void add_lexical_flags(CLI::App* cmd, LexicalFlags& f) {
  cmd->add_option("--k1", f.k1, "BM25 term saturation k1 (default 1.6)");
  cmd->add_option("--b", f.b, "BM25 length normalization b (default 0.75)");
  cmd->add_option("--delta", f.delta, "BM25+/BM25L delta (default 1 for bm25plus, 0.5 for bm25l/bm25lplus, 0 otherwise)");
}

void add_prefilter_flags(CLI::App* cmd, PrefilterFlags& f) {
  cmd->add_flag("--prefilter", f.enabled, "Restrict candidates by CRR reference similarity");
  cmd->add_option("--jaccard-min", f.jaccard_min, "Prefilter Jaccard threshold")->capture_default_str();
  cmd->add_option("--hier-min", f.hier_min, "Prefilter hierarchical-similarity threshold")->capture_default_str();
}

// ---------------------------------------------------------------------------
// Index directory

namespace artifact {
constexpr const char* kCorpus = "corpus.jsonl";
constexpr const char* kTokenizer = "tokenizer.json";
constexpr const char* kTokens = "tokens.jsonl";
constexpr const char* kStats = "stats.json";
constexpr const char* kLexical = "lexical.lxix";
constexpr const char* kEmbeddings = "embeddings.emb";
constexpr const char* kMeasures = "measures.jsonl";
constexpr const char* kTree = "crr_tree.txt";
}  // namespace artifact

std::string in_dir(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

void write_json_file(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

Engine load_engine(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("index directory not found: " + dir);
  auto corpus = load_corpus(in_dir(dir, artifact::kCorpus));
  auto tokenizer = QueryTokenizer::from_json(read_json_file(in_dir(dir, artifact::kTokenizer)));
  const auto lexical = LexicalIndex::load(in_dir(dir, artifact::kLexical));
  std::optional<EmbeddingSet> embeddings;
  if (fs::exists(in_dir(dir, artifact::kEmbeddings))) {
    const auto ids = corpus.ids();
    embeddings = load_embeddings(in_dir(dir, artifact::kEmbeddings), ids);
  }
  std::vector<Measure> measures;
  if (fs::exists(in_dir(dir, artifact::kMeasures))) measures = load_measures(in_dir(dir, artifact::kMeasures));
  auto tree = CrrTree::load_article_list(in_dir(dir, artifact::kTree));
  return Engine(std::move(corpus), std::move(tokenizer), lexical, std::move(embeddings), std::move(tree),
                std::move(measures));
}

// ---------------------------------------------------------------------------
// Subcommands

struct IndexArgs {
  std::string corpus;
  std::string out;
  std::string embeddings;
  std::string measures;
  std::string articles;
  std::string variant = "bm25l";
  TokenizerFlags tok;
  LexicalFlags lex;
};

LexicalVariant variant_from_string(const std::string& name) {
  const auto s = scheme_from_string(name);
  if (!uses_lexical(s) || s == Scheme::Hybrid) throw ValidationError("'" + name + "' is not a lexical variant");
  return lexical_variant(s);
}

int run_index(const IndexArgs& a, const Globals& g) {
  const auto corpus = load_corpus(a.corpus);
  const auto cfg = a.tok.config();
  const auto variant = variant_from_string(a.variant);
  std::optional<EmbeddingSet> embeddings;
  if (!a.embeddings.empty()) {
    const auto ids = corpus.ids();
    embeddings = normalize(load_embeddings(a.embeddings, ids));
  }
  std::vector<Measure> measures;
  if (!a.measures.empty()) {
    measures = load_measures(a.measures);
    validate_measure_links(corpus, measures);
  }
  CrrTree tree = a.articles.empty() ? CrrTree{} : CrrTree::load_article_list(a.articles);
  tree.add_all(corpus.crr_tree().nodes());

  const auto tc = build_tokenized_corpus(corpus, cfg, g.threads);
  const auto index = LexicalIndex::build(tc, variant, a.lex.params(variant).value_or(Bm25Params::defaults_for(variant)));

  fs::create_directories(a.out);
  write_corpus(corpus, in_dir(a.out, artifact::kCorpus));
  write_json_file(in_dir(a.out, artifact::kTokenizer), QueryTokenizer(cfg, tc).to_json());
  write_tokenized_corpus(tc, in_dir(a.out, artifact::kTokens), in_dir(a.out, artifact::kStats));
  index.save(in_dir(a.out, artifact::kLexical));
  if (embeddings) write_embeddings(*embeddings, in_dir(a.out, artifact::kEmbeddings));
  if (!measures.empty()) write_measures(measures, in_dir(a.out, artifact::kMeasures));
  tree.write_article_list(in_dir(a.out, artifact::kTree));
  std::cerr << "indexed " << corpus.size() << " findings, vocabulary " << tc.vocab.size() << ", avgdl " << tc.avgdl
            << " -> " << a.out << '\n';
  return 0;
}

struct QueryArgs {
  std::string index;
  std::string text;
  std::string id = "query";
  std::string refs;
  std::string finding;
  std::string query_file;
  std::string query_embeddings;
  std::string scheme = "hybrid";
  std::size_t k = 100;
  double lexical_weight = 0.5;
  PrefilterFlags pf;
  LexicalFlags lex;
};

CrrRefSet parse_ref_list(const std::string& list) {
  std::vector<CrrRef> refs;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(' ');
    if (first == std::string::npos) continue;
    refs.push_back(CrrRef::parse(item.substr(first, item.find_last_not_of(' ') - first + 1)));
  }
  return make_ref_set(std::move(refs));
}

RetrieverConfig retriever_config(Scheme scheme, std::size_t k, double lexical_weight, const PrefilterFlags& pf,
                                 const LexicalFlags& lex, std::uint64_t seed) {
  RetrieverConfig cfg;
  cfg.scheme = scheme;
  cfg.k = k;
  cfg.hybrid_weights = {lexical_weight, 1.0 - lexical_weight};
  if (pf.enabled) cfg.prefilter = pf.config();
  if (uses_lexical(scheme)) cfg.lexical_params = lex.params(lexical_variant(scheme));
  cfg.seed = seed;
  return cfg;
}

std::vector<Query> collect_queries(const QueryArgs& a, const Engine& engine) {
  std::vector<Query> queries;
  const int sources = (a.text.empty() ? 0 : 1) + (a.finding.empty() ? 0 : 1) + (a.query_file.empty() ? 0 : 1);
  if (sources != 1) throw CLI::ValidationError("exactly one of --text, --finding or --query-file is required");
  if (!a.text.empty()) {
    queries.push_back(Query{a.id, a.text, parse_ref_list(a.refs), std::nullopt});
  } else if (!a.finding.empty()) {
    queries.push_back(Query::from_finding(engine.corpus()[engine.corpus().require_position(a.finding)]));
  } else {
    detail::for_each_jsonl(a.query_file, [&](const nlohmann::json& j, std::size_t) {
      const auto f = finding_from_json(j);
      queries.push_back(Query{f.id, f.text, f.crr_refs, std::nullopt});
    });
  }
  if (!a.query_embeddings.empty()) {
    const auto e = read_embedding_file(a.query_embeddings);
    for (auto& q : queries) {
      const auto v = e.vector(q.id);
      q.embedding = std::vector<double>(v.begin(), v.end());
    }
  }
  return queries;
}

int run_query(const QueryArgs& a, const Globals& g) {
  const auto engine = load_engine(a.index);
  const auto scheme = scheme_from_string(a.scheme);
  engine.require_state(scheme);
  const auto queries = collect_queries(a, engine);
  const auto cfg = retriever_config(scheme, a.k, a.lexical_weight, a.pf, a.lex, g.seed);
  const auto results = engine.retrieve_batch(queries, cfg, g.threads);
  std::map<std::string, std::string> measure_text;
  for (const auto& m : engine.measures()) measure_text[m.id] = m.text;
  for (const auto& r : results) {
    auto j = r.to_json();
    if (!measure_text.empty()) {
      for (auto& hit : j["hits"]) {
        auto texts = nlohmann::ordered_json::array();
        for (const auto& id : hit["measure_ids"]) {
          const auto it = measure_text.find(id.get<std::string>());
          texts.push_back(it == measure_text.end() ? "" : it->second);
        }
        hit["measures"] = std::move(texts);
      }
    }
    std::cout << j.dump() << '\n';
  }
  return 0;
}

struct EvalArgs {
  std::string index;
  std::string labels;
  std::string out;
  std::string schemes;
  std::size_t sample_size = 100;
  std::size_t repetitions = 1000;
  std::size_t k = 100;
  double lexical_weight = 0.5;
  PrefilterFlags pf;
  LexicalFlags lex;
};

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct EvalTableRow {
  Scheme scheme;
  EvalReport report;
};

void write_eval_outputs(const std::string& out_dir, const std::string& stem, const std::vector<EvalTableRow>& rows,
                        const McConfig& mc, bool prefilter) {
  {
    const auto path = in_dir(out_dir, (stem + ".csv").c_str());
    std::ofstream csv(path, std::ios::binary);
    if (!csv) throw IoError("cannot open " + path + " for writing");
    csv << "scheme,MAP@" << mc.k << ",MRR@" << mc.k << ",avg score\n";
    for (const auto& r : rows) {
      csv << to_string(r.scheme) << ',' << fixed(r.report.mean_map) << ',' << fixed(r.report.mean_mrr) << ','
          << fixed(r.report.avg_score()) << '\n';
    }
    if (!csv) throw IoError("failed writing " + path);
  }
  nlohmann::ordered_json j;
  j["k"] = mc.k;
  j["sample_size"] = mc.m;
  j["repetitions"] = mc.repetitions;
  j["seed"] = mc.seed;
  j["prefilter"] = prefilter;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json s;
    s["scheme"] = std::string(to_string(r.scheme));
    s["map"] = r.report.mean_map;
    s["mrr"] = r.report.mean_mrr;
    s["avg_score"] = r.report.avg_score();
    s["map_std"] = r.report.mean_map_std;
    s["mrr_std"] = r.report.mean_mrr_std;
    auto per_query = nlohmann::ordered_json::array();
    for (const auto& q : r.report.queries) {
      per_query.push_back({{"query_id", q.query_id}, {"map", q.map}, {"mrr", q.mrr}});
    }
    s["queries"] = std::move(per_query);
    arr.push_back(std::move(s));
  }
  j["schemes"] = std::move(arr);
  write_json_file(in_dir(out_dir, (stem + ".json").c_str()), j);
}

int run_eval(const EvalArgs& a, const Globals& g) {
  const auto engine = load_engine(a.index);
  const auto labels = load_labeled_queries(a.labels);
  for (const auto& q : labels) q.validate(engine.corpus());

  std::vector<Scheme> schemes;
  if (a.schemes.empty()) {
    for (auto s : kAllSchemes) {
      if (!uses_dense(s) || engine.embeddings()) schemes.push_back(s);
    }
  } else {
    std::stringstream ss(a.schemes);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) schemes.push_back(scheme_from_string(item));
    }
  }
  for (auto s : schemes) engine.require_state(s);

  McConfig mc;
  mc.m = a.sample_size;
  mc.repetitions = a.repetitions;
  mc.k = a.k;
  mc.seed = g.seed;

  const auto run_grid = [&](bool prefilter) {
    PrefilterFlags pf = a.pf;
    pf.enabled = prefilter;
    std::vector<EvalTableRow> rows;
    for (auto s : schemes) {
      const auto cfg = retriever_config(s, a.k, a.lexical_weight, pf, a.lex, g.seed);
      rows.push_back(EvalTableRow{s, evaluate(engine, labels, cfg, mc, g.threads)});
    }
    return rows;
  };

  fs::create_directories(a.out);
  write_eval_outputs(a.out, "eval", run_grid(false), mc, false);
  if (a.pf.enabled) write_eval_outputs(a.out, "eval_prefilter", run_grid(true), mc, true);
  std::cerr << "evaluated " << labels.size() << " queries over " << schemes.size() << " schemes -> " << a.out << '\n';
  return 0;
}

struct SimulateArgs {
  std::string out;
  std::size_t db_size = 7000;
  std::size_t g_hat = 3;
  std::vector<std::size_t> g_tilde = {5, 10, 15, 20};
  std::size_t mc_runs = 200;
  std::size_t sample_size = 100;
  std::size_t repetitions = 1000;
  std::size_t k = 100;
  double bias_high = 10.0;
  double bias_low = 3.0;
};

int run_simulate(const SimulateArgs& a, const Globals& g) {
  SimSpec spec;
  spec.db_size = a.db_size;
  spec.g_hat = a.g_hat;
  spec.g_tilde = a.g_tilde;
  spec.mc_runs = a.mc_runs;
  spec.bias_weights = {a.bias_high, a.bias_low};
  McConfig mc;
  mc.m = a.sample_size;
  mc.repetitions = a.repetitions;
  mc.k = a.k;
  mc.seed = g.seed;
  spec.validate();
  if (mc.m > spec.db_size - spec.g_hat) throw ValidationError("sample size exceeds the simulated pool");

  const auto rows = simulate_bounds(spec, mc, g.threads);

  fs::create_directories(a.out);
  const auto csv_path = in_dir(a.out, "bounds.csv");
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw IoError("cannot open " + csv_path + " for writing");
  csv << "system,g_tilde,MAP,MRR,MAP_se,MRR_se,runs\n";
  nlohmann::ordered_json plot;
  plot["db_size"] = spec.db_size;
  plot["g_hat"] = spec.g_hat;
  plot["sample_size"] = mc.m;
  plot["repetitions"] = mc.repetitions;
  plot["k"] = mc.k;
  plot["seed"] = mc.seed;
  plot["x"] = spec.g_tilde;
  nlohmann::ordered_json series;
  for (const auto& r : rows) {
    csv << to_string(r.system) << ',' << r.g_tilde << ',' << fixed(r.map) << ',' << fixed(r.mrr) << ','
        << fixed(r.map_se) << ',' << fixed(r.mrr_se) << ',' << r.runs << '\n';
    auto& s = series[std::string(to_string(r.system))];
    s["map"].push_back(r.map);
    s["mrr"].push_back(r.mrr);
    s["map_se"].push_back(r.map_se);
    s["mrr_se"].push_back(r.mrr_se);
  }
  if (!csv) throw IoError("failed writing " + csv_path);
  plot["series"] = std::move(series);
  write_json_file(in_dir(a.out, "bounds_plot.json"), plot);
  std::cerr << "simulated " << rows.size() << " rows -> " << a.out << '\n';
  return 0;
}

struct GenArgs {
  std::string out;
  std::size_t n = 1000;
  std::size_t clusters = 50;
  std::size_t dim = 64;
  double noise = 0.8;
  std::size_t queries = 50;
  std::size_t g_hat = 3;
};

int run_gen(const GenArgs& a, const Globals& g) {
  const auto sc = generate_synthetic_corpus(a.n, g.seed, a.clusters);
  fs::create_directories(a.out);
  write_corpus(sc.corpus, in_dir(a.out, "corpus.jsonl"));
  write_measures(sc.measures, in_dir(a.out, "measures.jsonl"));
  const auto labels = synthetic_labeled_queries(sc, a.queries, a.g_hat, g.seed);
  write_labeled_queries(labels, in_dir(a.out, "labels.jsonl"));
  if (a.dim > 0) write_embeddings(synthetic_embeddings(sc, a.dim, a.noise, g.seed), in_dir(a.out, "embeddings.emb"));
  std::cerr << "generated " << sc.corpus.size() << " findings in " << a.clusters << " clusters, " << labels.size()
            << " labeled queries -> " << a.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"findret: retrieval of similar supervisory findings"};
  app.require_subcommand(1, 1);
  app.set_config("--config", "", "TOML-style key = value file mirroring the flags; flags given on the command line win");
  Globals g;
  app.add_option("--threads", g.threads, "Worker threads (default: hardware concurrency)")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();

  IndexArgs ia;
  auto* index = app.add_subcommand("index", "Tokenize a corpus and write index artifacts");
  index->add_option("--corpus", ia.corpus, "Findings JSONL")->required();
  index->add_option("--out", ia.out, "Output index directory")->required();
  index->add_option("--embeddings", ia.embeddings, "EMB1 (or JSONL) embeddings, one per finding");
  index->add_option("--measures", ia.measures, "Measures JSONL");
  index->add_option("--articles", ia.articles, "CRR article list, one reference per line");
  index->add_option("--variant", ia.variant, "Lexical variant stored in lexical.lxix: tfidf, bm25, bm25plus, bm25l")
      ->capture_default_str();
  index->add_option("--stopwords", ia.tok.stopwords, "Stopword list")->capture_default_str();
  index->add_option("--lemmas", ia.tok.lemmas, "Lemma table (surface<TAB>lemma)")->capture_default_str();
  index->add_option("--min-df", ia.tok.min_df, "Drop tokens with document frequency below this fraction")
      ->capture_default_str();
  index->add_option("--max-df", ia.tok.max_df, "Drop tokens with document frequency above this fraction")
      ->capture_default_str();
  index->add_option("--ngram", ia.tok.ngram, "Longest collocation (1, 2 or 3)")->capture_default_str();
  index->add_option("--colloc-min-count", ia.tok.colloc_min_count, "Minimum pair count for a collocation")
      ->capture_default_str();
  add_lexical_flags(index, ia.lex);

  QueryArgs qa;
  auto* query = app.add_subcommand("query", "Rank indexed findings for new text; one JSON object per query on stdout");
  query->add_option("--index", qa.index, "Index directory")->required();
  query->add_option("--text", qa.text, "Inline query text");
  query->add_option("--id", qa.id, "Id for the inline query")->capture_default_str();
  query->add_option("--refs", qa.refs, "Comma-separated CRR references for the inline query, e.g. 92(1),181(a)");
  query->add_option("--finding", qa.finding, "Use an indexed finding as the query");
  query->add_option("--query-file", qa.query_file, "Findings JSONL of queries");
  query->add_option("--query-embeddings", qa.query_embeddings, "Embeddings for the queries (dense and hybrid)");
  query->add_option("--scheme", qa.scheme, "tfidf, bm25, bm25plus, bm25l, bm25lplus, dense, hybrid or random")
      ->capture_default_str();
  query->add_option("--k", qa.k, "Number of results")->capture_default_str()->check(CLI::PositiveNumber);
  query->add_option("--lexical-weight", qa.lexical_weight, "Hybrid weight on the lexical score; dense gets the rest")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  add_prefilter_flags(query, qa.pf);
  add_lexical_flags(query, qa.lex);

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Down-sampling validation of each scheme against labeled queries");
  eval->add_option("--index", ea.index, "Index directory")->required();
  eval->add_option("--labels", ea.labels, "Labeled queries JSONL")->required();
  eval->add_option("--out", ea.out, "Report directory (eval.csv, eval.json)")->required();
  eval->add_option("--schemes", ea.schemes, "Comma-separated schemes (default: every scheme the index supports)");
  eval->add_option("--sample-size", ea.sample_size, "m, findings drawn per repetition")->capture_default_str();
  eval->add_option("--repetitions", ea.repetitions, "M, down-sampled databases per query")->capture_default_str();
  eval->add_option("--k", ea.k, "Metric cutoff")->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_option("--lexical-weight", ea.lexical_weight, "Hybrid weight on the lexical score")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  add_prefilter_flags(eval, ea.pf);
  eval->get_option("--prefilter")->description("Also evaluate with the CRR prefilter (eval_prefilter.csv)");
  add_lexical_flags(eval, ea.lex);

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Upper bounds of MAP and MRR under unidentified relevant findings");
  sim->add_option("--out", sa.out, "Output directory (bounds.csv, bounds_plot.json)")->required();
  sim->add_option("--db-size", sa.db_size, "Artificial database size")->capture_default_str();
  sim->add_option("--g-hat", sa.g_hat, "Identified relevant findings")->capture_default_str();
  sim->add_option("--g-tilde", sa.g_tilde, "Unidentified relevant findings, one run per value")
      ->delimiter(',')
      ->capture_default_str();
  sim->add_option("--mc-runs", sa.mc_runs, "Independent simulation runs (10000 for the full study)")
      ->capture_default_str();
  sim->add_option("--sample-size", sa.sample_size, "m")->capture_default_str();
  sim->add_option("--repetitions", sa.repetitions, "M")->capture_default_str();
  sim->add_option("--k", sa.k, "Metric cutoff")->capture_default_str();
  sim->add_option("--bias-high", sa.bias_high, "omega2 relative weight of relevant findings")->capture_default_str();
  sim->add_option("--bias-low", sa.bias_low, "omega3 relative weight of relevant findings")->capture_default_str();

  GenArgs ga;
  auto* gen = app.add_subcommand("gen-corpus", "Write a clustered synthetic corpus with labels and embeddings");
  gen->add_option("--out", ga.out, "Output directory")->required();
  gen->add_option("--n", ga.n, "Findings")->capture_default_str();
  gen->add_option("--clusters", ga.clusters, "Clusters")->capture_default_str();
  gen->add_option("--dim", ga.dim, "Embedding dimension (0 skips embeddings)")->capture_default_str();
  gen->add_option("--noise", ga.noise, "Embedding noise norm")->capture_default_str();
  gen->add_option("--queries", ga.queries, "Labeled queries, at most one per cluster")->capture_default_str();
  gen->add_option("--g-hat", ga.g_hat, "Identified relevant findings per query")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*index) return run_index(ia, g);
    if (*query) return run_query(qa, g);
    if (*eval) return run_eval(ea, g);
    if (*sim) return run_simulate(sa, g);
    if (*gen) return run_gen(ga, g);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitComputation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitComputation;
  }
  return kExitUsage;
}
