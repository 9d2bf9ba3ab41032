#pragma once

// Query -> ranked findings: optional CRR prefilter, one scoring scheme (or the
// lexical/dense hybrid), descending sort with id tie-break, top-k.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "findret/corpus.hpp"
#include "findret/crr.hpp"
#include "findret/dense.hpp"
#include "findret/detail/rng.hpp"
#include "findret/error.hpp"
#include "findret/lexical.hpp"
#include "findret/parallel.hpp"
#include "findret/prefilter.hpp"
#include "findret/similarity_matrix.hpp"
#include "findret/tokenizer.hpp"

namespace findret {

enum class Scheme { TfIdf, Bm25, Bm25Plus, Bm25L, Bm25LPlus, Dense, Hybrid, Random };

inline constexpr std::array kAllSchemes = {Scheme::TfIdf,     Scheme::Bm25,  Scheme::Bm25Plus, Scheme::Bm25L,
                                           Scheme::Bm25LPlus, Scheme::Dense, Scheme::Hybrid,   Scheme::Random};

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::TfIdf: return "tfidf";
    case Scheme::Bm25: return "bm25";
    case Scheme::Bm25Plus: return "bm25plus";
    case Scheme::Bm25L: return "bm25l";
    case Scheme::Bm25LPlus: return "bm25lplus";
    case Scheme::Dense: return "dense";
    case Scheme::Hybrid: return "hybrid";
    case Scheme::Random: return "random";
  }
  return "unknown";
}

inline Scheme scheme_from_string(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), detail::ascii_lower);
  if (lower == "bm25+" ) return Scheme::Bm25Plus;
  if (lower == "bm25l+") return Scheme::Bm25LPlus;
  for (auto s : kAllSchemes) {
    if (lower == to_string(s)) return s;
  }
  throw ValidationError("unknown scheme '" + std::string(name) + "'");
}

inline bool uses_lexical(Scheme s) { return s != Scheme::Dense && s != Scheme::Random; }
inline bool uses_dense(Scheme s) { return s == Scheme::Dense || s == Scheme::Hybrid; }

/// Lexical formula behind a scheme. BM25L+ and the hybrid's lexical half are
/// BM25L on the configured tokenizer.
inline LexicalVariant lexical_variant(Scheme s) {
  switch (s) {
    case Scheme::TfIdf: return LexicalVariant::TfIdf;
    case Scheme::Bm25: return LexicalVariant::Bm25;
    case Scheme::Bm25Plus: return LexicalVariant::Bm25Plus;
    default: return LexicalVariant::Bm25L;
  }
}

struct RetrieverConfig {
  Scheme scheme = Scheme::Hybrid;
  std::size_t k = 100;
  std::optional<PrefilterConfig> prefilter;
  std::pair<double, double> hybrid_weights{0.5, 0.5};  // (lexical, dense)
  std::optional<Bm25Params> lexical_params;            // defaults per variant when unset
  std::uint64_t seed = 0;                              // Random scheme only

  void validate() const {
    if (k < 1) throw ValidationError("k must be at least 1");
    const auto [wl, wd] = hybrid_weights;
    if (!(wl >= 0.0 && wd >= 0.0) || std::abs(wl + wd - 1.0) > 1e-12) {
      throw ValidationError("hybrid weights must be non-negative and sum to 1");
    }
    if (prefilter) prefilter->validate();
    if (lexical_params) lexical_params->validate();
  }

  Bm25Params params_for(LexicalVariant v) const { return lexical_params.value_or(Bm25Params::defaults_for(v)); }
};

/// A new finding to retrieve against. `embedding` is optional: corpus
/// findings reuse their stored vector.
struct Query {
  std::string id;
  std::string text;
  CrrRefSet crr_refs;
  std::optional<std::vector<double>> embedding;

  static Query from_finding(const Finding& f) { return Query{f.id, f.text, f.crr_refs, std::nullopt}; }
};

struct Hit {
  std::string id;
  double score = 0.0;
  std::optional<double> lexical_score;  // raw lexical score, when the scheme has one
  std::optional<double> dense_score;    // raw cosine, when the scheme has one
  std::vector<std::string> measure_ids;

  friend bool operator==(const Hit&, const Hit&) = default;
};

struct RankedResult {
  std::string query_id;
  Scheme scheme = Scheme::Hybrid;
  std::size_t k = 0;
  std::vector<Hit> hits;
  bool prefilter_fell_back = false;

  friend bool operator==(const RankedResult&, const RankedResult&) = default;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["query_id"] = query_id;
    j["scheme"] = std::string(to_string(scheme));
    j["k"] = k;
    j["prefilter_fell_back"] = prefilter_fell_back;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& h : hits) {
      nlohmann::ordered_json hj;
      hj["id"] = h.id;
      hj["score"] = h.score;
      hj["lexical_score"] = h.lexical_score ? nlohmann::ordered_json(*h.lexical_score) : nlohmann::ordered_json();
      hj["dense_score"] = h.dense_score ? nlohmann::ordered_json(*h.dense_score) : nlohmann::ordered_json();
      hj["measure_ids"] = h.measure_ids;
      arr.push_back(std::move(hj));
    }
    j["hits"] = std::move(arr);
    return j;
  }
};

/// Per-query raw scores over the whole corpus, computed once and then ranked
/// against any candidate subset.
struct ScoredQuery {
  std::string query_id;
  CrrRefSet crr_refs;
  std::optional<std::size_t> self_position;  // the query itself when it is a corpus finding
  std::vector<double> lexical;               // empty when unused
  std::vector<double> dense;                 // empty when unused
};

namespace detail {

// Candidates ordered by score descending, position ascending on ties. Corpus
// positions follow id order, so this is the id tie-break.
inline void sort_by_score(std::vector<std::size_t>& positions, std::span<const double> score_of_candidate,
                          std::vector<std::size_t>& order) {
  order.resize(positions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (score_of_candidate[a] != score_of_candidate[b]) return score_of_candidate[a] > score_of_candidate[b];
    return positions[a] < positions[b];
  });
}

inline std::uint64_t random_stream_seed(std::uint64_t seed, std::string_view query_id) {
  return derive_seed(seed, stable_hash(query_id));
}

}  // namespace detail

/// Uniform random ranking of `candidates` (seeded); the Random baseline.
inline std::vector<std::size_t> random_order(std::span<const std::size_t> candidates, std::uint64_t seed) {
  std::vector<std::size_t> out(candidates.begin(), candidates.end());
  std::sort(out.begin(), out.end());
  detail::Rng rng(seed);
  detail::shuffle(out.begin(), out.end(), rng);
  return out;
}

/// Random baseline over the whole corpus, independent of any index.
inline RankedResult random_ranker(const Query& query, const Corpus& corpus, std::size_t k, std::uint64_t seed) {
  if (k < 1) throw ValidationError("k must be at least 1");
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].id != query.id) candidates.push_back(i);
  }
  const auto order = random_order(candidates, detail::random_stream_seed(seed, query.id));
  RankedResult r{query.id, Scheme::Random, k, {}, false};
  const std::size_t count = order.size();
  for (std::size_t rank = 0; rank < std::min(k, count); ++rank) {
    const auto& f = corpus[order[rank]];
    r.hits.push_back(Hit{f.id, static_cast<double>(count - rank) / static_cast<double>(count), std::nullopt,
                         std::nullopt, f.measure_ids});
  }
  return r;
}

/// Everything retrieval needs, immutable after construction.
class Engine {
 public:
  Engine(Corpus corpus, QueryTokenizer tokenizer, const LexicalIndex& lexical, std::optional<EmbeddingSet> embeddings,
         CrrTree tree, std::vector<Measure> measures = {})
      : corpus_(std::move(corpus)),
        tokenizer_(std::move(tokenizer)),
        tree_(std::move(tree)),
        measures_(std::move(measures)),
        matcher_(corpus_) {
    if (lexical.n_docs() != corpus_.size()) throw ValidationError("lexical index does not match the corpus size");
    for (auto v : {LexicalVariant::TfIdf, LexicalVariant::Bm25, LexicalVariant::Bm25Plus, LexicalVariant::Bm25L}) {
      lexical_[static_cast<std::size_t>(v)] = lexical.with_variant(v, Bm25Params::defaults_for(v));
    }
    if (embeddings) {
      if (embeddings->ids() != corpus_.ids()) {
        *embeddings = load_aligned(*embeddings, corpus_.ids());
      }
      embeddings_ = embeddings->normalized() ? std::move(*embeddings) : normalize(*embeddings);
    }
    for (const auto& f : corpus_) {
      for (const auto& r : f.crr_refs) tree_.add(r);
    }
  }

  /// Tokenizes the corpus and builds every index from scratch.
  static Engine build(Corpus corpus, const TokenizerConfig& config, std::optional<EmbeddingSet> embeddings = std::nullopt,
                      std::vector<Measure> measures = {}, std::optional<CrrTree> articles = std::nullopt,
                      std::size_t threads = 1) {
    const auto tc = build_tokenized_corpus(corpus, config, threads);
    const auto index = LexicalIndex::build(tc, LexicalVariant::Bm25L, Bm25Params::defaults_for(LexicalVariant::Bm25L));
    CrrTree tree = articles.value_or(CrrTree{});
    return Engine(std::move(corpus), QueryTokenizer(config, tc), index, std::move(embeddings), std::move(tree),
                  std::move(measures));
  }

  const Corpus& corpus() const noexcept { return corpus_; }
  const QueryTokenizer& tokenizer() const noexcept { return tokenizer_; }
  const CrrTree& tree() const noexcept { return tree_; }
  const CrrMatcher& matcher() const noexcept { return matcher_; }
  const std::optional<EmbeddingSet>& embeddings() const noexcept { return embeddings_; }
  const std::vector<Measure>& measures() const noexcept { return measures_; }
  const LexicalIndex& lexical_index(LexicalVariant v) const { return lexical_[static_cast<std::size_t>(v)]; }

  void require_state(Scheme s) const {
    if (uses_dense(s) && !embeddings_) {
      throw ValidationError("scheme '" + std::string(to_string(s)) +
                            "' requires embeddings, but no embeddings artifact was loaded");
    }
  }

  /// Raw lexical and/or cosine rows over the whole corpus for one query.
  ScoredQuery score(const Query& query, const RetrieverConfig& cfg) const {
    cfg.validate();
    require_state(cfg.scheme);
    ScoredQuery sq;
    sq.query_id = query.id;
    sq.crr_refs = make_ref_set(query.crr_refs);
    sq.self_position = corpus_.position(query.id);
    if (uses_lexical(cfg.scheme)) {
      const auto variant = lexical_variant(cfg.scheme);
      const auto params = cfg.params_for(variant);
      const auto tokens = tokenizer_(query.text);
      if (params == Bm25Params::defaults_for(variant)) {
        sq.lexical = lexical_index(variant).score(tokens);
      } else {
        sq.lexical = lexical_index(variant).with_variant(variant, params).score(tokens);
      }
    }
    if (uses_dense(cfg.scheme)) {
      const auto qv = query_vector(query);
      sq.dense.resize(corpus_.size());
      for (std::size_t i = 0; i < corpus_.size(); ++i) sq.dense[i] = dot(qv, embeddings_->vector(i));
    }
    return sq;
  }

  struct Ranking {
    std::vector<std::size_t> positions;  // ranked, at most k
    std::vector<double> scores;          // fused score per ranked position
    bool fell_back = false;
  };

  /// Ranks the candidates drawn from `universe` (whole corpus when unset).
  /// The query itself is never a candidate.
  Ranking rank_positions(const ScoredQuery& sq, const RetrieverConfig& cfg,
                         std::optional<std::span<const std::size_t>> universe = std::nullopt) const {
    std::vector<std::size_t> pool;
    if (universe) {
      pool.assign(universe->begin(), universe->end());
      std::sort(pool.begin(), pool.end());
      pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    } else {
      pool.resize(corpus_.size());
      std::iota(pool.begin(), pool.end(), std::size_t{0});
    }
    if (sq.self_position) std::erase(pool, *sq.self_position);

    Ranking out;
    std::vector<std::size_t> candidates;
    if (cfg.prefilter) {
      auto pf = matcher_.filter(sq.crr_refs, *cfg.prefilter, std::span<const std::size_t>(pool));
      candidates = std::move(pf.positions);
      out.fell_back = pf.fell_back;
    } else {
      candidates = std::move(pool);
    }
    const std::size_t take = std::min(cfg.k, candidates.size());

    if (cfg.scheme == Scheme::Random) {
      const auto order = random_order(candidates, detail::random_stream_seed(cfg.seed, sq.query_id));
      const std::size_t count = order.size();
      out.positions.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
      for (std::size_t r = 0; r < take; ++r) {
        out.scores.push_back(static_cast<double>(count - r) / static_cast<double>(count));
      }
      return out;
    }

    std::vector<double> fused(candidates.size());
    if (cfg.scheme == Scheme::Hybrid) {
      std::vector<double> lex(candidates.size());
      std::vector<double> den(candidates.size());
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        lex[c] = sq.lexical[candidates[c]];
        den[c] = sq.dense[candidates[c]];
      }
      min_max_normalize(lex);
      min_max_normalize(den);
      const auto [wl, wd] = cfg.hybrid_weights;
      for (std::size_t c = 0; c < candidates.size(); ++c) fused[c] = wl * lex[c] + wd * den[c];
    } else {
      const auto& row = uses_dense(cfg.scheme) ? sq.dense : sq.lexical;
      for (std::size_t c = 0; c < candidates.size(); ++c) fused[c] = row[candidates[c]];
    }
    std::vector<std::size_t> order;
    detail::sort_by_score(candidates, fused, order);
    out.positions.reserve(take);
    out.scores.reserve(take);
    for (std::size_t r = 0; r < take; ++r) {
      out.positions.push_back(candidates[order[r]]);
      out.scores.push_back(fused[order[r]]);
    }
    return out;
  }

  RankedResult rank(const ScoredQuery& sq, const RetrieverConfig& cfg,
                    std::optional<std::span<const std::size_t>> universe = std::nullopt) const {
    const auto ranking = rank_positions(sq, cfg, universe);
    RankedResult r{sq.query_id, cfg.scheme, cfg.k, {}, ranking.fell_back};
    r.hits.reserve(ranking.positions.size());
    for (std::size_t i = 0; i < ranking.positions.size(); ++i) {
      const auto pos = ranking.positions[i];
      const auto& f = corpus_[pos];
      Hit h{f.id, ranking.scores[i], std::nullopt, std::nullopt, f.measure_ids};
      if (!sq.lexical.empty()) h.lexical_score = sq.lexical[pos];
      if (!sq.dense.empty()) h.dense_score = sq.dense[pos];
      r.hits.push_back(std::move(h));
    }
    return r;
  }

  RankedResult retrieve(const Query& query, const RetrieverConfig& cfg) const { return rank(score(query, cfg), cfg); }

  std::vector<RankedResult> retrieve_batch(std::span<const Query> queries, const RetrieverConfig& cfg,
                                           std::size_t threads = 1) const {
    cfg.validate();
    require_state(cfg.scheme);
    std::vector<RankedResult> out(queries.size());
    parallel_for(queries.size(), threads, [&](std::size_t i) { out[i] = retrieve(queries[i], cfg); });
    return out;
  }

  /// Lexical similarity matrix for a batch of queries (raw and row-normalized).
  LexicalMatrices lexical_matrix(std::span<const Query> queries, Scheme scheme, std::size_t threads = 1) const {
    std::vector<TokenList> tokens;
    std::vector<std::string> ids;
    for (const auto& q : queries) {
      tokens.push_back(tokenizer_(q.text));
      ids.push_back(q.id);
    }
    return similarity_matrix_lexical(lexical_index(lexical_variant(scheme)), tokens, std::move(ids), corpus_.ids(),
                                     threads);
  }

 private:
  static EmbeddingSet load_aligned(const EmbeddingSet& e, const std::vector<std::string>& ids) {
    std::vector<double> data;
    data.reserve(ids.size() * e.dim());
    for (const auto& id : ids) {
      if (!e.contains(id)) throw ValidationError("missing embedding for id '" + id + "'");
      const auto v = e.vector(id);
      data.insert(data.end(), v.begin(), v.end());
    }
    return EmbeddingSet(e.dim(), ids, std::move(data), e.normalized());
  }

  std::vector<double> query_vector(const Query& query) const {
    if (query.embedding) {
      if (query.embedding->size() != embeddings_->dim()) {
        throw ValidationError("query '" + query.id + "' embedding has dimension " +
                              std::to_string(query.embedding->size()) + ", expected " +
                              std::to_string(embeddings_->dim()));
      }
      const auto n = normalize(EmbeddingSet(embeddings_->dim(), {query.id}, *query.embedding));
      return {n.vector(0).begin(), n.vector(0).end()};
    }
    if (embeddings_->contains(query.id)) {
      const auto v = embeddings_->vector(query.id);
      return {v.begin(), v.end()};
    }
    throw ValidationError("query '" + query.id + "' has no embedding; supply query embeddings for dense schemes");
  }

  Corpus corpus_;
  QueryTokenizer tokenizer_;
  std::array<LexicalIndex, 4> lexical_;
  std::optional<EmbeddingSet> embeddings_;
  CrrTree tree_;
  std::vector<Measure> measures_;
  CrrMatcher matcher_;
};

}  // namespace findret
