#pragma once

// Ranking metrics and the Monte-Carlo down-sampling validation used when only
// part of each query's relevant set is labeled.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "findret/corpus.hpp"
#include "findret/detail/rng.hpp"
#include "findret/error.hpp"
#include "findret/parallel.hpp"
#include "findret/retriever.hpp"

namespace findret {

// ---------------------------------------------------------------------------
// Metrics

/// AP@k = sum over relevant ranks i <= k of precision@i, divided by
/// min(|relevant|, k). `is_relevant(item)` decides membership.
template <class T, class IsRelevant>
double average_precision_at_k(std::span<const T> ranking, IsRelevant&& is_relevant, std::size_t relevant_count,
                              std::size_t k) {
  if (k < 1) throw ValidationError("k must be at least 1");
  if (relevant_count == 0) throw ValidationError("relevant set must not be empty");
  const std::size_t depth = std::min(k, ranking.size());
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < depth; ++i) {
    if (is_relevant(ranking[i])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(std::min(relevant_count, k));
}

/// RR@k = 1 / rank of the first relevant item within the top k, else 0.
template <class T, class IsRelevant>
double reciprocal_rank_at_k(std::span<const T> ranking, IsRelevant&& is_relevant, std::size_t relevant_count,
                            std::size_t k) {
  if (k < 1) throw ValidationError("k must be at least 1");
  if (relevant_count == 0) throw ValidationError("relevant set must not be empty");
  const std::size_t depth = std::min(k, ranking.size());
  for (std::size_t i = 0; i < depth; ++i) {
    if (is_relevant(ranking[i])) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

inline double average_precision_at_k(std::span<const std::string> ranking, const std::set<std::string>& relevant,
                                     std::size_t k) {
  return average_precision_at_k(
      ranking, [&](const std::string& id) { return relevant.contains(id); }, relevant.size(), k);
}

inline double reciprocal_rank_at_k(std::span<const std::string> ranking, const std::set<std::string>& relevant,
                                   std::size_t k) {
  return reciprocal_rank_at_k(
      ranking, [&](const std::string& id) { return relevant.contains(id); }, relevant.size(), k);
}

// ---------------------------------------------------------------------------
// Monte-Carlo down-sampling

struct McConfig {
  std::size_t m = 100;             // sample size drawn from D per repetition
  std::size_t repetitions = 1000;  // M
  std::size_t k = 100;             // metric cutoff
  std::uint64_t seed = 0;

  void validate() const {
    if (m < 1) throw ValidationError("sample size m must be at least 1");
    if (repetitions < 1) throw ValidationError("repetition count M must be at least 1");
    if (k < 1) throw ValidationError("cutoff k must be at least 1");
  }
};

struct McOutcome {
  std::vector<double> ap;  // one per repetition
  std::vector<double> rr;
  double map = 0.0;  // mean over repetitions
  double mrr = 0.0;
  double map_std = 0.0;  // sample std over repetitions
  double mrr_std = 0.0;
};

namespace detail {

// Welford; a constant sequence gives exactly that constant and zero spread.
inline std::pair<double, double> mean_and_std(std::span<const double> v) {
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - mean;
    mean += d / static_cast<double>(i + 1);
    m2 += d * (v[i] - mean);
  }
  if (v.size() < 2) return {mean, 0.0};
  return {mean, std::sqrt(m2 / static_cast<double>(v.size() - 1))};
}

}  // namespace detail

/// Down-sampling validation against the identified relevant set:
///   for each of M repetitions, draw m positions uniformly without replacement
///   from `pool` (D, which must exclude `identified`), add `identified`, rank
///   the union with `ranker(sorted_downsample, rep_seed)` and score AP@k and
///   RR@k against `identified`; finally average over repetitions.
/// Repetition r uses seed derive_seed(mc.seed, r), so results do not depend on
/// how repetitions are scheduled.
template <class Ranker>
McOutcome mc_validate(std::span<const std::size_t> pool, std::span<const std::size_t> identified, Ranker&& ranker,
                      const McConfig& mc) {
  mc.validate();
  if (identified.empty()) throw ValidationError("identified relevant set must not be empty");
  if (mc.m > pool.size()) {
    throw ValidationError("sample size m=" + std::to_string(mc.m) + " exceeds |D|=" + std::to_string(pool.size()));
  }
  std::vector<std::size_t> relevant(identified.begin(), identified.end());
  std::sort(relevant.begin(), relevant.end());
  relevant.erase(std::unique(relevant.begin(), relevant.end()), relevant.end());
  std::vector<std::size_t> work(pool.begin(), pool.end());
  std::sort(work.begin(), work.end());
  for (auto r : relevant) {
    if (std::binary_search(work.begin(), work.end(), r)) {
      throw ValidationError("pool D must exclude the identified relevant findings");
    }
  }
  const auto is_relevant = [&](std::size_t pos) { return std::binary_search(relevant.begin(), relevant.end(), pos); };

  McOutcome out;
  out.ap.resize(mc.repetitions);
  out.rr.resize(mc.repetitions);
  std::vector<std::size_t> swaps(mc.m);
  std::vector<std::size_t> downsample;
  downsample.reserve(mc.m + relevant.size());
  for (std::size_t rep = 0; rep < mc.repetitions; ++rep) {
    const auto rep_seed = detail::derive_seed(mc.seed, rep);
    detail::Rng rng(detail::derive_seed(rep_seed, 0));
    // partial Fisher-Yates on the first m slots, undone afterwards so `work`
    // stays sorted for the next repetition
    for (std::size_t i = 0; i < mc.m; ++i) {
      const auto j = i + static_cast<std::size_t>(detail::uniform_below(rng, work.size() - i));
      swaps[i] = j;
      std::swap(work[i], work[j]);
    }
    downsample.assign(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(mc.m));
    for (std::size_t i = mc.m; i-- > 0;) std::swap(work[i], work[swaps[i]]);
    downsample.insert(downsample.end(), relevant.begin(), relevant.end());
    std::sort(downsample.begin(), downsample.end());

    const std::vector<std::size_t> ranking = ranker(std::span<const std::size_t>(downsample), detail::derive_seed(rep_seed, 1));
    const std::span<const std::size_t> ranked(ranking);
    out.ap[rep] = average_precision_at_k(ranked, is_relevant, relevant.size(), mc.k);
    out.rr[rep] = reciprocal_rank_at_k(ranked, is_relevant, relevant.size(), mc.k);
  }
  std::tie(out.map, out.map_std) = detail::mean_and_std(out.ap);
  std::tie(out.mrr, out.mrr_std) = detail::mean_and_std(out.rr);
  return out;
}

// ---------------------------------------------------------------------------
// Labeled queries and engine-level evaluation

/// A test finding and the subset of its relevant findings that was identified.
struct LabeledQuery {
  std::string query_id;
  std::set<std::string> identified_relevant;

  void validate(const Corpus& corpus) const {
    if (identified_relevant.empty()) throw ValidationError("query '" + query_id + "' has no relevant ids");
    if (identified_relevant.contains(query_id)) {
      throw ValidationError("query '" + query_id + "' lists itself as relevant");
    }
    corpus.require_position(query_id);
    for (const auto& id : identified_relevant) {
      if (!corpus.position(id)) {
        throw ValidationError("query '" + query_id + "' references unknown relevant id '" + id + "'");
      }
    }
  }
};

inline std::vector<LabeledQuery> load_labeled_queries(const std::string& path) {
  std::vector<LabeledQuery> out;
  detail::for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t) {
    LabeledQuery q;
    q.query_id = detail::require_string(j, "query_id");
    for (auto& id : detail::optional_string_array(j, "relevant_ids")) q.identified_relevant.insert(std::move(id));
    if (q.identified_relevant.empty()) throw ParseError("query '" + q.query_id + "' has no relevant_ids");
    out.push_back(std::move(q));
  });
  return out;
}

inline void write_labeled_queries(std::span<const LabeledQuery> queries, const std::string& path) {
  auto out = detail::open_output(path);
  for (const auto& q : queries) {
    nlohmann::ordered_json j;
    j["query_id"] = q.query_id;
    j["relevant_ids"] = q.identified_relevant;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

struct QueryEvaluation {
  std::string query_id;
  double map = 0.0;  // mean AP@k over repetitions
  double mrr = 0.0;
  double map_std = 0.0;
  double mrr_std = 0.0;
};

struct EvalReport {
  std::vector<QueryEvaluation> queries;
  double mean_map = 0.0;  // across queries, after averaging each over repetitions
  double mean_mrr = 0.0;
  double mean_map_std = 0.0;  // average within-query dispersion across repetitions
  double mean_mrr_std = 0.0;

  double avg_score() const { return (mean_map + mean_mrr) / 2.0; }
};

/// Runs the down-sampling validation for one labeled query against the engine.
/// D is the corpus minus the identified relevant findings and the query itself.
inline QueryEvaluation mc_validate(const Engine& engine, const LabeledQuery& lq, const RetrieverConfig& cfg,
                                   const McConfig& mc) {
  const auto& corpus = engine.corpus();
  lq.validate(corpus);
  const auto query_pos = corpus.require_position(lq.query_id);
  std::vector<std::size_t> identified;
  for (const auto& id : lq.identified_relevant) identified.push_back(corpus.require_position(id));
  std::sort(identified.begin(), identified.end());
  std::vector<std::size_t> pool;
  pool.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (i != query_pos && !std::binary_search(identified.begin(), identified.end(), i)) pool.push_back(i);
  }
  const auto scored = engine.score(Query::from_finding(corpus[query_pos]), cfg);
  RetrieverConfig rep_cfg = cfg;
  rep_cfg.k = mc.k;
  const auto outcome = mc_validate(
      pool, identified,
      [&](std::span<const std::size_t> downsample, std::uint64_t rep_seed) {
        RetrieverConfig c = rep_cfg;
        c.seed = detail::derive_seed(cfg.seed, rep_seed);
        return engine.rank_positions(scored, c, downsample).positions;
      },
      mc);
  return QueryEvaluation{lq.query_id, outcome.map, outcome.mrr, outcome.map_std, outcome.mrr_std};
}

/// Evaluates every labeled query (in parallel) and aggregates: per query over
/// repetitions first, then across queries.
inline EvalReport evaluate(const Engine& engine, std::span<const LabeledQuery> queries, const RetrieverConfig& cfg,
                           const McConfig& mc, std::size_t threads = 1) {
  if (queries.empty()) throw ValidationError("no labeled queries to evaluate");
  engine.require_state(cfg.scheme);
  EvalReport report;
  report.queries.resize(queries.size());
  parallel_for(queries.size(), threads, [&](std::size_t i) {
    McConfig per_query = mc;
    per_query.seed = detail::derive_seed(mc.seed, detail::stable_hash(queries[i].query_id));
    report.queries[i] = mc_validate(engine, queries[i], cfg, per_query);
  });
  for (const auto& q : report.queries) {
    report.mean_map += q.map;
    report.mean_mrr += q.mrr;
    report.mean_map_std += q.map_std;
    report.mean_mrr_std += q.mrr_std;
  }
  const double n = static_cast<double>(report.queries.size());
  report.mean_map /= n;
  report.mean_mrr /= n;
  report.mean_map_std /= n;
  report.mean_mrr_std /= n;
  return report;
}

}  // namespace findret
