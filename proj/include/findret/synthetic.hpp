#pragma once

// Deterministic synthetic findings corpus. Findings are grouped into clusters
// that share topic vocabulary, CRR references and measures, so "same cluster"
// is a ground-truth similarity relation. Lengths follow a log-normal profile
// with roughly 85% of findings under 512 whitespace tokens.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "findret/corpus.hpp"
#include "findret/crr.hpp"
#include "findret/dense.hpp"
#include "findret/detail/rng.hpp"
#include "findret/error.hpp"
#include "findret/eval.hpp"

namespace findret {

struct SyntheticCorpus {
  Corpus corpus;
  std::vector<std::size_t> cluster_of;  // per corpus position
  std::size_t cluster_count = 0;
  std::vector<Measure> measures;

  /// Positions sharing the cluster of `pos`, excluding `pos`.
  std::vector<std::size_t> cluster_mates(std::size_t pos) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < cluster_of.size(); ++i) {
      if (i != pos && cluster_of[i] == cluster_of[pos]) out.push_back(i);
    }
    return out;
  }
};

namespace detail {

inline constexpr std::array<std::string_view, 24> kFillerStopwords = {
    "the", "of", "and", "to", "in", "by", "shall", "is", "on", "for", "with", "as",
    "that", "be", "are", "this", "or", "at", "from", "which", "not", "has", "its", "an"};

inline constexpr std::array<std::string_view, 96> kBackgroundWords = {
    "institution",  "institutions", "model",        "models",        "estimate",      "estimates",
    "estimated",    "risk",         "exposure",     "exposures",     "default",       "defaults",
    "rating",       "ratings",      "approach",     "requirement",   "requirements",  "calibration",
    "validation",   "process",      "processes",    "data",          "documentation", "review",
    "reviewed",     "supervisor",   "investigation", "finding",      "findings",      "assessment",
    "assessed",     "deficiency",   "deficiencies", "parameter",     "parameters",    "portfolio",
    "portfolios",   "segment",      "segments",     "margin",        "conservatism",  "observed",
    "observation",  "observations", "period",       "periods",       "internal",      "function",
    "functions",    "control",      "controls",     "governance",    "framework",     "implemented",
    "implementation", "procedure",  "procedures",   "appropriate",   "sufficient",    "adequate",
    "consistent",   "significant",  "material",     "relevant",      "specific",      "overall",
    "current",      "historical",   "available",    "required",      "identified",    "ensure",
    "ensured",      "perform",      "performed",    "applied",       "apply",         "related",
    "level",        "levels",       "test",         "tests",         "tested",        "report",
    "reported",     "reporting",    "management",   "bank",          "banks",         "credit",
    "quality",      "issue",        "issues",       "weakness",      "weaknesses",    "remediation"};

inline constexpr std::array<std::string_view, 20> kSyllables = {
    "ka", "lo", "ve", "ri", "mu", "sa", "to", "ne", "pi", "da",
    "ru", "fe", "go", "li", "ma", "zo", "te", "bu", "xi", "no"};

inline std::string pseudo_word(Rng& rng, std::size_t syllables) {
  std::string w;
  for (std::size_t i = 0; i < syllables; ++i) w += kSyllables[uniform_below(rng, kSyllables.size())];
  return w;
}

// Zipf-like pick: rank r with weight 1/(r+1).
inline std::size_t zipf_pick(Rng& rng, std::size_t n) {
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) total += 1.0 / static_cast<double>(r + 1);
  double u = uniform01(rng) * total;
  for (std::size_t r = 0; r < n; ++r) {
    u -= 1.0 / static_cast<double>(r + 1);
    if (u < 0.0) return r;
  }
  return n - 1;
}

inline double standard_normal(Rng& rng) {
  const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

struct ClusterProfile {
  std::vector<std::string> topic_words;
  std::array<std::string, 2> phrase;  // always adjacent, exercises collocations
  CrrRefSet core_refs;
  CrrRefSet extra_refs;
  std::vector<std::string> measure_ids;
};

}  // namespace detail

/// Generates `n` findings in `cluster_count` balanced clusters. A pure function
/// of (n, seed, cluster_count).
inline SyntheticCorpus generate_synthetic_corpus(std::size_t n, std::uint64_t seed, std::size_t cluster_count) {
  if (cluster_count < 1) throw ValidationError("cluster_count must be at least 1");
  if (n < cluster_count) throw ValidationError("n must be at least cluster_count");
  detail::Rng rng(detail::derive_seed(seed, 0x5eed));

  // Cluster profiles: unique topic vocabulary, two core references with a
  // paragraph (so they have a non-root ancestor) plus sibling extras.
  std::set<std::string> used_words;
  std::set<std::string> used_articles;
  std::vector<detail::ClusterProfile> clusters(cluster_count);
  std::vector<Measure> measures;
  const auto fresh_word = [&] {
    for (;;) {
      auto w = detail::pseudo_word(rng, 3 + detail::uniform_below(rng, 2));
      if (used_words.insert(w).second) return w;
    }
  };
  for (std::size_t c = 0; c < cluster_count; ++c) {
    auto& p = clusters[c];
    for (int i = 0; i < 15; ++i) p.topic_words.push_back(fresh_word());
    p.phrase = {fresh_word(), fresh_word()};
    for (int r = 0; r < 2; ++r) {
      std::string article;
      do {
        article = std::to_string(92 + detail::uniform_below(rng, 420));
      } while (!used_articles.insert(article).second && used_articles.size() < 400);
      std::vector<std::string> path{article, std::to_string(1 + detail::uniform_below(rng, 5))};
      if (detail::uniform_below(rng, 2) == 0) path.push_back(std::string(1, static_cast<char>('a' + detail::uniform_below(rng, 8))));
      p.core_refs.push_back(CrrRef(path));
      std::vector<std::string> sibling{article, std::to_string(6 + detail::uniform_below(rng, 4))};
      p.extra_refs.push_back(CrrRef(sibling));
    }
    p.core_refs = make_ref_set(p.core_refs);
    p.extra_refs = make_ref_set(p.extra_refs);
    for (int m = 1; m <= 2; ++m) {
      const std::string id = "M" + std::to_string(100000 + c).substr(1) + "-" + std::to_string(m);
      p.measure_ids.push_back(id);
      std::string text = "Measure requiring the institution to remediate";
      for (int w = 0; w < 6; ++w) text += " " + p.topic_words[detail::uniform_below(rng, p.topic_words.size())];
      measures.push_back(Measure{id, text + "."});
    }
  }

  // Balanced cluster assignment in random order.
  std::vector<std::size_t> cluster_of(n);
  for (std::size_t i = 0; i < n; ++i) cluster_of[i] = i % cluster_count;
  detail::shuffle(cluster_of.begin(), cluster_of.end(), rng);

  const std::size_t width = std::max<std::size_t>(5, std::to_string(n).size());
  std::vector<Finding> findings;
  findings.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = clusters[cluster_of[i]];
    Finding f;
    const auto num = std::to_string(i + 1);
    f.id = "F" + std::string(width - num.size(), '0') + num;
    f.year = 2017 + static_cast<int>(detail::uniform_below(rng, 7));

    std::vector<CrrRef> refs = p.core_refs;
    if (detail::uniform_below(rng, 2) == 0) refs.push_back(p.extra_refs[detail::uniform_below(rng, p.extra_refs.size())]);
    f.crr_refs = make_ref_set(refs);
    f.measure_ids = {p.measure_ids[detail::uniform_below(rng, p.measure_ids.size())]};
    if (detail::uniform_below(rng, 3) == 0) f.measure_ids = p.measure_ids;

    // log-normal length, median 250, sigma 0.69: P(len < 512) ~ 0.85
    const double z = detail::standard_normal(rng);
    const auto target = static_cast<std::size_t>(std::clamp(std::exp(std::log(250.0) + 0.69 * z), 30.0, 4000.0));

    std::vector<std::string> words;
    words.reserve(target + 16);
    for (const auto& r : f.crr_refs) {
      words.insert(words.end(), {"pursuant", "to", "article", r.canonical()});
      if (detail::uniform_below(rng, 2) == 0) words.insert(words.end(), {"of", "Regulation", "(EU)", "No", "575/2013"});
    }
    while (words.size() < target) {
      const double u = detail::uniform01(rng);
      if (u < 0.28) {
        words.emplace_back(detail::kFillerStopwords[detail::uniform_below(rng, detail::kFillerStopwords.size())]);
      } else if (u < 0.58) {
        words.push_back(p.topic_words[detail::zipf_pick(rng, p.topic_words.size())]);
      } else if (u < 0.62) {
        words.push_back(p.phrase[0]);
        words.push_back(p.phrase[1]);
      } else if (u < 0.63) {
        words.push_back(std::to_string(2017 + detail::uniform_below(rng, 8)));
      } else {
        words.emplace_back(detail::kBackgroundWords[detail::zipf_pick(rng, detail::kBackgroundWords.size())]);
      }
    }
    std::string text;
    std::size_t sentence_left = 0;
    for (std::size_t w = 0; w < words.size(); ++w) {
      std::string word = words[w];
      if (sentence_left == 0) {
        if (!text.empty()) text += ". ";
        sentence_left = 10 + detail::uniform_below(rng, 15);
        if (!word.empty() && word[0] >= 'a' && word[0] <= 'z') word[0] = static_cast<char>(word[0] - 'a' + 'A');
      } else {
        text += ' ';
      }
      text += word;
      --sentence_left;
    }
    f.text = text + ".";
    findings.push_back(std::move(f));
  }
  return SyntheticCorpus{Corpus(std::move(findings)), std::move(cluster_of), cluster_count, std::move(measures)};
}

/// Cluster-structured embeddings: a random unit centroid per cluster plus
/// isotropic Gaussian noise of total norm ~`noise`.
inline EmbeddingSet synthetic_embeddings(const SyntheticCorpus& sc, std::size_t dim, double noise, std::uint64_t seed) {
  if (dim == 0) throw ValidationError("embedding dimension must be positive");
  detail::Rng rng(detail::derive_seed(seed, 0xe3b));
  std::vector<double> centroids(sc.cluster_count * dim);
  for (std::size_t c = 0; c < sc.cluster_count; ++c) {
    double norm = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      centroids[c * dim + k] = detail::standard_normal(rng);
      norm += centroids[c * dim + k] * centroids[c * dim + k];
    }
    norm = std::sqrt(norm);
    for (std::size_t k = 0; k < dim; ++k) centroids[c * dim + k] /= norm;
  }
  const double scale = noise / std::sqrt(static_cast<double>(dim));
  std::vector<double> data(sc.corpus.size() * dim);
  for (std::size_t i = 0; i < sc.corpus.size(); ++i) {
    for (std::size_t k = 0; k < dim; ++k) {
      data[i * dim + k] = centroids[sc.cluster_of[i] * dim + k] + scale * detail::standard_normal(rng);
    }
  }
  return EmbeddingSet(dim, sc.corpus.ids(), std::move(data));
}

/// One labeled query per cluster (up to `query_count`), each with `g_hat`
/// identified mates drawn at random; the remaining mates stay unidentified.
inline std::vector<LabeledQuery> synthetic_labeled_queries(const SyntheticCorpus& sc, std::size_t query_count,
                                                           std::size_t g_hat, std::uint64_t seed) {
  if (g_hat < 1) throw ValidationError("g_hat must be at least 1");
  detail::Rng rng(detail::derive_seed(seed, 0x1abe1));
  std::vector<LabeledQuery> out;
  std::vector<bool> used(sc.cluster_count, false);
  for (std::size_t pos = 0; pos < sc.corpus.size() && out.size() < query_count; ++pos) {
    const auto c = sc.cluster_of[pos];
    if (used[c]) continue;
    auto mates = sc.cluster_mates(pos);
    if (mates.size() < g_hat) continue;
    used[c] = true;
    detail::shuffle(mates.begin(), mates.end(), rng);
    LabeledQuery q{sc.corpus[pos].id, {}};
    for (std::size_t i = 0; i < g_hat; ++i) q.identified_relevant.insert(sc.corpus[mates[i]].id);
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace findret
