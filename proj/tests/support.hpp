#pragma once

// Shared fixtures and independent oracles for the unit and acceptance tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "findret/findret.hpp"

namespace findret::testing {

inline std::string data_path(const std::string& name) { return std::string(FINDRET_DATA_DIR) + "/" + name; }

inline const Lexicon& bundled_lexicon() {
  static const Lexicon lex = Lexicon::load(data_path("stopwords_en.txt"), data_path("lemmas_en.tsv"));
  return lex;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("findret_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout only
};

inline CommandResult run_command(const std::string& cmd) {
  CommandResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), got);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

inline Finding make_finding(std::string id, std::string text, std::vector<std::string> refs = {},
                            std::vector<std::string> measures = {}) {
  Finding f;
  f.id = std::move(id);
  f.text = std::move(text);
  for (const auto& r : refs) f.crr_refs.push_back(CrrRef::parse(r));
  f.crr_refs = make_ref_set(f.crr_refs);
  f.measure_ids = std::move(measures);
  return f;
}

// ---------------------------------------------------------------------------
// Metric oracles: recount precision@i from scratch at every relevant rank.

template <class T>
double brute_average_precision(const std::vector<T>& ranking, const std::set<T>& relevant, std::size_t k) {
  double sum = 0.0;
  for (std::size_t i = 1; i <= std::min(k, ranking.size()); ++i) {
    if (!relevant.contains(ranking[i - 1])) continue;
    std::size_t rel_in_prefix = 0;
    for (std::size_t j = 0; j < i; ++j) rel_in_prefix += relevant.contains(ranking[j]) ? 1 : 0;
    sum += static_cast<double>(rel_in_prefix) / static_cast<double>(i);
  }
  return sum / static_cast<double>(std::min(relevant.size(), k));
}

template <class T>
double brute_reciprocal_rank(const std::vector<T>& ranking, const std::set<T>& relevant, std::size_t k) {
  double best = 0.0;
  for (std::size_t i = std::min(k, ranking.size()); i >= 1; --i) {
    if (relevant.contains(ranking[i - 1])) best = 1.0 / static_cast<double>(i);
  }
  return best;
}

/// E[RR@k] for a uniformly random permutation of n items, r of them relevant:
/// P(first relevant at rank j) = C(n-j, r-1) / C(n, r).
inline double expected_random_rr(std::size_t n, std::size_t r, std::size_t k) {
  const auto log_choose = [](double a, double b) {
    return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
  };
  double e = 0.0;
  for (std::size_t j = 1; j <= std::min(k, n - r + 1); ++j) {
    const double p = std::exp(log_choose(double(n - j), double(r - 1)) - log_choose(double(n), double(r)));
    e += p / static_cast<double>(j);
  }
  return e;
}

// ---------------------------------------------------------------------------
// Naive lexical scorer: formulas written out per (query term, doc) pair with
// no index and no shared helpers.

inline std::vector<double> naive_lexical_scores(const std::vector<TokenList>& docs, const TokenList& query,
                                                LexicalVariant variant, double k1, double b, double delta) {
  const double n = static_cast<double>(docs.size());
  double total_len = 0.0;
  for (const auto& d : docs) total_len += static_cast<double>(d.size());
  const double avgdl = total_len / n;
  const auto count_in = [](const TokenList& doc, const std::string& t) {
    return static_cast<double>(std::count(doc.begin(), doc.end(), t));
  };
  const auto df_of = [&](const std::string& t) {
    double df = 0.0;
    for (const auto& d : docs) df += count_in(d, t) > 0 ? 1.0 : 0.0;
    return df;
  };
  std::vector<double> out(docs.size(), 0.0);
  if (variant == LexicalVariant::TfIdf) {
    std::set<std::string> vocab;
    for (const auto& d : docs) vocab.insert(d.begin(), d.end());
    std::map<std::string, double> idf;
    for (const auto& t : vocab) idf[t] = std::log(n / df_of(t)) + 1.0;
    std::map<std::string, double> qv;
    for (const auto& t : query) {
      if (vocab.contains(t)) qv[t] += idf[t];
    }
    double qn = 0.0;
    for (const auto& [t, w] : qv) qn += w * w;
    qn = std::sqrt(qn);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      double dn = 0.0;
      for (const auto& t : vocab) {
        const double w = count_in(docs[i], t) * idf[t];
        dn += w * w;
      }
      dn = std::sqrt(dn);
      double dotp = 0.0;
      for (const auto& [t, w] : qv) dotp += w * count_in(docs[i], t) * idf[t];
      out[i] = (qn > 0.0 && dn > 0.0) ? dotp / (qn * dn) : 0.0;
    }
    return out;
  }
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const double len = static_cast<double>(docs[i].size());
    const double norm = 1.0 - b + b * len / avgdl;
    for (const auto& t : query) {
      const double df = df_of(t);
      if (df == 0.0) continue;
      const double tf = count_in(docs[i], t);
      if (tf == 0.0) continue;
      const double idf = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
      if (variant == LexicalVariant::Bm25) {
        out[i] += idf * (tf * (k1 + 1.0)) / (tf + k1 * norm);
      } else if (variant == LexicalVariant::Bm25Plus) {
        out[i] += idf * ((tf * (k1 + 1.0)) / (tf + k1 * norm) + delta);
      } else {
        const double c = tf / norm;
        out[i] += idf * ((k1 + 1.0) * (c + delta)) / (k1 + c + delta);
      }
    }
  }
  return out;
}

/// A TokenizedCorpus built straight from token lists (no pipeline).
inline TokenizedCorpus tokenized_from_docs(const std::vector<TokenList>& docs) {
  TokenizedCorpus tc;
  tc.n_docs = docs.size();
  tc.docs = docs;
  std::size_t total = 0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    tc.ids.push_back("D" + std::to_string(1000 + i));
    total += docs[i].size();
    std::set<std::string> seen(docs[i].begin(), docs[i].end());
    for (const auto& t : seen) ++tc.df[t];
  }
  std::uint32_t id = 0;
  for (const auto& [t, _] : tc.df) tc.vocab[t] = id++;
  tc.avgdl = static_cast<double>(total) / static_cast<double>(docs.size());
  return tc;
}

inline std::vector<TokenList> random_token_corpus(std::mt19937_64& rng, std::size_t n_docs, std::size_t vocab_size,
                                                  std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len_dist(1, max_len);
  std::uniform_int_distribution<std::size_t> tok_dist(0, vocab_size - 1);
  std::vector<TokenList> docs(n_docs);
  for (auto& d : docs) {
    const auto len = len_dist(rng);
    for (std::size_t i = 0; i < len; ++i) d.push_back("w" + std::to_string(tok_dist(rng)));
  }
  return docs;
}

// ---------------------------------------------------------------------------
// Cosine oracle: dot product over the product of norms, computed per pair.

inline double pairwise_cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

inline EmbeddingSet random_embeddings(std::mt19937_64& rng, std::size_t count, std::size_t dim,
                                      const std::string& prefix) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<std::string> ids;
  std::vector<double> data;
  for (std::size_t i = 0; i < count; ++i) {
    ids.push_back(prefix + std::to_string(10000 + i));
    for (std::size_t k = 0; k < dim; ++k) data.push_back(nd(rng));
  }
  return EmbeddingSet(dim, std::move(ids), std::move(data));
}

// ---------------------------------------------------------------------------
// Prefilter fixture. Query refs {181(a), 92(1)} have ancestor union {181, 92}.
//
//   doc  refs                                         J      H     in
//   D01  181(a) 92(1)                                 1      1     yes
//   D02  181(b) 92(1)                                 1/3    1     yes
//   D03  181(a)                                       1/2    1/2   yes
//   D04  181(b)                                       0      1/2   no
//   D05  181(a) 95(2) 96(1)                           1/4    1/4   no
//   D06  181(a) 92(1) 700(1)(a) 701(1)(a) 702(1)(a)   2/5    1/4   no
//   D07  181(a) 92                                    1/3    1/2   yes
//   D08  92(1)(c) 181(a)                              1/3    2/3   yes
//   D09  (none)                                       0      0     no
//   D10  181(a) 92(1) 300(1) 301(1) 302(1) 303(1)     1/3    1/3   yes

inline std::vector<Finding> prefilter_fixture_findings() {
  return {
      make_finding("D01", "capital requirement", {"181(a)", "92(1)"}),
      make_finding("D02", "capital requirement", {"181(b)", "92(1)"}),
      make_finding("D03", "capital requirement", {"181(a)"}),
      make_finding("D04", "capital requirement", {"181(b)"}),
      make_finding("D05", "capital requirement", {"181(a)", "95(2)", "96(1)"}),
      make_finding("D06", "capital requirement", {"181(a)", "92(1)", "700(1)(a)", "701(1)(a)", "702(1)(a)"}),
      make_finding("D07", "capital requirement", {"181(a)", "92"}),
      make_finding("D08", "capital requirement", {"92(1)(c)", "181(a)"}),
      make_finding("D09", "capital requirement", {}),
      make_finding("D10", "capital requirement", {"181(a)", "92(1)", "300(1)", "301(1)", "302(1)", "303(1)"}),
  };
}

inline CrrRefSet prefilter_fixture_query() { return make_ref_set({CrrRef::parse("181(a)"), CrrRef::parse("92(1)")}); }

inline std::vector<std::size_t> prefilter_fixture_expected() { return {0, 1, 2, 6, 7, 9}; }

// ---------------------------------------------------------------------------
// Tokenizer worked example. The first finding is the example sentence;
// the remaining 2499 findings give it the document frequencies under which
// "pursuant" (in >90% of findings) and "amidst" (in one finding, < 0.05%) are
// pruned while the content words survive.

inline const char* kWorkedExample =
    "Institutions shall estimate conversion factors by facility grade or pool on the basis of the average "
    "realized conversion factors by facility grade (amidst 2024 planning), pursuant article 182(1)(f) of "
    "Regulation (EU) No 575/2013.";

inline Corpus worked_example_corpus() {
  std::vector<Finding> findings;
  findings.push_back(make_finding("W0000", kWorkedExample, {"182(1)(f)"}));
  const std::array<const char*, 10> extras = {"institution", "estimate", "basis",      "average",    "realized",
                                              "planning",    "exposure", "validation", "governance", "rating"};
  for (int i = 1; i < 2500; ++i) {
    // topic codes repeat at most 4 times, so no pair through them reaches the
    // collocation minimum count
    std::string text = i <= 2300 ? "Pursuant topic" : "Topic";
    text += static_cast<char>('a' + i % 26);
    text += static_cast<char>('a' + (i / 26) % 26);
    if (i % 50 == 0) {
      text += " conversion factors by facility grade or pool";
    } else if (i % 70 == 35) {
      text += " facility grade";
    } else if (i % 90 == 45) {
      text += " see article 182(1)(f) of the CRR";
    } else {
      text += std::string(" ") + extras[static_cast<std::size_t>(i) % extras.size()];
    }
    findings.push_back(make_finding("W" + std::to_string(10000 + i).substr(1), text));
  }
  return Corpus(std::move(findings));
}

inline const TokenList& worked_example_expected() {
  static const TokenList t = {"institution", "estimate",          "conversion_factor", "facility_grade_pool",
                              "basis",       "average",           "realize",           "conversion_factor",
                              "facility_grade", "planning",       "CRR_182_1_f"};
  return t;
}

}  // namespace findret::testing
