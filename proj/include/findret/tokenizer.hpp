#pragma once

// Lexical tokenization pipeline for the BM25-family scorers:
//
//   extract_crr_tokens -> tokenize_base -> detect_collocations -> prune_by_df
//
// CRR references become atomic CRR_<path> tokens that skip stopword removal,
// lemmatization and collocation merging (they can still be df-pruned).

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <regex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "findret/corpus.hpp"
#include "findret/crr.hpp"
#include "findret/detail/binary_io.hpp"
#include "findret/error.hpp"
#include "findret/parallel.hpp"

namespace findret {

using TokenList = std::vector<std::string>;

/// Stopword list and surface->lemma lookup table.
struct Lexicon {
  std::set<std::string> stopwords;
  std::map<std::string, std::string> lemmas;

  bool is_stopword(std::string_view w) const { return stopwords.contains(std::string(w)); }

  std::string lemmatize(std::string word) const {
    if (const auto it = lemmas.find(word); it != lemmas.end()) return it->second;
    return word;
  }

  static std::set<std::string> load_stopwords(const std::string& path) {
    auto in = detail::open_input(path);
    std::set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      std::transform(line.begin(), line.end(), line.begin(), detail::ascii_lower);
      out.insert(line);
    }
    return out;
  }

  static std::map<std::string, std::string> load_lemmas(const std::string& path) {
    auto in = detail::open_input(path);
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": expected 'surface<TAB>lemma'");
      }
      out[line.substr(0, tab)] = line.substr(tab + 1);
    }
    return out;
  }

  static Lexicon load(const std::string& stopword_path, const std::string& lemma_path) {
    return Lexicon{load_stopwords(stopword_path), load_lemmas(lemma_path)};
  }

  friend bool operator==(const Lexicon&, const Lexicon&) = default;
};

struct TokenizerConfig {
  Lexicon lexicon;
  double min_df = 0.0005;
  double max_df = 0.9;
  int ngram_max = 3;
  std::size_t collocation_min_count = 5;

  void validate() const {
    if (!(min_df > 0.0 && min_df < 1.0)) throw ValidationError("min_df must lie in (0, 1)");
    if (!(max_df > 0.0 && max_df < 1.0)) throw ValidationError("max_df must lie in (0, 1)");
    if (!(min_df < max_df)) throw ValidationError("min_df must be smaller than max_df");
    if (ngram_max < 1 || ngram_max > 3) throw ValidationError("ngram_max must be 1, 2 or 3");
    if (collocation_min_count < 1) throw ValidationError("collocation_min_count must be at least 1");
  }
};

inline bool is_crr_token(std::string_view t) { return t.starts_with("CRR_"); }

// ---------------------------------------------------------------------------
// CRR reference extraction

struct CrrExtraction {
  std::string text;
  std::vector<CrrRef> refs;  // in order of appearance
};

namespace detail {

inline const std::regex& crr_reference_regex() {
  // article number, parenthesised parts, then an optional CRR identifier
  static const std::regex re(
      R"(\b[Aa]rticles?\s+(\d+)((?:\s*\(\s*[0-9A-Za-z]+\s*\))*)(?![0-9A-Za-z])((?:\s+of)?(?:\s+the)?\s+(?:Regulation\s*\(EU\)\s*(?:No\.?\s*)?575/2013|CRR)\b)?)");
  return re;
}

inline const std::regex& other_legal_act_regex() {
  static const std::regex re(
      R"(^(?:\s+of)?(?:\s+the)?\s+(?:Regulation|Directive|Delegated|Implementing|CRD|IFR|IFD|BRRD)\b)");
  return re;
}

inline std::vector<std::string> parenthesised_parts(const std::string& s) {
  std::vector<std::string> parts;
  std::string current;
  bool inside = false;
  for (char c : s) {
    if (c == '(') {
      inside = true;
      current.clear();
    } else if (c == ')') {
      inside = false;
      parts.push_back(current);
    } else if (inside && c != ' ' && c != '\t') {
      current.push_back(c);
    }
  }
  return parts;
}

}  // namespace detail

/// Replaces every CRR article reference ("article 182(1)(f) of Regulation (EU)
/// No 575/2013", "Article 92") by an atomic token such as CRR_182_1_f and
/// returns the parsed references. Articles of other legal acts and words like
/// "article of clothing" are left untouched.
inline CrrExtraction extract_crr_tokens(std::string_view text) {
  CrrExtraction out;
  const std::string input(text);
  const auto& re = detail::crr_reference_regex();
  std::size_t copied = 0;
  for (auto it = std::sregex_iterator(input.begin(), input.end(), re); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    const auto match_end = static_cast<std::size_t>(m.position(0) + m.length(0));
    if (!m[3].matched) {
      const std::string rest = input.substr(match_end, 64);
      if (std::regex_search(rest, detail::other_legal_act_regex())) continue;
    }
    std::vector<std::string> path{m[1].str()};
    for (auto& p : detail::parenthesised_parts(m[2].str())) path.push_back(std::move(p));
    CrrRef ref(std::move(path));
    out.text.append(input, copied, static_cast<std::size_t>(m.position(0)) - copied);
    out.text += ' ';
    out.text += ref.token();
    out.text += ' ';
    copied = match_end;
    out.refs.push_back(std::move(ref));
  }
  out.text.append(input, copied, std::string::npos);
  return out;
}

// ---------------------------------------------------------------------------
// Base tokenization

namespace detail {

inline bool is_word_byte(unsigned char c) { return is_alnum_ascii(c) || c >= 0x80; }

inline bool is_crr_token_byte(unsigned char c) { return is_alnum_ascii(c) || c == '_'; }

}  // namespace detail

/// Lowercases, splits on punctuation and hyphens, drops purely numeric tokens
/// and stopwords, then lemmatizes. CRR_ tokens pass through unchanged.
inline TokenList tokenize_base(std::string_view text, const Lexicon& lexicon) {
  TokenList out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (!detail::is_word_byte(c)) {
      ++i;
      continue;
    }
    if (text.substr(i).starts_with("CRR_") && (i == 0 || !detail::is_crr_token_byte(static_cast<unsigned char>(text[i - 1])))) {
      std::size_t j = i + 4;
      while (j < n && detail::is_crr_token_byte(static_cast<unsigned char>(text[j]))) ++j;
      std::string_view candidate = text.substr(i, j - i);
      while (candidate.ends_with('_')) candidate.remove_suffix(1);
      try {
        out.push_back(CrrRef::from_token(candidate).token());
        i = j;
        continue;
      } catch (const ParseError&) {
        // not a well-formed CRR token; fall through to ordinary words
      }
    }
    std::size_t j = i;
    std::string word;
    while (j < n && detail::is_word_byte(static_cast<unsigned char>(text[j]))) {
      word.push_back(detail::ascii_lower(text[j]));
      ++j;
    }
    i = j;
    if (detail::is_digits(word) || lexicon.is_stopword(word)) continue;
    out.push_back(lexicon.lemmatize(std::move(word)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Collocations

using TokenPair = std::pair<std::string, std::string>;

/// Learned merge rules: a bigram pass over unigrams and, for ngram_max 3, a
/// trigram pass joining a merged bigram with an adjacent unigram.
struct CollocationTable {
  std::set<TokenPair> bigrams;
  std::set<TokenPair> trigrams;

  friend bool operator==(const CollocationTable&, const CollocationTable&) = default;
};

namespace detail {

inline bool is_merged(std::string_view t) { return !is_crr_token(t) && t.find('_') != std::string_view::npos; }

inline bool is_plain_unigram(std::string_view t) { return !is_crr_token(t) && t.find('_') == std::string_view::npos; }

inline bool eligible_bigram(std::string_view a, std::string_view b) {
  return is_plain_unigram(a) && is_plain_unigram(b);
}

inline bool eligible_trigram(std::string_view a, std::string_view b) {
  return (is_merged(a) && is_plain_unigram(b) && std::count(a.begin(), a.end(), '_') == 1) ||
         (is_plain_unigram(a) && is_merged(b) && std::count(b.begin(), b.end(), '_') == 1);
}

// Pairs whose observed count reaches min_count and whose conditionals both
// beat the marginals: c(ab)/c(a) > c(b)/N and c(ab)/c(b) > c(a)/N.
template <class Eligible>
std::set<TokenPair> learn_pairs(std::span<const TokenList> docs, std::size_t min_count, Eligible eligible) {
  std::unordered_map<std::string, std::uint64_t> unigram;
  std::map<TokenPair, std::uint64_t> pairs;
  std::uint64_t total = 0;
  for (const auto& doc : docs) {
    total += doc.size();
    for (std::size_t i = 0; i < doc.size(); ++i) {
      ++unigram[doc[i]];
      if (i + 1 < doc.size() && eligible(doc[i], doc[i + 1])) ++pairs[{doc[i], doc[i + 1]}];
    }
  }
  std::set<TokenPair> out;
  for (const auto& [pair, count] : pairs) {
    if (count < min_count) continue;
    const auto ca = static_cast<unsigned __int128>(unigram[pair.first]);
    const auto cb = static_cast<unsigned __int128>(unigram[pair.second]);
    const auto cab = static_cast<unsigned __int128>(count);
    const auto n = static_cast<unsigned __int128>(total);
    const bool b_given_a = cab * n > cb * ca;  // p(b|a) > p(b)
    const bool a_given_b = cab * n > ca * cb;  // p(a|b) > p(a)
    if (b_given_a && a_given_b) out.insert(pair);
  }
  return out;
}

}  // namespace detail

/// Greedy left-to-right, non-overlapping merge of adjacent pairs in `pairs`.
inline TokenList apply_pairs(const TokenList& doc, const std::set<TokenPair>& pairs) {
  if (pairs.empty()) return doc;
  TokenList out;
  out.reserve(doc.size());
  std::size_t i = 0;
  TokenPair probe;
  while (i < doc.size()) {
    if (i + 1 < doc.size()) {
      probe.first = doc[i];
      probe.second = doc[i + 1];
      if (pairs.contains(probe)) {
        out.push_back(doc[i] + "_" + doc[i + 1]);
        i += 2;
        continue;
      }
    }
    out.push_back(doc[i]);
    ++i;
  }
  return out;
}

inline TokenList apply_collocations(const TokenList& doc, const CollocationTable& table) {
  return apply_pairs(apply_pairs(doc, table.bigrams), table.trigrams);
}

struct CollocationResult {
  std::vector<TokenList> docs;
  CollocationTable table;
  std::size_t merge_count = 0;  // number of merged tokens emitted across both passes
};

/// Learns collocations over the whole corpus and merges them. Trigram
/// statistics are re-estimated on the bigram-merged corpus.
inline CollocationResult detect_collocations(std::vector<TokenList> docs, int ngram_max, std::size_t min_count) {
  if (docs.empty()) throw ValidationError("detect_collocations needs at least one document");
  CollocationResult result;
  const auto count_merged = [](const std::vector<TokenList>& before, const std::vector<TokenList>& after) {
    std::size_t b = 0;
    std::size_t a = 0;
    for (const auto& d : before) b += d.size();
    for (const auto& d : after) a += d.size();
    return b - a;
  };
  if (ngram_max >= 2) {
    result.table.bigrams = detail::learn_pairs(docs, min_count, detail::eligible_bigram);
    std::vector<TokenList> merged;
    merged.reserve(docs.size());
    for (const auto& d : docs) merged.push_back(apply_pairs(d, result.table.bigrams));
    result.merge_count += count_merged(docs, merged);
    docs = std::move(merged);
  }
  if (ngram_max >= 3) {
    result.table.trigrams = detail::learn_pairs(docs, min_count, detail::eligible_trigram);
    std::vector<TokenList> merged;
    merged.reserve(docs.size());
    for (const auto& d : docs) merged.push_back(apply_pairs(d, result.table.trigrams));
    result.merge_count += count_merged(docs, merged);
    docs = std::move(merged);
  }
  result.docs = std::move(docs);
  return result;
}

// ---------------------------------------------------------------------------
// Document-frequency pruning

struct PruneResult {
  std::vector<TokenList> docs;
  std::map<std::string, std::uint32_t> vocab;  // token -> id, ids follow token order
  std::map<std::string, std::uint32_t> df;     // documents containing the token
};

inline std::map<std::string, std::uint32_t> document_frequencies(std::span<const TokenList> docs) {
  std::map<std::string, std::uint32_t> df;
  for (const auto& doc : docs) {
    std::unordered_set<std::string_view> seen(doc.begin(), doc.end());
    for (const auto& t : seen) ++df[std::string(t)];
  }
  return df;
}

/// Drops tokens with df/n > max_df or df/n < min_df from every document.
inline PruneResult prune_by_df(std::vector<TokenList> docs, double min_df, double max_df) {
  if (!(min_df > 0.0 && min_df < max_df && max_df < 1.0)) {
    throw ValidationError("prune_by_df requires 0 < min_df < max_df < 1");
  }
  PruneResult result;
  const double n = static_cast<double>(docs.size());
  const auto all_df = document_frequencies(docs);
  std::unordered_set<std::string_view> keep;
  for (const auto& [token, count] : all_df) {
    const double ratio = static_cast<double>(count) / n;
    if (ratio > max_df || ratio < min_df) continue;
    keep.insert(token);
    result.df.emplace(token, count);
  }
  std::uint32_t next_id = 0;
  for (const auto& [token, _] : result.df) result.vocab.emplace(token, next_id++);
  for (auto& doc : docs) {
    std::erase_if(doc, [&](const std::string& t) { return !keep.contains(t); });
  }
  result.docs = std::move(docs);
  return result;
}

// ---------------------------------------------------------------------------
// Whole-corpus pipeline

/// Post-pipeline token lists plus the corpus statistics the scorers need.
struct TokenizedCorpus {
  std::vector<std::string> ids;  // finding ids in corpus order
  std::vector<TokenList> docs;
  std::map<std::string, std::uint32_t> vocab;
  std::map<std::string, std::uint32_t> df;
  double avgdl = 0.0;
  std::size_t n_docs = 0;
  CollocationTable collocations;

  friend bool operator==(const TokenizedCorpus&, const TokenizedCorpus&) = default;
};

/// Runs the full pipeline over `corpus`. Per-document stages use up to
/// `threads` workers; collocation and df statistics aggregate over all docs.
inline TokenizedCorpus build_tokenized_corpus(const Corpus& corpus, const TokenizerConfig& config,
                                              std::size_t threads = 1) {
  config.validate();
  const std::size_t n = corpus.size();
  std::vector<TokenList> base(n);
  parallel_for(n, threads, [&](std::size_t i) {
    base[i] = tokenize_base(extract_crr_tokens(corpus[i].text).text, config.lexicon);
  });
  auto colloc = detect_collocations(std::move(base), config.ngram_max, config.collocation_min_count);
  auto pruned = prune_by_df(std::move(colloc.docs), config.min_df, config.max_df);

  TokenizedCorpus tc;
  tc.ids = corpus.ids();
  tc.docs = std::move(pruned.docs);
  tc.vocab = std::move(pruned.vocab);
  tc.df = std::move(pruned.df);
  tc.n_docs = n;
  tc.collocations = std::move(colloc.table);
  std::size_t total = 0;
  for (const auto& d : tc.docs) total += d.size();
  tc.avgdl = static_cast<double>(total) / static_cast<double>(n);
  return tc;
}

/// The frozen corpus-time pipeline applied to new text: same lexicon, same
/// collocation table, and tokens outside the corpus vocabulary dropped.
class QueryTokenizer {
 public:
  QueryTokenizer() = default;
  QueryTokenizer(TokenizerConfig config, CollocationTable collocations, std::set<std::string> vocab)
      : config_(std::move(config)), collocations_(std::move(collocations)), vocab_(std::move(vocab)) {}

  QueryTokenizer(const TokenizerConfig& config, const TokenizedCorpus& tc)
      : config_(config), collocations_(tc.collocations) {
    for (const auto& [t, _] : tc.vocab) vocab_.insert(t);
  }

  TokenList operator()(std::string_view text) const {
    auto tokens = apply_collocations(tokenize_base(extract_crr_tokens(text).text, config_.lexicon), collocations_);
    std::erase_if(tokens, [&](const std::string& t) { return !vocab_.contains(t); });
    return tokens;
  }

  const TokenizerConfig& config() const noexcept { return config_; }
  const CollocationTable& collocations() const noexcept { return collocations_; }
  const std::set<std::string>& vocab() const noexcept { return vocab_; }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["min_df"] = config_.min_df;
    j["max_df"] = config_.max_df;
    j["ngram_max"] = config_.ngram_max;
    j["collocation_min_count"] = config_.collocation_min_count;
    j["stopwords"] = config_.lexicon.stopwords;
    j["lemmas"] = config_.lexicon.lemmas;
    const auto pairs = [](const std::set<TokenPair>& s) {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& [a, b] : s) arr.push_back({a, b});
      return arr;
    };
    j["bigrams"] = pairs(collocations_.bigrams);
    j["trigrams"] = pairs(collocations_.trigrams);
    j["vocab"] = vocab_;
    return j;
  }

  static QueryTokenizer from_json(const nlohmann::json& j) {
    try {
      TokenizerConfig cfg;
      cfg.min_df = j.at("min_df").get<double>();
      cfg.max_df = j.at("max_df").get<double>();
      cfg.ngram_max = j.at("ngram_max").get<int>();
      cfg.collocation_min_count = j.at("collocation_min_count").get<std::size_t>();
      cfg.lexicon.stopwords = j.at("stopwords").get<std::set<std::string>>();
      cfg.lexicon.lemmas = j.at("lemmas").get<std::map<std::string, std::string>>();
      CollocationTable table;
      for (const auto& p : j.at("bigrams")) table.bigrams.emplace(p.at(0).get<std::string>(), p.at(1).get<std::string>());
      for (const auto& p : j.at("trigrams")) table.trigrams.emplace(p.at(0).get<std::string>(), p.at(1).get<std::string>());
      return QueryTokenizer(std::move(cfg), std::move(table), j.at("vocab").get<std::set<std::string>>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed tokenizer description: ") + e.what());
    }
  }

 private:
  TokenizerConfig config_;
  CollocationTable collocations_;
  std::set<std::string> vocab_;
};

// ---------------------------------------------------------------------------
// Persistence: tokens JSONL (id -> tokens) plus a stats JSON.

inline void write_tokenized_corpus(const TokenizedCorpus& tc, const std::string& tokens_path,
                                   const std::string& stats_path) {
  {
    auto out = detail::open_output(tokens_path);
    for (std::size_t i = 0; i < tc.n_docs; ++i) {
      nlohmann::ordered_json j;
      j["id"] = tc.ids[i];
      j["tokens"] = tc.docs[i];
      out << j.dump() << '\n';
    }
    if (!out) throw IoError("failed writing " + tokens_path);
  }
  nlohmann::ordered_json stats;
  stats["n_docs"] = tc.n_docs;
  stats["avgdl"] = tc.avgdl;
  stats["vocab"] = tc.vocab;
  stats["df"] = tc.df;
  auto out = detail::open_output(stats_path);
  out << stats.dump(1) << '\n';
  if (!out) throw IoError("failed writing " + stats_path);
}

inline TokenizedCorpus read_tokenized_corpus(const std::string& tokens_path, const std::string& stats_path) {
  TokenizedCorpus tc;
  detail::for_each_jsonl(tokens_path, [&](const nlohmann::json& j, std::size_t) {
    tc.ids.push_back(detail::require_string(j, "id"));
    tc.docs.push_back(j.at("tokens").get<TokenList>());
  });
  auto in = detail::open_input(stats_path);
  try {
    const auto stats = nlohmann::json::parse(in);
    tc.n_docs = stats.at("n_docs").get<std::size_t>();
    tc.avgdl = stats.at("avgdl").get<double>();
    tc.vocab = stats.at("vocab").get<std::map<std::string, std::uint32_t>>();
    tc.df = stats.at("df").get<std::map<std::string, std::uint32_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(stats_path + ": " + e.what());
  }
  if (tc.n_docs != tc.docs.size()) throw ParseError(stats_path + ": n_docs does not match the token file");
  return tc;
}

}  // namespace findret
