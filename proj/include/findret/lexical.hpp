#pragma once

// TF-IDF and BM25-family scoring over an inverted index.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "findret/detail/binary_io.hpp"
#include "findret/error.hpp"
#include "findret/parallel.hpp"
#include "findret/similarity_matrix.hpp"
#include "findret/tokenizer.hpp"

namespace findret {

enum class LexicalVariant : std::uint32_t { TfIdf = 0, Bm25 = 1, Bm25Plus = 2, Bm25L = 3 };

inline std::string_view to_string(LexicalVariant v) {
  switch (v) {
    case LexicalVariant::TfIdf: return "tfidf";
    case LexicalVariant::Bm25: return "bm25";
    case LexicalVariant::Bm25Plus: return "bm25plus";
    case LexicalVariant::Bm25L: return "bm25l";
  }
  return "unknown";
}

struct Bm25Params {
  double k1 = 1.6;
  double b = 0.75;
  double delta = 0.0;

  void validate() const {
    if (!(k1 > 0.0) || !std::isfinite(k1)) throw ValidationError("k1 must be positive");
    if (!(b >= 0.0 && b <= 1.0)) throw ValidationError("b must lie in [0, 1]");
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw ValidationError("delta must be non-negative");
  }

  /// Defaults per variant: k1 = 1.6, b = 0.75, delta = 1 for BM25+, 0.5 for BM25L.
  static Bm25Params defaults_for(LexicalVariant v) {
    Bm25Params p;
    if (v == LexicalVariant::Bm25Plus) p.delta = 1.0;
    if (v == LexicalVariant::Bm25L) p.delta = 0.5;
    return p;
  }

  friend bool operator==(const Bm25Params&, const Bm25Params&) = default;
};

namespace scoring {

/// ln((n - df + 0.5) / (df + 0.5) + 1); never negative.
inline double bm25_idf(std::size_t n_docs, std::size_t df) {
  const double n = static_cast<double>(n_docs);
  const double d = static_cast<double>(df);
  return std::log((n - d + 0.5) / (d + 0.5) + 1.0);
}

/// ln(n / df) + 1.
inline double tfidf_idf(std::size_t n_docs, std::size_t df) {
  return std::log(static_cast<double>(n_docs) / static_cast<double>(df)) + 1.0;
}

// 1 - b + b |d| / avgdl, with an empty corpus treated as unit length.
inline double length_norm(double doc_len, double avgdl, double b) {
  if (!(avgdl > 0.0)) return 1.0;
  return 1.0 - b + b * doc_len / avgdl;
}

/// Per-term contribution of one occurrence of a query term; zero when the term
/// is absent from the document (tf == 0) for every variant.
inline double bm25_term(double tf, double doc_len, double avgdl, double idf, const Bm25Params& p) {
  if (tf <= 0.0) return 0.0;
  return idf * tf * (p.k1 + 1.0) / (tf + p.k1 * length_norm(doc_len, avgdl, p.b));
}

inline double bm25plus_term(double tf, double doc_len, double avgdl, double idf, const Bm25Params& p) {
  if (tf <= 0.0) return 0.0;
  return idf * (tf * (p.k1 + 1.0) / (tf + p.k1 * length_norm(doc_len, avgdl, p.b)) + p.delta);
}

inline double bm25l_term(double tf, double doc_len, double avgdl, double idf, const Bm25Params& p) {
  if (tf <= 0.0) return 0.0;
  const double c = tf / length_norm(doc_len, avgdl, p.b);
  return idf * (p.k1 + 1.0) * (c + p.delta) / (p.k1 + c + p.delta);
}

inline double term_score(LexicalVariant v, double tf, double doc_len, double avgdl, double idf, const Bm25Params& p) {
  switch (v) {
    case LexicalVariant::Bm25: return bm25_term(tf, doc_len, avgdl, idf, p);
    case LexicalVariant::Bm25Plus: return bm25plus_term(tf, doc_len, avgdl, idf, p);
    case LexicalVariant::Bm25L: return bm25l_term(tf, doc_len, avgdl, idf, p);
    case LexicalVariant::TfIdf: return tf * idf;
  }
  return 0.0;
}

}  // namespace scoring

struct Posting {
  std::uint32_t doc = 0;
  std::uint32_t tf = 0;

  friend bool operator==(const Posting&, const Posting&) = default;
};

/// Immutable inverted index. The postings do not depend on the variant, so
/// with_variant() re-derives IDF without re-reading the corpus.
class LexicalIndex {
 public:
  static constexpr char kMagic[4] = {'L', 'X', 'I', 'X'};
  static constexpr std::uint32_t kFormatVersion = 1;

  LexicalIndex() = default;

  static LexicalIndex build(const TokenizedCorpus& tc, LexicalVariant variant, Bm25Params params) {
    params.validate();
    if (tc.n_docs == 0) throw ValidationError("cannot index an empty corpus");
    if (tc.vocab.empty()) throw ValidationError("tokenized corpus has an empty vocabulary; nothing to score");
    LexicalIndex idx;
    idx.variant_ = variant;
    idx.params_ = params;
    idx.n_docs_ = tc.n_docs;
    idx.avgdl_ = tc.avgdl;
    idx.terms_.reserve(tc.vocab.size());
    for (const auto& [token, id] : tc.vocab) {
      if (id != idx.terms_.size()) throw ValidationError("vocabulary ids must be dense and follow token order");
      idx.terms_.push_back(token);
    }
    idx.postings_.assign(idx.terms_.size(), {});
    idx.doc_len_.resize(tc.n_docs);
    for (std::size_t d = 0; d < tc.n_docs; ++d) {
      idx.doc_len_[d] = static_cast<std::uint32_t>(tc.docs[d].size());
      std::map<std::uint32_t, std::uint32_t> counts;
      for (const auto& t : tc.docs[d]) {
        const auto it = tc.vocab.find(t);
        if (it == tc.vocab.end()) throw ValidationError("token '" + t + "' missing from vocabulary");
        ++counts[it->second];
      }
      for (const auto& [term, tf] : counts) idx.postings_[term].push_back({static_cast<std::uint32_t>(d), tf});
    }
    idx.finalize();
    return idx;
  }

  LexicalIndex with_variant(LexicalVariant variant, Bm25Params params) const {
    params.validate();
    LexicalIndex copy = *this;
    copy.variant_ = variant;
    copy.params_ = params;
    copy.finalize();
    return copy;
  }

  /// Scores every document against `query_tokens`. Repeated query tokens count
  /// once per occurrence; tokens outside the vocabulary contribute nothing.
  /// TF-IDF rows are cosines in [0, 1]; BM25-family rows are raw sums.
  std::vector<double> score(std::span<const std::string> query_tokens) const {
    std::vector<double> row(n_docs_, 0.0);
    std::map<std::uint32_t, std::uint32_t> qtf;
    for (const auto& t : query_tokens) {
      if (const auto id = term_id(t)) ++qtf[*id];
    }
    if (qtf.empty()) return row;
    if (variant_ == LexicalVariant::TfIdf) {
      double qnorm2 = 0.0;
      for (const auto& [term, q] : qtf) {
        const double qw = q * idf_[term];
        qnorm2 += qw * qw;
        for (const auto& p : postings_[term]) row[p.doc] += qw * p.tf * idf_[term];
      }
      const double qnorm = std::sqrt(qnorm2);
      for (std::size_t d = 0; d < n_docs_; ++d) {
        row[d] = (doc_norm_[d] > 0.0 && qnorm > 0.0) ? row[d] / (qnorm * doc_norm_[d]) : 0.0;
      }
      return row;
    }
    for (const auto& [term, q] : qtf) {
      for (const auto& p : postings_[term]) {
        row[p.doc] += q * scoring::term_score(variant_, p.tf, doc_len_[p.doc], avgdl_, idf_[term], params_);
      }
    }
    return row;
  }

  std::optional<std::uint32_t> term_id(std::string_view token) const {
    const auto it = term_ids_.find(std::string(token));
    if (it == term_ids_.end()) return std::nullopt;
    return it->second;
  }

  LexicalVariant variant() const noexcept { return variant_; }
  const Bm25Params& params() const noexcept { return params_; }
  std::size_t n_docs() const noexcept { return n_docs_; }
  double avgdl() const noexcept { return avgdl_; }
  std::span<const std::string> terms() const noexcept { return terms_; }
  std::span<const Posting> postings(std::uint32_t term) const { return postings_.at(term); }
  double idf(std::uint32_t term) const { return idf_.at(term); }
  std::span<const std::uint32_t> doc_lengths() const noexcept { return doc_len_; }

  // Binary layout (all integers and floats little-endian):
  //   "LXIX" u32 version  u32 variant  f64 k1  f64 b  f64 delta
  //   u32 n_docs  f64 avgdl  n_docs x u32 doc_len
  //   u32 term_count, then per term in id order:
  //     u16 byte_len  bytes  f64 idf  u32 posting_count  posting_count x (u32 doc, u32 tf)
  void save(const std::string& path) const {
    auto out = detail::open_output(path, std::ios::out | std::ios::binary);
    out.write(kMagic, 4);
    detail::write_le<std::uint32_t>(out, kFormatVersion);
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(variant_));
    detail::write_le<double>(out, params_.k1);
    detail::write_le<double>(out, params_.b);
    detail::write_le<double>(out, params_.delta);
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(n_docs_));
    detail::write_le<double>(out, avgdl_);
    for (auto len : doc_len_) detail::write_le<std::uint32_t>(out, len);
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(terms_.size()));
    for (std::size_t t = 0; t < terms_.size(); ++t) {
      if (terms_[t].size() > 0xffff) throw ValidationError("token too long to serialize: " + terms_[t].substr(0, 32));
      detail::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(terms_[t].size()));
      out.write(terms_[t].data(), static_cast<std::streamsize>(terms_[t].size()));
      detail::write_le<double>(out, idf_[t]);
      detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(postings_[t].size()));
      for (const auto& p : postings_[t]) {
        detail::write_le<std::uint32_t>(out, p.doc);
        detail::write_le<std::uint32_t>(out, p.tf);
      }
    }
    if (!out) throw IoError("failed writing " + path);
  }

  static LexicalIndex load(const std::string& path) {
    auto in = detail::open_input(path, std::ios::in | std::ios::binary);
    const auto magic = detail::read_bytes(in, 4, "magic");
    if (magic != std::string_view(kMagic, 4)) throw ParseError(path + ": not a lexical index (bad magic)");
    const auto version = detail::read_le<std::uint32_t>(in, "version");
    if (version != kFormatVersion) throw ParseError(path + ": unsupported index version " + std::to_string(version));
    LexicalIndex idx;
    const auto variant = detail::read_le<std::uint32_t>(in, "variant");
    if (variant > 3) throw ParseError(path + ": unknown variant " + std::to_string(variant));
    idx.variant_ = static_cast<LexicalVariant>(variant);
    idx.params_.k1 = detail::read_le<double>(in, "k1");
    idx.params_.b = detail::read_le<double>(in, "b");
    idx.params_.delta = detail::read_le<double>(in, "delta");
    idx.n_docs_ = detail::read_le<std::uint32_t>(in, "n_docs");
    idx.avgdl_ = detail::read_le<double>(in, "avgdl");
    idx.doc_len_.resize(idx.n_docs_);
    for (auto& len : idx.doc_len_) len = detail::read_le<std::uint32_t>(in, "doc_len");
    const auto term_count = detail::read_le<std::uint32_t>(in, "term_count");
    idx.terms_.resize(term_count);
    idx.postings_.resize(term_count);
    std::vector<double> stored_idf(term_count);
    for (std::uint32_t t = 0; t < term_count; ++t) {
      const auto len = detail::read_le<std::uint16_t>(in, "term length");
      idx.terms_[t] = detail::read_bytes(in, len, "term");
      stored_idf[t] = detail::read_le<double>(in, "idf");
      const auto count = detail::read_le<std::uint32_t>(in, "posting count");
      auto& list = idx.postings_[t];
      list.resize(count);
      for (auto& p : list) {
        p.doc = detail::read_le<std::uint32_t>(in, "posting doc");
        p.tf = detail::read_le<std::uint32_t>(in, "posting tf");
        if (p.doc >= idx.n_docs_ || p.tf == 0) throw ParseError(path + ": corrupt posting");
      }
    }
    try {
      idx.params_.validate();
    } catch (const ValidationError& e) {
      throw ParseError(path + ": " + e.what());
    }
    idx.finalize();
    for (std::uint32_t t = 0; t < term_count; ++t) {
      if (stored_idf[t] != idx.idf_[t]) throw ParseError(path + ": stored idf does not match postings");
    }
    return idx;
  }

  friend bool operator==(const LexicalIndex& a, const LexicalIndex& b) {
    return a.variant_ == b.variant_ && a.params_ == b.params_ && a.n_docs_ == b.n_docs_ && a.avgdl_ == b.avgdl_ &&
           a.terms_ == b.terms_ && a.postings_ == b.postings_ && a.doc_len_ == b.doc_len_;
  }

 private:
  void finalize() {
    term_ids_.clear();
    for (std::size_t t = 0; t < terms_.size(); ++t) term_ids_.emplace(terms_[t], static_cast<std::uint32_t>(t));
    idf_.resize(terms_.size());
    for (std::size_t t = 0; t < terms_.size(); ++t) {
      const auto df = postings_[t].size();
      idf_[t] = df == 0 ? 0.0
                        : (variant_ == LexicalVariant::TfIdf ? scoring::tfidf_idf(n_docs_, df)
                                                             : scoring::bm25_idf(n_docs_, df));
    }
    doc_norm_.assign(n_docs_, 0.0);
    if (variant_ == LexicalVariant::TfIdf) {
      for (std::size_t t = 0; t < terms_.size(); ++t) {
        for (const auto& p : postings_[t]) {
          const double w = p.tf * idf_[t];
          doc_norm_[p.doc] += w * w;
        }
      }
      for (auto& v : doc_norm_) v = std::sqrt(v);
    }
  }

  LexicalVariant variant_ = LexicalVariant::Bm25;
  Bm25Params params_;
  std::size_t n_docs_ = 0;
  double avgdl_ = 0.0;
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::uint32_t> term_ids_;
  std::vector<std::vector<Posting>> postings_;
  std::vector<double> idf_;
  std::vector<std::uint32_t> doc_len_;
  std::vector<double> doc_norm_;
};

inline LexicalIndex build_lexical_index(const TokenizedCorpus& tc, LexicalVariant variant, Bm25Params params) {
  return LexicalIndex::build(tc, variant, params);
}

inline std::vector<double> score_query(const LexicalIndex& index, std::span<const std::string> query_tokens) {
  return index.score(query_tokens);
}

/// Raw scores plus the per-row min-max normalized copy used for fusion.
struct LexicalMatrices {
  SimilarityMatrix raw;
  SimilarityMatrix normalized;
};

inline LexicalMatrices similarity_matrix_lexical(const LexicalIndex& index, std::span<const TokenList> queries,
                                                 std::vector<std::string> query_ids,
                                                 std::vector<std::string> corpus_ids, std::size_t threads = 1) {
  if (query_ids.size() != queries.size()) throw ValidationError("one id per query required");
  if (corpus_ids.size() != index.n_docs()) throw ValidationError("corpus ids do not match the index");
  LexicalMatrices m;
  m.raw.row_ids = std::move(query_ids);
  m.raw.col_ids = std::move(corpus_ids);
  m.raw.values.assign(queries.size() * index.n_docs(), 0.0);
  parallel_for(queries.size(), threads, [&](std::size_t q) {
    const auto row = index.score(queries[q]);
    std::copy(row.begin(), row.end(), m.raw.row(q).begin());
  });
  m.normalized = m.raw;
  for (std::size_t q = 0; q < queries.size(); ++q) min_max_normalize(m.normalized.row(q));
  return m;
}

}  // namespace findret
