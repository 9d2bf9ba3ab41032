#pragma once

// CRR article references, the article tree and the set similarities used by
// the fuzzy prefilter.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <fstream>
#include <iterator>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "findret/detail/binary_io.hpp"
#include "findret/error.hpp"

namespace findret {

namespace detail {

inline bool is_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return c >= '0' && c <= '9'; });
}

inline bool is_alnum_ascii(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

inline char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

// Numeric components compare by value, everything else lexicographically;
// numbers sort before letters so 92 < 182 < 182a.
inline std::strong_ordering compare_component(std::string_view a, std::string_view b) {
  const bool na = is_digits(a);
  const bool nb = is_digits(b);
  if (na && nb) {
    const auto trim = [](std::string_view s) {
      const auto p = s.find_first_not_of('0');
      return p == std::string_view::npos ? std::string_view("0") : s.substr(p);
    };
    const auto ta = trim(a);
    const auto tb = trim(b);
    if (ta.size() != tb.size()) return ta.size() <=> tb.size();
    if (const auto c = ta.compare(tb); c != 0) return c <=> 0;
    return a.compare(b) <=> 0;
  }
  if (na != nb) return na ? std::strong_ordering::less : std::strong_ordering::greater;
  return a.compare(b) <=> 0;
}

}  // namespace detail

/// A reference to a CRR article, paragraph or point, e.g. 182(1)(f) with path
/// [182, 1, f]. The first component is always the numeric article number.
class CrrRef {
 public:
  CrrRef() = default;

  /// Builds a reference from raw path components. Throws ParseError when the
  /// path is empty, the article is not numeric or a component is not
  /// alphanumeric.
  explicit CrrRef(std::vector<std::string> path) : path_(std::move(path)) {
    if (path_.empty()) throw ParseError("CRR reference has an empty path");
    if (!detail::is_digits(path_.front())) {
      throw ParseError("CRR article number is not numeric: '" + path_.front() + "'");
    }
    for (auto& part : path_) {
      if (part.empty()) throw ParseError("CRR reference has an empty component");
      for (auto& c : part) {
        if (!detail::is_alnum_ascii(static_cast<unsigned char>(c))) {
          throw ParseError("CRR reference component is not alphanumeric: '" + part + "'");
        }
        c = detail::ascii_lower(c);
      }
    }
  }

  /// Parses the canonical textual form: an article number followed by zero or
  /// more parenthesised parts, e.g. "182(1)(f)" or "92". Whitespace between
  /// parts is tolerated.
  static CrrRef parse(std::string_view s) {
    const auto fail = [&](const std::string& why) -> ParseError {
      return ParseError("invalid CRR reference '" + std::string(s) + "': " + why);
    };
    std::size_t i = 0;
    const auto skip_ws = [&] {
      while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    };
    skip_ws();
    const std::size_t start = i;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
    if (i == start) throw fail("article number must be numeric");
    std::vector<std::string> path{std::string(s.substr(start, i - start))};
    for (;;) {
      skip_ws();
      if (i == s.size()) break;
      if (s[i] != '(') throw fail("unexpected character '" + std::string(1, s[i]) + "'");
      ++i;
      skip_ws();
      const std::size_t part_start = i;
      while (i < s.size() && detail::is_alnum_ascii(static_cast<unsigned char>(s[i]))) ++i;
      const std::size_t part_end = i;
      skip_ws();
      if (i == s.size() || s[i] != ')') throw fail("unterminated or malformed parenthetical");
      if (part_end == part_start) throw fail("empty parenthetical");
      path.emplace_back(s.substr(part_start, part_end - part_start));
      ++i;
    }
    return CrrRef(std::move(path));
  }

  /// Parses the atomic token form produced by the tokenizer, e.g. CRR_182_1_f.
  static CrrRef from_token(std::string_view token) {
    constexpr std::string_view prefix = "CRR_";
    if (!token.starts_with(prefix)) throw ParseError("not a CRR token: '" + std::string(token) + "'");
    std::vector<std::string> path;
    std::string_view rest = token.substr(prefix.size());
    for (;;) {
      const auto p = rest.find('_');
      path.emplace_back(rest.substr(0, p));
      if (p == std::string_view::npos) break;
      rest = rest.substr(p + 1);
    }
    return CrrRef(std::move(path));
  }

  const std::vector<std::string>& path() const noexcept { return path_; }
  std::size_t depth() const noexcept { return path_.size(); }
  const std::string& article() const { return path_.front(); }

  std::string canonical() const {
    std::string out = path_.empty() ? std::string() : path_.front();
    for (std::size_t i = 1; i < path_.size(); ++i) out += "(" + path_[i] + ")";
    return out;
  }

  std::string token() const {
    std::string out = "CRR";
    for (const auto& p : path_) out += "_" + p;
    return out;
  }

  /// Prefix of length depth()-1; nullopt for articles, whose parent is the root.
  std::optional<CrrRef> parent() const {
    if (path_.size() <= 1) return std::nullopt;
    CrrRef p;
    p.path_.assign(path_.begin(), path_.end() - 1);
    return p;
  }

  /// Proper ancestors excluding the synthetic root, shallowest first.
  std::vector<CrrRef> ancestors() const {
    std::vector<CrrRef> out;
    for (std::size_t len = 1; len < path_.size(); ++len) {
      CrrRef a;
      a.path_.assign(path_.begin(), path_.begin() + static_cast<std::ptrdiff_t>(len));
      out.push_back(std::move(a));
    }
    return out;
  }

  friend bool operator==(const CrrRef&, const CrrRef&) = default;
  friend std::strong_ordering operator<=>(const CrrRef& a, const CrrRef& b) {
    const std::size_t n = std::min(a.path_.size(), b.path_.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (const auto c = detail::compare_component(a.path_[i], b.path_[i]); c != 0) return c;
    }
    return a.path_.size() <=> b.path_.size();
  }

 private:
  std::vector<std::string> path_;
};

inline CrrRef parse_crr_ref(std::string_view s) { return CrrRef::parse(s); }

/// Sorted, duplicate-free set of references.
using CrrRefSet = std::vector<CrrRef>;

inline CrrRefSet make_ref_set(std::vector<CrrRef> refs) {
  std::sort(refs.begin(), refs.end());
  refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
  return refs;
}

namespace detail {

template <class T>
std::size_t sorted_intersection_size(std::span<const T> a, std::span<const T> b) {
  std::size_t count = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

// |A ∩ B| / |A ∪ B| on sorted unique ranges, 0 when both are empty.
template <class T>
double sorted_jaccard(std::span<const T> a, std::span<const T> b) {
  const std::size_t inter = sorted_intersection_size(a, b);
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace detail

/// Union of the proper (non-root) ancestors of every reference in `refs`.
inline CrrRefSet ancestor_union(std::span<const CrrRef> refs) {
  std::vector<CrrRef> out;
  for (const auto& r : refs) {
    auto anc = r.ancestors();
    out.insert(out.end(), std::make_move_iterator(anc.begin()), std::make_move_iterator(anc.end()));
  }
  return make_ref_set(std::move(out));
}

/// Directed rooted tree of CRR articles. A reference's parent is its path
/// prefix; articles hang off a synthetic root that is never stored.
class CrrTree {
 public:
  CrrTree() = default;

  /// Inserts the reference together with all of its ancestors.
  void add(const CrrRef& ref) {
    nodes_.insert(ref);
    for (auto& a : ref.ancestors()) nodes_.insert(std::move(a));
  }

  template <class Range>
  void add_all(const Range& refs) {
    for (const auto& r : refs) add(r);
  }

  bool contains(const CrrRef& ref) const { return nodes_.contains(ref); }
  std::size_t size() const noexcept { return nodes_.size(); }
  const std::set<CrrRef>& nodes() const noexcept { return nodes_; }

  std::optional<CrrRef> parent(const CrrRef& ref) const {
    require(ref);
    return ref.parent();
  }

  /// P(x): proper ancestors of `ref`, root excluded.
  CrrRefSet ancestors(const CrrRef& ref) const {
    require(ref);
    return make_ref_set(ref.ancestors());
  }

  void require(const CrrRef& ref) const {
    if (!contains(ref)) throw ValidationError("CRR reference not in tree: " + ref.canonical());
  }

  /// Reads an article list: one canonical reference per line, blank lines and
  /// lines starting with '#' skipped.
  static CrrTree load_article_list(const std::string& path) {
    auto in = detail::open_input(path);
    CrrTree tree;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == '#') continue;
      try {
        tree.add(CrrRef::parse(line));
      } catch (const ParseError& e) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    return tree;
  }

  void write_article_list(const std::string& path) const {
    auto out = detail::open_output(path);
    for (const auto& n : nodes_) out << n.canonical() << '\n';
    if (!out) throw IoError("failed writing " + path);
  }

 private:
  std::set<CrrRef> nodes_;
};

/// J(A, B) = |A ∩ B| / |A ∪ B| over canonical references; J(∅, ∅) = 0.
inline double jaccard(std::span<const CrrRef> a, std::span<const CrrRef> b) {
  if (std::is_sorted(a.begin(), a.end()) && std::is_sorted(b.begin(), b.end()) &&
      std::adjacent_find(a.begin(), a.end()) == a.end() && std::adjacent_find(b.begin(), b.end()) == b.end()) {
    return detail::sorted_jaccard<CrrRef>(a, b);
  }
  const auto sa = make_ref_set({a.begin(), a.end()});
  const auto sb = make_ref_set({b.begin(), b.end()});
  return detail::sorted_jaccard<CrrRef>(sa, sb);
}

/// Node-level H(x, y) = |P(x) ∩ P(y)| / |P(x) ∪ P(y)|. Identical nodes score 1;
/// otherwise two empty ancestor sets score 0.
inline double hierarchical_sim(const CrrRef& x, const CrrRef& y, const CrrTree& tree) {
  const auto px = tree.ancestors(x);
  const auto py = tree.ancestors(y);
  if (x == y) return 1.0;
  return detail::sorted_jaccard<CrrRef>(px, py);
}

namespace detail {

// Set-level H from precomputed ancestor unions.
inline double hierarchical_from_ancestors(std::span<const CrrRef> a, std::span<const CrrRef> anc_a,
                                          std::span<const CrrRef> b, std::span<const CrrRef> anc_b) {
  if (!a.empty() && std::equal(a.begin(), a.end(), b.begin(), b.end())) return 1.0;
  return sorted_jaccard<CrrRef>(anc_a, anc_b);
}

}  // namespace detail

/// Finding-level H(A, B): Jaccard between the unions of the non-root ancestor
/// sets of the references in A and in B. Identical non-empty sets score 1;
/// otherwise empty ancestor unions score 0. Every reference must be in `tree`.
inline double hierarchical_sim(std::span<const CrrRef> a, std::span<const CrrRef> b, const CrrTree& tree) {
  for (const auto& r : a) tree.require(r);
  for (const auto& r : b) tree.require(r);
  const auto sa = make_ref_set({a.begin(), a.end()});
  const auto sb = make_ref_set({b.begin(), b.end()});
  return detail::hierarchical_from_ancestors(sa, ancestor_union(sa), sb, ancestor_union(sb));
}

}  // namespace findret
