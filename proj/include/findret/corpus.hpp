#pragma once

// Findings, measures and the immutable corpus they live in.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "findret/crr.hpp"
#include "findret/detail/binary_io.hpp"
#include "findret/error.hpp"

namespace findret {

/// One historical finding: the document unit of the corpus.
struct Finding {
  std::string id;
  std::string text;
  CrrRefSet crr_refs;                  // sorted, unique
  std::vector<std::string> measure_ids;  // sorted, unique; may be empty
  std::optional<int> year;

  friend bool operator==(const Finding&, const Finding&) = default;
};

struct Measure {
  std::string id;
  std::string text;

  friend bool operator==(const Measure&, const Measure&) = default;
};

namespace detail {

inline std::vector<std::string> sorted_unique(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline const nlohmann::json& require_key(const nlohmann::json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing key '") + key + "'");
  return *it;
}

inline std::string require_string(const nlohmann::json& obj, const char* key) {
  const auto& v = require_key(obj, key);
  if (!v.is_string()) throw ParseError(std::string("key '") + key + "' must be a string");
  return v.get<std::string>();
}

inline std::vector<std::string> optional_string_array(const nlohmann::json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_array()) throw ParseError(std::string("key '") + key + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : *it) {
    if (!e.is_string()) throw ParseError(std::string("key '") + key + "' must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

// Calls fn(json, line_no) for each non-blank line; wraps parse failures with
// the file name and line number.
template <class Fn>
void for_each_jsonl(const std::string& path, Fn&& fn) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (!j.is_object()) throw ParseError("line is not a JSON object");
      fn(j, line_no);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": malformed JSON: " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace detail

/// Decodes one corpus line. Duplicate CRR references are rejected.
inline Finding finding_from_json(const nlohmann::json& j) {
  Finding f;
  f.id = detail::require_string(j, "id");
  f.text = detail::require_string(j, "text");
  std::vector<CrrRef> refs;
  for (const auto& s : detail::optional_string_array(j, "crr_refs")) refs.push_back(CrrRef::parse(s));
  f.crr_refs = make_ref_set(refs);
  if (f.crr_refs.size() != refs.size()) throw ParseError("finding '" + f.id + "' lists a CRR reference twice");
  f.measure_ids = detail::sorted_unique(detail::optional_string_array(j, "measure_ids"));
  if (const auto it = j.find("year"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw ParseError("key 'year' must be an integer");
    f.year = it->get<int>();
  }
  return f;
}

inline nlohmann::ordered_json finding_to_json(const Finding& f) {
  nlohmann::ordered_json j;
  j["id"] = f.id;
  j["text"] = f.text;
  auto refs = nlohmann::ordered_json::array();
  for (const auto& r : f.crr_refs) refs.push_back(r.canonical());
  j["crr_refs"] = std::move(refs);
  j["measure_ids"] = f.measure_ids;
  if (f.year) j["year"] = *f.year;
  return j;
}

/// Immutable, validated collection of findings sorted by id, so positions are
/// stable across runs.
class Corpus {
 public:
  Corpus() = default;

  /// Validates and sorts. Throws ValidationError on an empty corpus, a
  /// duplicate id or an empty text.
  explicit Corpus(std::vector<Finding> findings) : findings_(std::move(findings)) {
    if (findings_.empty()) throw ValidationError("corpus must contain at least one finding");
    std::sort(findings_.begin(), findings_.end(), [](const Finding& a, const Finding& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < findings_.size(); ++i) {
      const auto& f = findings_[i];
      if (f.id.empty()) throw ValidationError("finding with empty id");
      if (f.text.empty()) throw ValidationError("finding '" + f.id + "' has empty text");
      if (i > 0 && findings_[i - 1].id == f.id) throw ValidationError("duplicate finding id '" + f.id + "'");
      index_by_id_.emplace(f.id, i);
    }
  }

  std::size_t size() const noexcept { return findings_.size(); }
  const Finding& operator[](std::size_t pos) const { return findings_[pos]; }
  const Finding& at(std::size_t pos) const { return findings_.at(pos); }
  std::span<const Finding> findings() const noexcept { return findings_; }
  auto begin() const noexcept { return findings_.begin(); }
  auto end() const noexcept { return findings_.end(); }

  std::optional<std::size_t> position(std::string_view id) const {
    const auto it = index_by_id_.find(std::string(id));
    if (it == index_by_id_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t require_position(std::string_view id) const {
    if (auto p = position(id)) return *p;
    throw ValidationError("unknown finding id '" + std::string(id) + "'");
  }

  std::vector<std::string> ids() const {
    std::vector<std::string> out;
    out.reserve(findings_.size());
    for (const auto& f : findings_) out.push_back(f.id);
    return out;
  }

  /// Article tree spanning every reference observed in the corpus.
  CrrTree crr_tree() const {
    CrrTree tree;
    for (const auto& f : findings_) tree.add_all(f.crr_refs);
    return tree;
  }

  friend bool operator==(const Corpus& a, const Corpus& b) { return a.findings_ == b.findings_; }

 private:
  std::vector<Finding> findings_;
  std::unordered_map<std::string, std::size_t> index_by_id_;
};

/// Reads a JSONL corpus file. Malformed lines are reported with their line
/// number; duplicate ids are reported by id with both line numbers.
inline Corpus load_corpus(const std::string& path) {
  std::vector<Finding> findings;
  std::unordered_map<std::string, std::size_t> seen;
  detail::for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t line_no) {
    auto f = finding_from_json(j);
    if (const auto [it, inserted] = seen.emplace(f.id, line_no); !inserted) {
      throw ValidationError(path + ": duplicate finding id '" + f.id + "' on lines " + std::to_string(it->second) +
                            " and " + std::to_string(line_no));
    }
    if (f.text.empty()) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": finding '" + f.id + "' has empty text");
    }
    findings.push_back(std::move(f));
  });
  if (findings.empty()) throw ValidationError(path + ": corpus file contains no findings");
  return Corpus(std::move(findings));
}

inline void write_corpus(const Corpus& corpus, const std::string& path) {
  auto out = detail::open_output(path);
  for (const auto& f : corpus) out << finding_to_json(f).dump() << '\n';
  if (!out) throw IoError("failed writing " + path);
}

/// Reads a JSONL measures file (`id`, `text`), sorted by id.
inline std::vector<Measure> load_measures(const std::string& path) {
  std::vector<Measure> measures;
  std::set<std::string> seen;
  detail::for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t line_no) {
    Measure m{detail::require_string(j, "id"), detail::require_string(j, "text")};
    if (!seen.insert(m.id).second) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": duplicate measure id '" + m.id + "'");
    }
    measures.push_back(std::move(m));
  });
  std::sort(measures.begin(), measures.end(), [](const Measure& a, const Measure& b) { return a.id < b.id; });
  return measures;
}

inline void write_measures(std::span<const Measure> measures, const std::string& path) {
  auto out = detail::open_output(path);
  for (const auto& m : measures) {
    nlohmann::ordered_json j;
    j["id"] = m.id;
    j["text"] = m.text;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

/// Checks that every measure id referenced by a finding resolves.
inline void validate_measure_links(const Corpus& corpus, std::span<const Measure> measures) {
  std::set<std::string_view> known;
  for (const auto& m : measures) known.insert(m.id);
  for (const auto& f : corpus) {
    for (const auto& mid : f.measure_ids) {
      if (!known.contains(mid)) {
        throw ValidationError("finding '" + f.id + "' references unknown measure '" + mid + "'");
      }
    }
  }
}

}  // namespace findret
