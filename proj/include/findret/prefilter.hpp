#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "findret/corpus.hpp"
#include "findret/crr.hpp"
#include "findret/error.hpp"

namespace findret {

struct PrefilterConfig {
  double jaccard_min = 1.0 / 3.0;
  double hier_min = 1.0 / 3.0;
  bool fallback_on_empty = true;

  void validate() const {
    if (!(jaccard_min >= 0.0 && jaccard_min <= 1.0)) throw ValidationError("jaccard threshold must lie in [0, 1]");
    if (!(hier_min >= 0.0 && hier_min <= 1.0)) throw ValidationError("hierarchical threshold must lie in [0, 1]");
  }
};

struct PrefilterResult {
  std::vector<std::size_t> positions;  // ascending
  bool fell_back = false;              // filter matched nothing, universe returned
};

/// Caches each finding's reference set and ancestor union so that repeated
/// prefilter calls only pay for the query side.
class CrrMatcher {
 public:
  CrrMatcher() = default;

  explicit CrrMatcher(const Corpus& corpus) {
    refs_.reserve(corpus.size());
    ancestors_.reserve(corpus.size());
    for (const auto& f : corpus) {
      refs_.push_back(f.crr_refs);
      ancestors_.push_back(ancestor_union(f.crr_refs));
    }
  }

  std::size_t size() const noexcept { return refs_.size(); }

  double jaccard_at(std::span<const CrrRef> query, std::size_t pos) const {
    return detail::sorted_jaccard<CrrRef>(query, refs_[pos]);
  }

  /// Keeps positions in `universe` (all positions when empty optional) whose
  /// J and H against `query_refs` reach both thresholds. When nothing passes
  /// and fallback is enabled, the whole universe is returned.
  PrefilterResult filter(std::span<const CrrRef> query_refs, const PrefilterConfig& cfg,
                         std::optional<std::span<const std::size_t>> universe = std::nullopt) const {
    cfg.validate();
    const auto query = make_ref_set({query_refs.begin(), query_refs.end()});
    const auto query_anc = ancestor_union(query);
    PrefilterResult out;
    const auto consider = [&](std::size_t pos) {
      if (detail::sorted_jaccard<CrrRef>(query, refs_[pos]) < cfg.jaccard_min) return;
      if (detail::hierarchical_from_ancestors(query, query_anc, refs_[pos], ancestors_[pos]) < cfg.hier_min) return;
      out.positions.push_back(pos);
    };
    if (universe) {
      for (auto pos : *universe) consider(pos);
    } else {
      for (std::size_t pos = 0; pos < refs_.size(); ++pos) consider(pos);
    }
    if (out.positions.empty() && cfg.fallback_on_empty) {
      out.fell_back = true;
      if (universe) {
        out.positions.assign(universe->begin(), universe->end());
      } else {
        out.positions.resize(refs_.size());
        for (std::size_t i = 0; i < refs_.size(); ++i) out.positions[i] = i;
      }
    }
    std::sort(out.positions.begin(), out.positions.end());
    return out;
  }

 private:
  std::vector<CrrRefSet> refs_;
  std::vector<CrrRefSet> ancestors_;
};

/// Corpus positions whose CRR references pass both the Jaccard and the
/// hierarchical threshold against the query finding. Query references need
/// not be in `tree`; corpus references must be.
inline PrefilterResult prefilter(const Finding& query, const Corpus& corpus, const CrrTree& tree,
                                 const PrefilterConfig& cfg) {
  for (const auto& f : corpus) {
    for (const auto& r : f.crr_refs) tree.require(r);
  }
  return CrrMatcher(corpus).filter(query.crr_refs, cfg);
}

}  // namespace findret
