#pragma once

// Upper-bound simulation for the down-sampling validation. An artificial
// database has a known relevant set G = Ĝ ∪ G̃ for a test finding t that is
// not itself in the database; only Ĝ counts as relevant when scoring.
//
//   omega1  perfect system that ranks G̃ first, then Ĝ, then the rest shuffled
//   omega2  draws the ranking by weighted sampling without replacement, members
//           of G weighted bias_weights.first relative to everything else
//   omega3  same with the smaller bias_weights.second

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "findret/detail/rng.hpp"
#include "findret/error.hpp"
#include "findret/eval.hpp"
#include "findret/parallel.hpp"

namespace findret {

enum class SimSystem { Omega1 = 1, Omega2 = 2, Omega3 = 3 };

inline std::string_view to_string(SimSystem s) {
  switch (s) {
    case SimSystem::Omega1: return "omega1";
    case SimSystem::Omega2: return "omega2";
    case SimSystem::Omega3: return "omega3";
  }
  return "unknown";
}

struct SimSpec {
  std::size_t db_size = 7000;
  std::size_t g_hat = 3;
  std::vector<std::size_t> g_tilde = {5, 10, 15, 20};
  std::size_t mc_runs = 200;
  std::pair<double, double> bias_weights{10.0, 3.0};  // omega2, omega3

  void validate() const {
    if (g_hat < 1) throw ValidationError("|Ĝ| must be at least 1");
    if (g_tilde.empty()) throw ValidationError("at least one |G̃| value is required");
    for (auto g : g_tilde) {
      if (g_hat + g >= db_size) throw ValidationError("|Ĝ| + |G̃| must be smaller than the database size");
    }
    if (mc_runs < 1) throw ValidationError("mc_runs must be at least 1");
    const auto [w2, w3] = bias_weights;
    if (!(w2 > w3 && w3 > 1.0)) throw ValidationError("bias weights must satisfy omega2 > omega3 > 1");
  }
};

struct SimRow {
  SimSystem system = SimSystem::Omega1;
  std::size_t g_tilde = 0;
  double map = 0.0;  // mean over runs of the per-run mean over repetitions
  double mrr = 0.0;
  double map_se = 0.0;  // standard error across runs
  double mrr_se = 0.0;
  std::size_t runs = 0;
};

/// Ranks a down-sampled database for one simulated system. Positions
/// [0, g_hat) are Ĝ, [g_hat, g_hat + g_tilde) are G̃, the rest are non-relevant.
class SimulatedRanker {
 public:
  SimulatedRanker(SimSystem system, std::size_t g_hat, std::size_t g_tilde, std::pair<double, double> bias)
      : system_(system), g_hat_(g_hat), g_end_(g_hat + g_tilde), bias_(bias) {}

  bool in_g_tilde(std::size_t pos) const { return pos >= g_hat_ && pos < g_end_; }
  bool in_g(std::size_t pos) const { return pos < g_end_; }

  std::vector<std::size_t> operator()(std::span<const std::size_t> downsample, std::uint64_t seed) const {
    detail::Rng rng(seed);
    std::vector<std::size_t> out;
    out.reserve(downsample.size());
    if (system_ == SimSystem::Omega1) {
      std::vector<std::size_t> rest;
      for (auto p : downsample) {
        if (in_g_tilde(p)) out.push_back(p);
      }
      for (auto p : downsample) {
        if (p < g_hat_) out.push_back(p);
      }
      for (auto p : downsample) {
        if (!in_g(p)) rest.push_back(p);
      }
      detail::shuffle(rest.begin(), rest.end(), rng);
      out.insert(out.end(), rest.begin(), rest.end());
      return out;
    }
    // Efraimidis-Spirakis: sorting by u^(1/w) descending is weighted sampling
    // without replacement.
    const double w = system_ == SimSystem::Omega2 ? bias_.first : bias_.second;
    std::vector<std::pair<double, std::size_t>> keyed;
    keyed.reserve(downsample.size());
    for (auto p : downsample) {
      const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
      keyed.emplace_back(std::log(u) / (in_g(p) ? w : 1.0), p);
    }
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (const auto& [_, p] : keyed) out.push_back(p);
    return out;
  }

 private:
  SimSystem system_;
  std::size_t g_hat_;
  std::size_t g_end_;
  std::pair<double, double> bias_;
};

/// Runs the down-sampling validation for each system and each |G̃| mc_runs
/// times and averages across runs. Run r of a given |G̃| draws the same
/// down-samples for every system.
inline std::vector<SimRow> simulate_bounds(const SimSpec& spec, const McConfig& mc, std::size_t threads = 1) {
  spec.validate();
  mc.validate();
  constexpr SimSystem systems[] = {SimSystem::Omega1, SimSystem::Omega2, SimSystem::Omega3};
  const std::size_t n_g = spec.g_tilde.size();
  const std::size_t n_jobs = n_g * spec.mc_runs;
  // results[job][system] = (map, mrr)
  std::vector<std::array<std::pair<double, double>, 3>> results(n_jobs);

  std::vector<std::size_t> identified(spec.g_hat);
  for (std::size_t i = 0; i < spec.g_hat; ++i) identified[i] = i;
  std::vector<std::size_t> pool(spec.db_size - spec.g_hat);
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = spec.g_hat + i;

  parallel_for(n_jobs, threads, [&](std::size_t job) {
    const std::size_t gi = job / spec.mc_runs;
    const std::size_t run = job % spec.mc_runs;
    McConfig run_mc = mc;
    run_mc.seed = detail::derive_seed(mc.seed, spec.g_tilde[gi], run);
    for (std::size_t s = 0; s < 3; ++s) {
      const SimulatedRanker ranker(systems[s], spec.g_hat, spec.g_tilde[gi], spec.bias_weights);
      const auto outcome = mc_validate(pool, identified, ranker, run_mc);
      results[job][s] = {outcome.map, outcome.mrr};
    }
  });

  std::vector<SimRow> rows;
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t gi = 0; gi < n_g; ++gi) {
      std::vector<double> maps;
      std::vector<double> mrrs;
      for (std::size_t run = 0; run < spec.mc_runs; ++run) {
        maps.push_back(results[gi * spec.mc_runs + run][s].first);
        mrrs.push_back(results[gi * spec.mc_runs + run][s].second);
      }
      const auto [map, map_sd] = detail::mean_and_std(maps);
      const auto [mrr, mrr_sd] = detail::mean_and_std(mrrs);
      const double root = std::sqrt(static_cast<double>(spec.mc_runs));
      rows.push_back(SimRow{systems[s], spec.g_tilde[gi], map, mrr, map_sd / root, mrr_sd / root, spec.mc_runs});
    }
  }
  return rows;
}

}  // namespace findret
