#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "tskip/sahd.hpp"
#include "tskip/search_space.hpp"

namespace tskip {

struct SearchConfig {
  std::size_t n_candidates = 100;
  std::size_t k = 5;
  std::uint64_t seed = 0;
  /// Worker threads; 1 runs serially.
  std::size_t threads = 1;
  /// Extra candidates scored alongside the sampled ones (weights seeded like
  /// the sampled candidates, by position).
  std::vector<ArchSpec> planted;
};

struct SearchResult {
  /// Top-k, best first; ties keep the lower candidate index first.
  std::vector<CandidateScore> top;
  /// Every candidate in sampling order (planted ones last).
  std::vector<CandidateScore> all;
  /// Candidate index of each entry of `top`.
  std::vector<std::size_t> top_index;
};

SearchResult random_search(const SearchSpace& space, const Tensor& probe, const SearchConfig& cfg,
                           const Scorer& scorer = SahdScorer());

/// Kendall tau-b. Throws on length mismatch, fewer than two items, or when
/// either list is constant.
double kendall_tau(const std::vector<double>& a, const std::vector<double>& b);

struct TSkipSpaceSize {
  std::uint64_t edge_slots = 0;
  std::uint64_t annotated_slots = 0;
  boost::multiprecision::cpp_int total_configs;
};

/// Ordered pairs of distinct graph nodes (input plus n_layers layers), each
/// annotated with one of n_delay_values delays, each present or absent.
TSkipSpaceSize count_tskip_space(std::size_t n_layers, std::size_t n_delay_values);

}  // namespace tskip
