#include "tskip/nas.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "tskip/error.hpp"

namespace tskip {

SearchResult random_search(const SearchSpace& space, const Tensor& probe, const SearchConfig& cfg,
                           const Scorer& scorer) {
  const std::size_t total = cfg.n_candidates + cfg.planted.size();
  if (cfg.k == 0) throw Error("random_search: k must be positive");
  if (total < cfg.k) throw Error("random_search: fewer candidates than k");

  // Sampling is serial so the candidate list does not depend on threading.
  std::vector<ArchSpec> specs;
  specs.reserve(total);
  for (std::size_t i = 0; i < cfg.n_candidates; ++i) {
    Rng rng(derive_seed(cfg.seed, "sample", i));
    specs.push_back(sample(space, rng));
  }
  for (const auto& p : cfg.planted) specs.push_back(p);

  SearchResult r;
  r.all.resize(total);
  auto score_one = [&](std::size_t i) { r.all[i] = scorer.score(specs[i], probe, derive_seed(cfg.seed, "init", i)); };

  const std::size_t threads = std::max<std::size_t>(1, std::min(cfg.threads, total));
  if (threads == 1) {
    for (std::size_t i = 0; i < total; ++i) score_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i; (i = next.fetch_add(1)) < total;) score_one(i);
        } catch (...) {
          errors[w] = std::current_exception();
          next = total;
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r.all[a].score > r.all[b].score; });
  for (std::size_t i = 0; i < cfg.k; ++i) {
    r.top.push_back(r.all[order[i]]);
    r.top_index.push_back(order[i]);
  }
  return r;
}

double kendall_tau(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DimensionError("kendall_tau: lists differ in length");
  const std::size_t n = a.size();
  if (n < 2) throw DimensionError("kendall_tau: need at least two items");
  double concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double da = a[j] - a[i], db = b[j] - b[i];
      if (da == 0 && db == 0) continue;
      if (da == 0) {
        ++ties_a;
      } else if (db == 0) {
        ++ties_b;
      } else if ((da > 0) == (db > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  // tau-b: (C - D) / sqrt((n0 - n1)(n0 - n2)) where n1, n2 count pairs tied in a, b.
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  const double both = pairs - concordant - discordant - ties_a - ties_b;
  const double n1 = ties_a + both, n2 = ties_b + both;
  const double denom = std::sqrt((pairs - n1) * (pairs - n2));
  if (denom == 0.0) throw Error("kendall_tau: undefined for a constant list");
  return (concordant - discordant) / denom;
}

TSkipSpaceSize count_tskip_space(std::size_t n_layers, std::size_t n_delay_values) {
  if (n_layers < 1) throw Error("count_tskip_space: need at least one layer");
  TSkipSpaceSize s;
  const std::uint64_t nodes = n_layers + 1;
  s.edge_slots = nodes * (nodes - 1);
  s.annotated_slots = s.edge_slots * n_delay_values;
  s.total_configs = boost::multiprecision::cpp_int(1) << static_cast<unsigned>(s.annotated_slots);
  return s;
}

}  // namespace tskip
