#include <benchmark/benchmark.h>

#include "tskip/nas.hpp"
#include "tskip/rng.hpp"
#include "tskip/sahd.hpp"
#include "tskip/search_space.hpp"

using namespace tskip;

namespace {

Tensor probe(const SearchSpace& s, std::size_t batch) {
  Rng rng(3);
  Shape shape{s.T, batch};
  shape.insert(shape.end(), s.input_shape.begin(), s.input_shape.end());
  Tensor x(shape);
  for (auto& v : x.data()) v = bernoulli(rng, 0.1) ? 1.0 : 0.0;
  return x;
}

void BM_KernelLogdet(benchmark::State& state) {
  const auto B = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  Tensor codes({B, 2048});
  for (auto& v : codes.data()) v = bernoulli(rng, 0.2) ? 1.0 : 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(kernel_logdet(sahd_kernel({codes})));
}
BENCHMARK(BM_KernelLogdet)->Arg(16)->Arg(64);

void BM_SahdScoreShd(benchmark::State& state) {
  const SearchSpace s = preset("shd");
  Rng rng(2);
  const ArchSpec a = sample(s, rng);
  const Tensor x = probe(s, 16);
  for (auto _ : state) benchmark::DoNotOptimize(sahd_score(a, x, 5).score);
}
BENCHMARK(BM_SahdScoreShd)->Unit(benchmark::kMillisecond);

void BM_RandomSearchShd(benchmark::State& state) {
  const SearchSpace s = preset("shd");
  const Tensor x = probe(s, 8);
  SearchConfig cfg;
  cfg.n_candidates = 8;
  cfg.k = 3;
  cfg.threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(random_search(s, x, cfg).top.size());
}
BENCHMARK(BM_RandomSearchShd)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
