#include <benchmark/benchmark.h>

#include "tskip/neuron.hpp"
#include "tskip/ops.hpp"
#include "tskip/rng.hpp"
#include "tskip/tape.hpp"

using namespace tskip;

namespace {

Tensor random_tensor(Shape shape, double spike_rate, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = spike_rate > 0 ? (bernoulli(rng, spike_rate) ? 1.0 : 0.0) : uniform01(rng) - 0.5;
  return t;
}

void BM_MatmulSpikes(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor x = random_tensor({32, n}, 0.1, 1), w = random_tensor({n, n}, 0.0, 2);
  for (auto _ : state) {
    Tape tape;
    benchmark::DoNotOptimize(tape.value(matmul(tape, tape.constant(x), tape.constant(w))));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 32 * n * n));
}
BENCHMARK(BM_MatmulSpikes)->Arg(64)->Arg(256)->Arg(512);

void BM_Conv2d(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const Tensor x = random_tensor({8, c, 32, 32}, 0.1, 3), k = random_tensor({c, c, 3, 3}, 0.0, 4);
  for (auto _ : state) {
    Tape tape;
    benchmark::DoNotOptimize(tape.value(conv2d(tape, tape.constant(x), tape.constant(k), 1)));
  }
}
BENCHMARK(BM_Conv2d)->Arg(8)->Arg(32);

void BM_LifStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor input = random_tensor({32, n}, 0.0, 5);
  for (auto _ : state) {
    Tape tape;
    LifState s = lif_initial_state(tape, {32, n});
    const Var in = tape.constant(input);
    for (int t = 0; t < 10; ++t) s = lif_step(tape, s, in, LifParams{0.6, 0.2}, SurrogateConfig{}).state;
    benchmark::DoNotOptimize(tape.value(s.membrane));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 10 * 32 * n));
}
BENCHMARK(BM_LifStep)->Arg(256)->Arg(4096);

}  // namespace
