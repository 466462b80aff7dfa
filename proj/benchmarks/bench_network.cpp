#include <benchmark/benchmark.h>

#include "tskip/arch_io.hpp"
#include "tskip/network.hpp"
#include "tskip/rng.hpp"

using namespace tskip;

namespace {

ArchSpec mlp(std::size_t delta_t) {
  ArchSpec s = parse_arch(R"({"input": "11", "T": 99, "layers": ["d64", "d64", "d64", "d10/int"], "tskips": []})");
  for (auto& L : s.layers) {
    L.bntt = false;
    L.lif.threshold = 1.0;
  }
  if (delta_t > 0) s.tskips = {{0, 1, delta_t, Merge::Concat}};
  return s;
}

Tensor spikes(const ArchSpec& s, std::size_t batch) {
  Rng rng(7);
  Tensor x({s.T, batch, s.input_shape.at(0)});
  for (auto& v : x.data()) v = bernoulli(rng, 0.1) ? 1.0 : 0.0;
  return x;
}

void BM_RunForward(benchmark::State& state) {
  const ArchSpec s = mlp(static_cast<std::size_t>(state.range(0)));
  Network net(s, 1);
  const Tensor x = spikes(s, 32);
  for (auto _ : state) {
    Tape tape;
    benchmark::DoNotOptimize(run_forward(net, tape, x).outputs.back());
  }
}
BENCHMARK(BM_RunForward)->Arg(0)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
  const ArchSpec s = mlp(static_cast<std::size_t>(state.range(0)));
  Network net(s, 1);
  const Tensor x = spikes(s, 32);
  ForwardOptions opts;
  opts.mode = RunMode::Train;
  for (auto _ : state) {
    Tape tape;
    const auto fwd = run_forward(net, tape, x, opts);
    benchmark::DoNotOptimize(backward(tape, sum(tape, accumulate_readout(tape, fwd))));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(0)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace
