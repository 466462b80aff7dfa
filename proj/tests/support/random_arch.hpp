#pragma once

// Random small architectures for property tests.

#include <algorithm>

#include "tskip/arch.hpp"
#include "tskip/rng.hpp"

namespace tskip::testing {

struct RandomArchOptions {
  std::size_t max_T = 5;
  std::size_t max_depth = 4;
  std::size_t max_edges = 3;
  bool conv = true;
  bool bntt = true;
  bool alpha = true;
  bool relu = false;
};

/// Valid random spec with dense or conv layers, TSkips in both directions,
/// soft/hard reset and an integrator or LIF readout.
inline ArchSpec random_arch(Rng& rng, const RandomArchOptions& o = {}) {
  for (;;) {
    ArchSpec s;
    s.T = static_cast<std::size_t>(uniform_int(rng, 1, static_cast<std::int64_t>(o.max_T)));
    const bool conv = o.conv && bernoulli(rng, 0.5);
    s.input_shape = conv ? Shape{2, 4, 4} : Shape{static_cast<std::size_t>(uniform_int(rng, 2, 5))};
    const auto depth = static_cast<std::size_t>(uniform_int(rng, 1, static_cast<std::int64_t>(o.max_depth)));
    for (std::size_t i = 0; i < depth; ++i) {
      LayerSpec L;
      const bool last = i + 1 == depth;
      if (conv && (!last || bernoulli(rng, 0.5))) {
        L.kind = LayerKind::Conv2d;
        L.units = static_cast<std::size_t>(uniform_int(rng, 1, 3));
        L.kernel = bernoulli(rng, 0.5) ? 1 : 3;
        L.stride = bernoulli(rng, 0.8) ? 1 : 2;
      } else {
        L.units = static_cast<std::size_t>(uniform_int(rng, 1, 4));
      }
      L.activation = Activation::Lif;
      if (o.relu && bernoulli(rng, 0.2)) L.activation = Activation::Relu;
      if (last && bernoulli(rng, 0.5)) L.activation = Activation::Integrator;
      L.bias = bernoulli(rng, 0.7);
      L.bntt = o.bntt && bernoulli(rng, 0.5);
      L.lif.leak = 0.3 + 0.6 * uniform01(rng);
      L.lif.threshold = 0.5 + uniform01(rng);
      L.lif.reset = bernoulli(rng, 0.5) ? ResetMode::Soft : ResetMode::Hard;
      s.layers.push_back(L);
    }
    const auto n_edges = uniform_int(rng, 0, static_cast<std::int64_t>(o.max_edges));
    for (std::int64_t k = 0; k < n_edges; ++k) {
      TSkipEdge e;
      e.origin = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(depth)));
      e.destination = static_cast<std::size_t>(uniform_int(rng, 1, static_cast<std::int64_t>(depth)));
      if (e.origin == e.destination) continue;
      const std::int64_t lo = e.is_backward() ? 1 : 0;
      if (lo > static_cast<std::int64_t>(s.T) - 1) continue;
      e.delta_t = static_cast<std::size_t>(uniform_int(rng, lo, static_cast<std::int64_t>(s.T) - 1));
      e.merge = bernoulli(rng, 0.5) ? Merge::Concat : Merge::Add;
      e.alpha_enabled = o.alpha && bernoulli(rng, 0.3);
      e.alpha_raw = e.alpha_enabled ? 2.0 * uniform01(rng) - 1.0 : 0.0;
      s.tskips.push_back(e);
    }
    if (validate(s).empty()) return s;
  }
}

/// Random binary spike input [T, batch, ...sample shape].
inline Tensor random_spikes(const ArchSpec& spec, std::size_t batch, Rng& rng, double rate = 0.4) {
  Shape shape{spec.T, batch};
  shape.insert(shape.end(), spec.input_shape.begin(), spec.input_shape.end());
  Tensor x(shape);
  for (auto& v : x.data()) v = bernoulli(rng, rate) ? 1.0 : 0.0;
  return x;
}

}  // namespace tskip::testing
