#include "tskip/arch.hpp"

#include <cmath>
#include <sstream>

#include "tskip/error.hpp"
#include "tskip/ops.hpp"

namespace tskip {

std::string to_string(LayerKind kind) { return kind == LayerKind::Dense ? "dense" : "conv2d"; }

std::string to_string(Activation act) {
  switch (act) {
    case Activation::Lif: return "lif";
    case Activation::Relu: return "relu";
    case Activation::Integrator: return "integrator";
    case Activation::Linear: return "linear";
  }
  return "?";
}

std::string to_string(Merge merge) { return merge == Merge::Concat ? "concat" : "add"; }
std::string to_string(ResetMode reset) { return reset == ResetMode::Soft ? "soft" : "hard"; }

std::string describe(const TSkipEdge& e) {
  std::ostringstream os;
  os << (e.is_backward() ? "backward" : "forward") << " tskip " << e.origin << "->" << e.destination
     << " (dt=" << e.delta_t << ", " << to_string(e.merge) << ")";
  return os.str();
}

namespace {

Shape flattened(const Shape& s) { return {numel(s)}; }

}  // namespace

Shape node_shape(const ArchSpec& spec, const std::vector<LayerGeometry>& geo, std::size_t n) {
  return n == 0 ? spec.input_shape : geo.at(n - 1).out_shape;
}

std::vector<LayerGeometry> infer_geometry(const ArchSpec& spec) {
  if (spec.input_shape.empty()) throw ValidationError("input shape is empty");
  for (auto d : spec.input_shape)
    if (d == 0) throw ValidationError("input shape has a zero dimension");
  std::vector<LayerGeometry> geo(spec.depth());
  for (std::size_t k = 0; k < spec.tskips.size(); ++k) {
    const auto& e = spec.tskips[k];
    if (e.destination >= 1 && e.destination <= spec.depth()) geo[e.destination - 1].incoming.push_back(k);
  }
  for (std::size_t i = 0; i < spec.depth(); ++i) {
    const LayerSpec& L = spec.layers[i];
    LayerGeometry& g = geo[i];
    const Shape prev = i == 0 ? spec.input_shape : geo[i - 1].out_shape;
    if (L.kind == LayerKind::Dense) {
      g.ff_shape = flattened(prev);
    } else {
      if (prev.size() != 3)
        throw ValidationError("layer " + std::to_string(i + 1) + ": conv2d needs a [C,H,W] input, got " +
                              to_string(prev));
      g.ff_shape = prev;
    }
    g.in_shape = g.ff_shape;
    for (std::size_t k : g.incoming) {
      const auto& e = spec.tskips[k];
      if (e.origin > spec.depth()) continue;
      // Backward edges read layers that come later; their shapes are only known
      // after a first pass, so resolve them lazily below.
      if (e.origin >= i + 1) continue;
      Shape payload = node_shape(spec, geo, e.origin);
      if (L.kind == LayerKind::Dense) payload = flattened(payload);
      if (payload.size() != g.ff_shape.size() ||
          !std::equal(payload.begin() + 1, payload.end(), g.ff_shape.begin() + 1))
        throw ValidationError("shape mismatch at " + describe(e) + ": payload " + to_string(payload) +
                              " vs layer input " + to_string(g.ff_shape));
      if (e.merge == Merge::Concat) g.in_shape[0] += g.ff_shape[0];
    }
    if (L.kind == LayerKind::Dense) {
      g.out_shape = {L.units};
      g.fan_in = g.in_shape[0];
    } else {
      g.out_shape = {L.units, same_output_size(g.in_shape[1], L.stride), same_output_size(g.in_shape[2], L.stride)};
      g.fan_in = g.in_shape[0] * L.kernel * L.kernel;
    }
    g.neurons = numel(g.out_shape);
  }
  // Backward edges: origin shapes are now known and do not depend on the merge
  // (a layer's output shape depends only on units/stride and spatial input).
  for (std::size_t i = 0; i < spec.depth(); ++i) {
    LayerGeometry& g = geo[i];
    const LayerSpec& L = spec.layers[i];
    for (std::size_t k : g.incoming) {
      const auto& e = spec.tskips[k];
      if (e.origin > spec.depth() || e.origin <= i + 1) continue;
      Shape payload = node_shape(spec, geo, e.origin);
      if (L.kind == LayerKind::Dense) payload = flattened(payload);
      if (payload.size() != g.ff_shape.size() ||
          !std::equal(payload.begin() + 1, payload.end(), g.ff_shape.begin() + 1))
        throw ValidationError("shape mismatch at " + describe(e) + ": payload " + to_string(payload) +
                              " vs layer input " + to_string(g.ff_shape));
      if (e.merge == Merge::Concat) {
        g.in_shape[0] += g.ff_shape[0];
        g.fan_in = L.kind == LayerKind::Dense ? g.in_shape[0] : g.in_shape[0] * L.kernel * L.kernel;
      }
    }
  }
  return geo;
}

std::vector<Violation> validate(const ArchSpec& spec) {
  using C = Violation::Code;
  std::vector<Violation> out;
  if (spec.layers.empty()) out.push_back({C::EmptyNetwork, -1, "network has no layers"});
  if (spec.T < 1) out.push_back({C::BadSequenceLength, -1, "sequence length T must be >= 1"});
  if (spec.input_shape.empty() || numel(spec.input_shape) == 0 || spec.input_shape.size() == 2 ||
      spec.input_shape.size() > 3)
    out.push_back({C::BadLayer, 0, "input shape must be [features] or [C,H,W], got " + to_string(spec.input_shape)});

  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& L = spec.layers[i];
    const auto where = static_cast<std::ptrdiff_t>(i + 1);
    const std::string name = "layer " + std::to_string(i + 1);
    if (L.units == 0) out.push_back({C::BadLayer, where, name + ": units must be positive"});
    if (L.kind == LayerKind::Conv2d && (L.kernel == 0 || L.stride == 0))
      out.push_back({C::BadLayer, where, name + ": kernel and stride must be positive"});
    if (L.activation == Activation::Lif || L.activation == Activation::Integrator) {
      if (!(L.lif.leak > 0.0 && L.lif.leak < 1.0))
        out.push_back({C::BadLayer, where, name + ": leak must lie in (0,1)"});
      if (L.activation == Activation::Lif && !(L.lif.threshold > 0.0))
        out.push_back({C::BadLayer, where, name + ": threshold must be positive"});
    }
  }

  const std::size_t depth = spec.layers.size();
  for (std::size_t k = 0; k < spec.tskips.size(); ++k) {
    const auto& e = spec.tskips[k];
    const auto where = static_cast<std::ptrdiff_t>(k);
    const std::string name = "edge " + std::to_string(k) + " (" + describe(e) + ")";
    if (e.origin > depth || e.destination < 1 || e.destination > depth)
      out.push_back({C::BadEdgeIndex, where, name + ": layer index outside [0, " + std::to_string(depth) + "]"});
    if (e.origin == e.destination) out.push_back({C::SameLayer, where, name + ": origin equals destination"});
    if (e.is_backward() && e.delta_t == 0)
      out.push_back({C::SameStepCycle, where, name + ": same-step cycle (backward edge needs delta_t >= 1)"});
    if (e.delta_t >= spec.T)
      out.push_back({C::DelayTooLong, where, name + ": delay exceeds sequence length (T=" + std::to_string(spec.T) + ")"});
    if (!std::isfinite(e.alpha_raw)) out.push_back({C::BadEdgeIndex, where, name + ": alpha_raw is not finite"});
  }

  if (out.empty()) {
    try {
      (void)infer_geometry(spec);
    } catch (const ValidationError& err) {
      std::ptrdiff_t where = -1;
      for (std::size_t k = 0; k < spec.tskips.size(); ++k)
        if (std::string(err.what()).find(describe(spec.tskips[k])) != std::string::npos) where = static_cast<std::ptrdiff_t>(k);
      out.push_back({C::ShapeMismatch, where, err.what()});
    }
  }
  return out;
}

void require_valid(const ArchSpec& spec) {
  const auto v = validate(spec);
  if (v.empty()) return;
  std::string msg = "invalid architecture:";
  for (const auto& x : v) msg += "\n  - " + x.message;
  throw ValidationError(msg);
}

std::size_t param_count(const ArchSpec& spec) {
  require_valid(spec);
  const auto geo = infer_geometry(spec);
  std::size_t total = 0;
  for (std::size_t i = 0; i < spec.depth(); ++i) {
    const auto& L = spec.layers[i];
    const auto& g = geo[i];
    total += g.fan_in * L.units;
    if (L.bias) total += L.units;
    if (L.bntt && i + 1 < spec.depth()) total += 2 * L.units * spec.T;
    if (L.lif.learnable) {
      if (L.activation == Activation::Lif) total += 2;
      if (L.activation == Activation::Integrator) total += 1;
    }
  }
  for (const auto& e : spec.tskips)
    if (e.alpha_enabled) total += 1;
  return total;
}

}  // namespace tskip
