#include "tskip/network.hpp"

#include <cmath>
#include <map>

#include "tskip/delay_buffer.hpp"
#include "tskip/error.hpp"
#include "tskip/neuron.hpp"
#include "tskip/rng.hpp"

namespace tskip {

Network::Network(ArchSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {
  require_valid(spec_);
  geometry_ = infer_geometry(spec_);
  Rng rng(derive_seed(seed_, "weights"));
  slots_.resize(spec_.depth());
  bn_stats_.resize(spec_.depth());

  auto add = [&](std::string name, Tensor value, bool trainable) {
    params_.push_back({std::move(name), std::move(value), trainable});
    return static_cast<std::ptrdiff_t>(params_.size() - 1);
  };

  for (std::size_t i = 0; i < spec_.depth(); ++i) {
    const LayerSpec& L = spec_.layers[i];
    const LayerGeometry& g = geometry_[i];
    const std::string prefix = "layer" + std::to_string(i + 1) + ".";
    LayerSlots& s = slots_[i];

    Shape wshape = L.kind == LayerKind::Dense ? Shape{g.in_shape[0], L.units}
                                              : Shape{L.units, g.in_shape[0], L.kernel, L.kernel};
    Tensor w(wshape);
    const double bound = std::sqrt(6.0 / static_cast<double>(g.fan_in));
    for (auto& v : w.data()) v = (2.0 * uniform01(rng) - 1.0) * bound;
    s.weight = add(prefix + "weight", std::move(w), true);
    if (L.bias) s.bias = add(prefix + "bias", Tensor({L.units}, 0.0), true);

    if (L.activation == Activation::Lif) {
      s.leak = add(prefix + "leak", Tensor::scalar(L.lif.leak), L.lif.learnable);
      s.threshold = add(prefix + "threshold", Tensor::scalar(L.lif.threshold), L.lif.learnable);
    } else if (L.activation == Activation::Integrator) {
      s.leak = add(prefix + "leak", Tensor::scalar(L.lif.leak), L.lif.learnable);
    }

    if (L.bntt && i + 1 < spec_.depth()) {
      for (std::size_t t = 0; t < spec_.T; ++t) {
        s.bn_gamma.push_back(static_cast<std::size_t>(add(prefix + "bn_gamma." + std::to_string(t), Tensor({L.units}, 1.0), true)));
        s.bn_beta.push_back(static_cast<std::size_t>(add(prefix + "bn_beta." + std::to_string(t), Tensor({L.units}, 0.0), true)));
      }
      bn_stats_[i].assign(spec_.T, BnStats(L.units));
    }
  }

  for (std::size_t k = 0; k < spec_.tskips.size(); ++k) {
    const auto& e = spec_.tskips[k];
    alpha_slots_.push_back(e.alpha_enabled
                               ? add("tskip" + std::to_string(k) + ".alpha_raw", Tensor::scalar(e.alpha_raw), true)
                               : -1);
    const auto& dst = geometry_[e.destination - 1];
    Shape payload = node_shape(spec_, geometry_, e.origin);
    const std::size_t src_channels =
        spec_.layers[e.destination - 1].kind == LayerKind::Dense ? numel(payload) : payload[0];
    shortcuts_.push_back(make_shortcut(derive_seed(seed_, "shortcut", k), src_channels, dst.ff_shape[0]));
  }
}

std::size_t Network::trainable_count() const {
  std::size_t n = 0;
  for (const auto& p : params_)
    if (p.trainable) n += p.value.size();
  return n;
}

void Network::clamp_lif() {
  for (std::size_t i = 0; i < spec_.depth(); ++i) {
    const auto& s = slots_[i];
    if (s.leak >= 0) {
      auto& v = params_[static_cast<std::size_t>(s.leak)].value[0];
      v = clamp_leak(v);
    }
    if (s.threshold >= 0) {
      auto& v = params_[static_cast<std::size_t>(s.threshold)].value[0];
      v = clamp_threshold(v);
    }
  }
}

namespace {

Shape batched(std::size_t batch, const Shape& sample) {
  Shape s{batch};
  s.insert(s.end(), sample.begin(), sample.end());
  return s;
}

}  // namespace

ForwardResult run_forward(Network& net, Tape& tape, const Tensor& input, const ForwardOptions& opts) {
  const ArchSpec& spec = net.spec();
  const auto& geo = net.geometry();
  const std::size_t T = spec.T;
  const std::size_t depth = spec.depth();
  if (input.rank() < 3 || input.dim(0) != T)
    throw DimensionError("run_forward: expected input [T=" + std::to_string(T) + ", batch, ...], got " +
                         to_string(input.shape()));
  const Shape sample(input.shape().begin() + 2, input.shape().end());
  if (sample != spec.input_shape)
    throw DimensionError("run_forward: sample shape " + to_string(sample) + " does not match architecture input " +
                         to_string(spec.input_shape));
  if (!(opts.dropout >= 0.0 && opts.dropout < 1.0)) throw Error("dropout must lie in [0,1)");
  const std::size_t B = input.dim(1);
  const bool training = opts.mode == RunMode::Train;

  ForwardResult out;
  out.batch = B;
  out.outputs.reserve(T);
  out.layer_outputs.assign(depth, {});
  out.activity.resize(depth);
  for (std::size_t i = 0; i < depth; ++i) {
    out.layer_outputs[i].reserve(T);
    out.activity[i].neurons = geo[i].neurons;
    out.activity[i].spiking = spec.layers[i].activation == Activation::Lif;
  }

  auto& params = net.parameters();
  out.param_vars.reserve(params.size());
  for (auto& p : params) {
    Tensor v = p.value;
    v.set_requires_grad(p.trainable);
    out.param_vars.push_back(tape.leaf(std::move(v)));
  }
  auto pvar = [&](std::ptrdiff_t slot) { return out.param_vars.at(static_cast<std::size_t>(slot)); };

  std::vector<Var> alphas(spec.tskips.size());
  for (std::size_t k = 0; k < spec.tskips.size(); ++k)
    if (net.alpha_slot(k) >= 0) alphas[k] = sigmoid(tape, pvar(net.alpha_slot(k)));

  // One ring per graph node; node 0 is the input.
  std::vector<std::size_t> capacity(depth + 1, 0);
  for (const auto& e : spec.tskips) capacity[e.origin] = std::max(capacity[e.origin], e.delta_t + 1);
  std::vector<DelayBuffer<Var>> buffers;
  buffers.reserve(depth + 1);
  for (auto c : capacity) buffers.emplace_back(c);

  std::map<Shape, Var> zeros;
  auto zero_of = [&](const Shape& s) {
    auto it = zeros.find(s);
    if (it == zeros.end()) it = zeros.emplace(s, tape.constant(Tensor(s, 0.0))).first;
    return it->second;
  };

  std::vector<Var> membrane(depth);
  std::vector<Var> prev_spikes(depth);
  for (std::size_t i = 0; i < depth; ++i) {
    const auto& a = spec.layers[i].activation;
    if (a == Activation::Lif || a == Activation::Integrator) {
      membrane[i] = zero_of(batched(B, geo[i].out_shape));
      prev_spikes[i] = membrane[i];
    }
  }

  Rng drop_rng(derive_seed(opts.dropout_seed, "dropout"));
  const bool use_dropout = training && opts.dropout > 0.0;

  for (std::size_t t = 0; t < T; ++t) {
    const Var x0 = tape.constant(take_leading(input, t));
    if (capacity[0]) buffers[0].write(t, x0);
    Var prev = x0;

    for (std::size_t i = 0; i < depth; ++i) {
      const LayerSpec& L = spec.layers[i];
      const LayerGeometry& g = geo[i];
      const LayerSlots& s = net.slots(i + 1);

      // Additive payloads sum into the feed-forward input; concatenated
      // payloads are then appended in edge order.
      Var merged = L.kind == LayerKind::Dense ? flatten(tape, prev) : prev;
      std::vector<std::pair<Var, std::size_t>> appended;
      for (std::size_t k : g.incoming) {
        const TSkipEdge& e = spec.tskips[k];
        const Var zero = zero_of(batched(B, node_shape(spec, geo, e.origin)));
        const auto now = static_cast<std::ptrdiff_t>(t);
        Var payload = buffers[e.origin].read(now - static_cast<std::ptrdiff_t>(e.delta_t), zero);
        if (e.alpha_enabled) {
          // The undelayed term of a backward edge is the latest completed step.
          const Var current = buffers[e.origin].read(e.is_backward() ? now - 1 : now, zero);
          payload = mix(tape, alphas[k], current, payload);
        }
        if (L.kind == LayerKind::Dense) payload = flatten(tape, payload);
        payload = shortcut_apply(tape, net.shortcut(k), payload);
        if (e.merge == Merge::Concat) {
          appended.emplace_back(payload, k);
          continue;
        }
        try {
          merged = add(tape, merged, payload);
        } catch (const DimensionError& err) {
          throw DimensionError("merge failed at " + describe(e) + ": " + err.what());
        }
      }
      for (const auto& [payload, k] : appended) {
        try {
          merged = concat(tape, merged, payload);
        } catch (const DimensionError& err) {
          throw DimensionError("merge failed at " + describe(spec.tskips[k]) + ": " + err.what());
        }
      }

      if (use_dropout) {
        Tensor mask(tape.shape(merged));
        const double keep = 1.0 - opts.dropout;
        for (auto& m : mask.data()) m = bernoulli(drop_rng, keep) ? 1.0 / keep : 0.0;
        merged = mul(tape, merged, tape.constant(std::move(mask)));
      }

      Var a = L.kind == LayerKind::Dense ? matmul(tape, merged, pvar(s.weight))
                                         : conv2d(tape, merged, pvar(s.weight), L.stride);
      if (s.bias >= 0) a = add_bias(tape, a, pvar(s.bias));
      if (!s.bn_gamma.empty()) {
        BnStats& stats = net.bn_stats(i + 1, t);
        if (training && !opts.update_running_stats) {
          BnStats scratch = stats;
          a = bntt_step(tape, a, scratch, out.param_vars[s.bn_gamma[t]], out.param_vars[s.bn_beta[t]], true);
        } else {
          a = bntt_step(tape, a, stats, out.param_vars[s.bn_gamma[t]], out.param_vars[s.bn_beta[t]], training);
        }
      }

      Var y;
      switch (L.activation) {
        case Activation::Lif: {
          const auto r = lif_step(tape, {membrane[i], prev_spikes[i]}, a, pvar(s.leak), pvar(s.threshold), L.lif.reset,
                                  opts.surrogate, opts.spike_mode);
          membrane[i] = r.state.membrane;
          prev_spikes[i] = r.state.prev_spikes;
          y = r.spikes;
          double n = 0.0;
          for (double v : tape.value(y).data()) n += v;
          out.activity[i].spikes += n;
          break;
        }
        case Activation::Relu: y = relu(tape, a); break;
        case Activation::Integrator:
          membrane[i] = leaky_integrate(tape, membrane[i], a, pvar(s.leak));
          y = membrane[i];
          break;
        case Activation::Linear: y = a; break;
      }
      if (capacity[i + 1]) buffers[i + 1].write(t, y);
      out.layer_outputs[i].push_back(y);
      prev = y;
    }
    out.outputs.push_back(prev);
  }
  return out;
}

Var accumulate_readout(Tape& tape, const ForwardResult& fwd) {
  Var r = add_n(tape, fwd.outputs);
  return flatten(tape, r);
}

}  // namespace tskip
