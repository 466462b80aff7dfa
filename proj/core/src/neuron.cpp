#include "tskip/neuron.hpp"

#include <algorithm>

#include "tskip/error.hpp"

namespace tskip {
namespace {

double scalar_of(const Tape& tape, Var v, const char* what) {
  const Tensor& t = tape.value(v);
  if (t.size() != 1) throw DimensionError(std::string(what) + " must be a one-element tensor");
  return t[0];
}

}  // namespace

double clamp_leak(double leak) { return std::clamp(leak, kMinLeak, kMaxLeak); }
double clamp_threshold(double threshold) { return std::max(threshold, kMinThreshold); }

LifParams clamp_params(LifParams params) {
  params.leak = clamp_leak(params.leak);
  params.threshold = clamp_threshold(params.threshold);
  return params;
}

LifState lif_initial_state(Tape& tape, const Shape& shape) {
  const Var zeros = tape.constant(Tensor(shape, 0.0));
  return {zeros, zeros};
}

Var lif_integrate(Tape& tape, Var membrane, Var input, Var prev_spikes, Var leak, Var threshold, ResetMode reset) {
  const Tensor& U = tape.value(membrane);
  const Tensor& I = tape.value(input);
  const Tensor& O = tape.value(prev_spikes);
  if (U.shape() != I.shape() || U.shape() != O.shape())
    throw DimensionError("lif: membrane " + to_string(U.shape()) + " vs input " + to_string(I.shape()));
  const double lam = scalar_of(tape, leak, "leak");
  const double vth = scalar_of(tape, threshold, "threshold");
  Tensor out(U.shape());
  if (reset == ResetMode::Soft) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = lam * U[i] + I[i] - vth * O[i];
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = lam * (U[i] * (1.0 - O[i])) + I[i];
  }
  return tape.record(
      std::move(out), {membrane, input, prev_spikes, leak, threshold},
      [membrane, prev_spikes, leak, threshold, reset](const Tape& t, const Tensor& g, std::span<Tensor* const> grads) {
        const Tensor& U = t.value(membrane);
        const Tensor& O = t.value(prev_spikes);
        const double lam = t.value(leak)[0];
        const double vth = t.value(threshold)[0];
        double d_lam = 0.0, d_vth = 0.0;
        const std::size_t n = g.size();
        if (reset == ResetMode::Soft) {
          for (std::size_t i = 0; i < n; ++i) {
            if (grads[0]) (*grads[0])[i] += lam * g[i];
            if (grads[2]) (*grads[2])[i] -= vth * g[i];
            d_lam += g[i] * U[i];
            d_vth -= g[i] * O[i];
          }
        } else {
          for (std::size_t i = 0; i < n; ++i) {
            const double keep = 1.0 - O[i];
            if (grads[0]) (*grads[0])[i] += lam * keep * g[i];
            if (grads[2]) (*grads[2])[i] -= lam * U[i] * g[i];
            d_lam += g[i] * U[i] * keep;
          }
        }
        if (grads[1])
          for (std::size_t i = 0; i < n; ++i) (*grads[1])[i] += g[i];
        if (grads[3]) (*grads[3])[0] += d_lam;
        if (grads[4]) (*grads[4])[0] += d_vth;
      });
}

Var lif_fire(Tape& tape, Var membrane, Var threshold, const SurrogateConfig& surr, SpikeMode mode) {
  if (!(surr.alpha > 0.0)) throw Error("surrogate alpha must be positive");
  const Tensor& U = tape.value(membrane);
  const double vth = scalar_of(tape, threshold, "threshold");
  if (!(vth > 0.0)) throw Error("lif threshold must be positive");
  Tensor out(U.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double z = U[i] / vth - 1.0;
    out[i] = mode == SpikeMode::Hard ? (z > 0.0 ? 1.0 : 0.0) : surrogate_primitive(z, surr);
  }
  return tape.record(std::move(out), {membrane, threshold},
                     [membrane, threshold, surr](const Tape& t, const Tensor& g, std::span<Tensor* const> grads) {
                       const Tensor& U = t.value(membrane);
                       const double vth = t.value(threshold)[0];
                       double d_vth = 0.0;
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         const double dz = g[i] * surrogate_grad(U[i] / vth - 1.0, surr);
                         if (grads[0]) (*grads[0])[i] += dz / vth;
                         d_vth -= dz * U[i] / (vth * vth);
                       }
                       if (grads[1]) (*grads[1])[0] += d_vth;
                     });
}

Var leaky_integrate(Tape& tape, Var membrane, Var input, Var leak) {
  const Tensor& U = tape.value(membrane);
  const Tensor& I = tape.value(input);
  if (U.shape() != I.shape()) throw DimensionError("leaky_integrate: shape mismatch");
  const double lam = scalar_of(tape, leak, "leak");
  Tensor out(U.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = lam * U[i] + I[i];
  return tape.record(std::move(out), {membrane, input, leak},
                     [membrane, leak](const Tape& t, const Tensor& g, std::span<Tensor* const> grads) {
                       const Tensor& U = t.value(membrane);
                       const double lam = t.value(leak)[0];
                       double d_lam = 0.0;
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         if (grads[0]) (*grads[0])[i] += lam * g[i];
                         if (grads[1]) (*grads[1])[i] += g[i];
                         d_lam += g[i] * U[i];
                       }
                       if (grads[2]) (*grads[2])[0] += d_lam;
                     });
}

LifStepResult lif_step(Tape& tape, const LifState& state, Var weighted_input, Var leak, Var threshold,
                       ResetMode reset, const SurrogateConfig& surr, SpikeMode mode) {
  const Var u = lif_integrate(tape, state.membrane, weighted_input, state.prev_spikes, leak, threshold, reset);
  const Var o = lif_fire(tape, u, threshold, surr, mode);
  return {o, {u, o}};
}

LifStepResult lif_step(Tape& tape, const LifState& state, Var weighted_input, const LifParams& params,
                       const SurrogateConfig& surr, SpikeMode mode) {
  const Var leak = tape.constant(Tensor::scalar(params.leak));
  const Var thr = tape.constant(Tensor::scalar(params.threshold));
  return lif_step(tape, state, weighted_input, leak, thr, params.reset, surr, mode);
}

}  // namespace tskip
