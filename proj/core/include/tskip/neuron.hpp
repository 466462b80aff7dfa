#pragma once

#include "tskip/ops.hpp"
#include "tskip/tape.hpp"

namespace tskip {

enum class ResetMode { Hard, Soft };

inline constexpr double kMinLeak = 1e-3;
inline constexpr double kMaxLeak = 1.0 - 1e-3;
inline constexpr double kMinThreshold = 1e-2;

/// Per-layer scalar leak and threshold. Defaults are the adaptive-LIF
/// initialization (leak 0.6, threshold 15) with soft reset.
struct LifParams {
  double leak = 0.6;
  double threshold = 15.0;
  ResetMode reset = ResetMode::Soft;
  bool learnable = true;
  friend bool operator==(const LifParams&, const LifParams&) = default;
};

/// Pulls leak into [1e-3, 1-1e-3] and threshold into [1e-2, inf).
LifParams clamp_params(LifParams params);
double clamp_leak(double leak);
double clamp_threshold(double threshold);

/// Membrane potential and the spikes emitted on the previous step.
struct LifState {
  Var membrane;
  Var prev_spikes;
};

/// Zero membrane and zero previous spikes of the given shape.
LifState lif_initial_state(Tape& tape, const Shape& shape);

/// Membrane update. Soft: U' = leak*U + I - threshold*O_prev.
/// Hard: U' = leak*U*(1 - O_prev) + I (potential zeroed where the neuron fired).
Var lif_integrate(Tape& tape, Var membrane, Var input, Var prev_spikes, Var leak, Var threshold, ResetMode reset);

/// O = spike(U/threshold - 1).
Var lif_fire(Tape& tape, Var membrane, Var threshold, const SurrogateConfig& surr, SpikeMode mode);

/// Non-spiking leaky integrator: U' = leak*U + I.
Var leaky_integrate(Tape& tape, Var membrane, Var input, Var leak);

struct LifStepResult {
  Var spikes;
  LifState state;
};

/// One LIF timestep on an input that already holds W*O (plus any skip payload).
LifStepResult lif_step(Tape& tape, const LifState& state, Var weighted_input, Var leak, Var threshold,
                       ResetMode reset, const SurrogateConfig& surr, SpikeMode mode = SpikeMode::Hard);

/// Same, with constant parameters.
LifStepResult lif_step(Tape& tape, const LifState& state, Var weighted_input, const LifParams& params,
                       const SurrogateConfig& surr, SpikeMode mode = SpikeMode::Hard);

}  // namespace tskip
