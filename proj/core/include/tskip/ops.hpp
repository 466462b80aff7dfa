#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tskip/tape.hpp"
#include "tskip/tensor.hpp"

namespace tskip {

/// Sharpness of the ArcTangent surrogate. Must be positive.
struct SurrogateConfig {
  double alpha = 2.0;
};

/// `Hard` emits exact 0/1 spikes and uses the surrogate only in backward.
/// `SoftForward` emits the surrogate primitive itself so the forward pass is
/// differentiable; it exists for gradient checking only.
enum class SpikeMode { Hard, SoftForward };

/// d/dz of the ArcTangent surrogate: alpha / (2 (1 + (pi/2 alpha z)^2)).
double surrogate_grad(double z, const SurrogateConfig& cfg);
/// Smooth step whose derivative is surrogate_grad: atan(pi/2 alpha z)/pi + 1/2.
double surrogate_primitive(double z, const SurrogateConfig& cfg);

// Elementwise / linear algebra --------------------------------------------

Var matmul(Tape& tape, Var a, Var b);
Var add(Tape& tape, Var a, Var b);
Var sub(Tape& tape, Var a, Var b);
Var mul(Tape& tape, Var a, Var b);
/// Sum of equally shaped vars, accumulated left to right.
Var add_n(Tape& tape, std::span<const Var> parts);
Var scale(Tape& tape, Var x, double factor);
/// x * s where s is a one-element var.
Var mul_scalar(Tape& tape, Var x, Var s);
/// alpha * a + (1 - alpha) * b with one-element `alpha`.
Var mix(Tape& tape, Var alpha, Var a, Var b);
/// Adds `bias` (length = dim 1 of x) to every row, broadcast over spatial dims.
Var add_bias(Tape& tape, Var x, Var bias);
Var relu(Tape& tape, Var x);
Var sigmoid(Tape& tape, Var x);
/// [B, ...] -> [B, prod(...)].
Var flatten(Tape& tape, Var x);

// Spiking -----------------------------------------------------------------

/// Heaviside(z) with strict inequality (z > 0 spikes) and ArcTangent backward.
Var spike(Tape& tape, Var z, const SurrogateConfig& cfg, SpikeMode mode);

// Channel ops (axis 1) -----------------------------------------------------

Var concat(Tape& tape, Var a, Var b);
/// Output channel i copies input channel `selection[i]`; gradient routes back additively.
Var select_channels(Tape& tape, Var x, std::span<const std::size_t> selection);

// Convolution ---------------------------------------------------------------

/// "Same"-padded cross-correlation. x: [B,C,H,W], kernel: [O,C,KH,KW].
/// Output spatial size is ceil(H/stride) x ceil(W/stride).
Var conv2d(Tape& tape, Var x, Var kernel, std::size_t stride);
std::size_t same_output_size(std::size_t in, std::size_t stride);

// Normalization -------------------------------------------------------------

/// Running statistics owned by one timestep of a BNTT layer.
struct BnStats {
  std::vector<double> mean;
  std::vector<double> var;
  explicit BnStats(std::size_t channels = 0) : mean(channels, 0.0), var(channels, 1.0) {}
};

struct BnConfig {
  double eps = 1e-5;
  double momentum = 0.1;
};

/// Batch normalization with the statistics and affine parameters of one
/// timestep. In training the batch statistics are used and `stats` is updated;
/// otherwise `stats` is used as-is. Training requires a batch of at least 2.
Var bntt_step(Tape& tape, Var x, BnStats& stats, Var gamma, Var beta, bool training,
              const BnConfig& cfg = {});

// Reductions and losses --------------------------------------------------

Var sum(Tape& tape, Var x);
Var mean(Tape& tape, Var x);
Var mse_loss(Tape& tape, Var pred, Var target);
/// Mean softmax cross-entropy of logits [B, C] against integer labels.
Var cross_entropy(Tape& tape, Var logits, std::span<const int> labels);

}  // namespace tskip
