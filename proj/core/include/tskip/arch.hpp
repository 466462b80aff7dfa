#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tskip/neuron.hpp"
#include "tskip/tensor.hpp"

namespace tskip {

enum class LayerKind { Dense, Conv2d };

/// Lif: spiking. Relu: ANN unit (hybrid networks). Integrator: non-spiking
/// leaky accumulator used as a readout. Linear: identity (used in tests).
enum class Activation { Lif, Relu, Integrator, Linear };

enum class Merge { Concat, Add };

struct LayerSpec {
  LayerKind kind = LayerKind::Dense;
  /// Output features (dense) or output channels (conv).
  std::size_t units = 1;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  Activation activation = Activation::Lif;
  bool bias = true;
  /// Per-timestep batch norm on the affine output; never applied to the last layer.
  bool bntt = true;
  LifParams lif{};

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Skip from `origin` into the input of `destination`, delayed by `delta_t`
/// steps. Node 0 is the network input; layer i (1-based) is layers[i-1].
struct TSkipEdge {
  std::size_t origin = 0;
  std::size_t destination = 1;
  std::size_t delta_t = 0;
  Merge merge = Merge::Concat;
  bool alpha_enabled = false;
  /// Initial value of the learnable mixing logit; alpha = sigmoid(alpha_raw).
  double alpha_raw = 0.0;

  bool is_backward() const { return origin > destination; }
  friend bool operator==(const TSkipEdge&, const TSkipEdge&) = default;
};

struct ArchSpec {
  /// Per-sample input shape: {features} or {channels, height, width}.
  Shape input_shape;
  std::vector<LayerSpec> layers;
  std::vector<TSkipEdge> tskips;
  std::size_t T = 1;

  std::size_t depth() const { return layers.size(); }
  friend bool operator==(const ArchSpec&, const ArchSpec&) = default;
};

struct Violation {
  enum class Code {
    EmptyNetwork,
    BadSequenceLength,
    BadLayer,
    BadEdgeIndex,
    SameLayer,
    SameStepCycle,
    DelayTooLong,
    ShapeMismatch,
  };
  Code code;
  /// Edge index for edge violations, layer number for layer violations, -1 otherwise.
  std::ptrdiff_t where = -1;
  std::string message;
};

/// Every invariant violation of `spec`; empty means valid. Never throws.
std::vector<Violation> validate(const ArchSpec& spec);
/// Throws ValidationError listing all violations.
void require_valid(const ArchSpec& spec);

/// Resolved per-layer shapes and counts.
struct LayerGeometry {
  /// Feed-forward input (flattened for dense layers).
  Shape ff_shape;
  /// Input after all merges.
  Shape in_shape;
  Shape out_shape;
  /// Synaptic connections per neuron (fan-in).
  std::size_t fan_in = 0;
  /// Neurons in the layer (all output positions).
  std::size_t neurons = 0;
  /// Indices into ArchSpec::tskips of edges merging into this layer, in order.
  std::vector<std::size_t> incoming;
};

/// Shape of node `n` (0 = input) for use as a skip payload into `destination`.
Shape node_shape(const ArchSpec& spec, const std::vector<LayerGeometry>& geo, std::size_t n);

/// Throws ValidationError on the first incompatible merge, naming the edge.
std::vector<LayerGeometry> infer_geometry(const ArchSpec& spec);

/// Trainable parameters: weights, biases, per-timestep BNTT affine pairs,
/// learnable LIF/integrator scalars and one logit per alpha-enabled edge.
std::size_t param_count(const ArchSpec& spec);

std::string to_string(LayerKind kind);
std::string to_string(Activation act);
std::string to_string(Merge merge);
std::string to_string(ResetMode reset);
std::string describe(const TSkipEdge& edge);

}  // namespace tskip
