#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tskip/arch.hpp"
#include "tskip/ops.hpp"
#include "tskip/shortcut.hpp"
#include "tskip/tape.hpp"

namespace tskip {

struct Parameter {
  std::string name;
  Tensor value;
  bool trainable = true;
};

/// Which parameter slots belong to a layer; -1 when absent.
struct LayerSlots {
  std::ptrdiff_t weight = -1;
  std::ptrdiff_t bias = -1;
  std::ptrdiff_t leak = -1;
  std::ptrdiff_t threshold = -1;
  std::vector<std::size_t> bn_gamma;  // one per timestep
  std::vector<std::size_t> bn_beta;
};

/// Weights, running statistics and shortcut matrices of an ArchSpec.
class Network {
 public:
  /// Validates `spec` and initializes weights Kaiming-uniform (fan-in) from `seed`.
  Network(ArchSpec spec, std::uint64_t seed);

  const ArchSpec& spec() const { return spec_; }
  const std::vector<LayerGeometry>& geometry() const { return geometry_; }
  std::uint64_t seed() const { return seed_; }

  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  const LayerSlots& slots(std::size_t layer) const { return slots_.at(layer - 1); }
  /// Slot of the alpha logit of edge k, or -1.
  std::ptrdiff_t alpha_slot(std::size_t edge) const { return alpha_slots_.at(edge); }
  const ShortcutMatrix& shortcut(std::size_t edge) const { return shortcuts_.at(edge); }

  /// Running statistics of layer (1-based) at timestep t.
  BnStats& bn_stats(std::size_t layer, std::size_t t) { return bn_stats_.at(layer - 1).at(t); }
  const std::vector<std::vector<BnStats>>& all_bn_stats() const { return bn_stats_; }
  std::vector<std::vector<BnStats>>& all_bn_stats() { return bn_stats_; }

  /// Count of trainable scalars; equals param_count(spec()).
  std::size_t trainable_count() const;
  /// Re-applies leak/threshold bounds after an optimizer step.
  void clamp_lif();

 private:
  ArchSpec spec_;
  std::uint64_t seed_;
  std::vector<LayerGeometry> geometry_;
  std::vector<Parameter> params_;
  std::vector<LayerSlots> slots_;
  std::vector<std::ptrdiff_t> alpha_slots_;
  std::vector<ShortcutMatrix> shortcuts_;
  std::vector<std::vector<BnStats>> bn_stats_;
};

enum class RunMode { Train, Eval };

struct ForwardOptions {
  RunMode mode = RunMode::Eval;
  SpikeMode spike_mode = SpikeMode::Hard;
  SurrogateConfig surrogate{};
  /// Drop probability applied to every layer input in Train mode.
  double dropout = 0.0;
  std::uint64_t dropout_seed = 0;
  /// Let BNTT update running statistics in Train mode.
  bool update_running_stats = true;
};

struct LayerActivity {
  std::size_t neurons = 0;
  /// Sum of emitted spikes over all timesteps and batch entries (LIF layers).
  double spikes = 0.0;
  bool spiking = false;
};

struct ForwardResult {
  /// Output of the last layer at every timestep.
  std::vector<Var> outputs;
  /// outputs of layer l (1-based) at step t: layer_outputs[l-1][t].
  std::vector<std::vector<Var>> layer_outputs;
  std::vector<LayerActivity> activity;
  /// Leaf var of every parameter, aligned with Network::parameters().
  std::vector<Var> param_vars;
  std::size_t batch = 0;
};

/// Unrolls the network over input [T, batch, ...sample shape] on `tape`.
/// Skip payloads before the sequence start are zeros; backward edges only
/// read values from strictly earlier steps.
ForwardResult run_forward(Network& net, Tape& tape, const Tensor& input, const ForwardOptions& opts = {});

/// Sum over timesteps of the last layer output: the classification readout.
Var accumulate_readout(Tape& tape, const ForwardResult& fwd);

}  // namespace tskip
