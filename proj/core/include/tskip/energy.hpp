#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tskip/network.hpp"

namespace tskip {

/// 45nm per-operation energies in joules.
struct EnergyModel {
  double e_ac = 0.9e-12;
  double e_mac = 4.6e-12;
};

enum class OpsKind { Snn, Ann };

struct LayerOps {
  std::string name;
  OpsKind kind = OpsKind::Snn;
  std::size_t params = 0;
  /// Neurons.
  double N = 0.0;
  /// Synaptic connections per neuron.
  double C = 0.0;
  /// Spikes per neuron per sample over the whole window.
  double M = 0.0;
};

struct LayerOpsProfile {
  std::size_t T = 1;
  std::vector<LayerOps> layers;
};

/// Spikes per neuron per sample.
double spike_rate(double total_spikes, std::size_t neurons, std::size_t samples);

struct EnergyRow {
  LayerOps layer;
  /// Per-timestep firing fraction M / T.
  double step_rate = 0.0;
  double ops = 0.0;
  double energy_j = 0.0;
};

struct EnergyReport {
  std::size_t T = 1;
  std::vector<EnergyRow> rows;
  double snn_ops = 0.0;
  double ann_ops = 0.0;
  double total_energy_j = 0.0;
  std::size_t total_params = 0;
};

/// SNN layers: T * N * C * (M / T) accumulates at e_ac, so that the per-step
/// firing fraction enters the product. ANN layers: N * C multiply-accumulates
/// at e_mac.
EnergyReport energy_total(const LayerOpsProfile& profile, const EnergyModel& model = {});

/// Energy of a bare operation count.
double energy_of_ops(double ops, OpsKind kind, const EnergyModel& model = {});

/// Builds a profile from measured activity (LIF layers count as SNN, every
/// other activation as ANN). `samples` is the number of evaluated samples.
LayerOpsProfile profile_network(const Network& net, const std::vector<LayerActivity>& activity, std::size_t samples);

std::string energy_csv(const EnergyReport& report);
/// Columns: layer, #Params, #OPS, spike rate (M and percent), E_total.
std::string energy_table(const EnergyReport& report);

}  // namespace tskip
