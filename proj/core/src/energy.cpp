#include "tskip/energy.hpp"

#include <cstdio>

#include "tskip/error.hpp"

namespace tskip {

double spike_rate(double total_spikes, std::size_t neurons, std::size_t samples) {
  if (neurons == 0 || samples == 0) return 0.0;
  return total_spikes / (static_cast<double>(neurons) * static_cast<double>(samples));
}

double energy_of_ops(double ops, OpsKind kind, const EnergyModel& model) {
  return ops * (kind == OpsKind::Snn ? model.e_ac : model.e_mac);
}

EnergyReport energy_total(const LayerOpsProfile& profile, const EnergyModel& model) {
  if (!(model.e_ac > 0.0 && model.e_mac > 0.0)) throw Error("energy model constants must be positive");
  if (profile.T == 0) throw Error("energy profile needs T >= 1");
  EnergyReport r;
  r.T = profile.T;
  const double T = static_cast<double>(profile.T);
  for (const auto& l : profile.layers) {
    if (l.N < 0 || l.C < 0 || l.M < 0) throw Error("energy profile entries must be non-negative: " + l.name);
    EnergyRow row{l, 0.0, 0.0, 0.0};
    if (l.kind == OpsKind::Snn) {
      row.step_rate = l.M / T;
      row.ops = T * l.N * l.C * row.step_rate;
      r.snn_ops += row.ops;
    } else {
      row.ops = l.N * l.C;
      r.ann_ops += row.ops;
    }
    row.energy_j = energy_of_ops(row.ops, l.kind, model);
    r.total_energy_j += row.energy_j;
    r.total_params += l.params;
    r.rows.push_back(row);
  }
  return r;
}

LayerOpsProfile profile_network(const Network& net, const std::vector<LayerActivity>& activity, std::size_t samples) {
  const auto& spec = net.spec();
  if (activity.size() != spec.depth()) throw DimensionError("profile_network: activity does not match network depth");
  LayerOpsProfile p;
  p.T = spec.T;
  std::vector<std::size_t> per_layer(spec.depth(), 0);
  for (const auto& param : net.parameters()) {
    if (!param.trainable) continue;
    if (param.name.rfind("layer", 0) == 0) {
      const auto dot = param.name.find('.');
      const std::size_t l = std::stoul(param.name.substr(5, dot - 5));
      per_layer[l - 1] += param.value.size();
    }
  }
  for (std::size_t i = 0; i < spec.depth(); ++i) {
    const auto& g = net.geometry()[i];
    LayerOps l;
    l.name = "layer" + std::to_string(i + 1);
    l.params = per_layer[i];
    l.N = static_cast<double>(g.neurons);
    l.C = static_cast<double>(g.fan_in);
    if (spec.layers[i].activation == Activation::Lif) {
      l.kind = OpsKind::Snn;
      l.M = spike_rate(activity[i].spikes, g.neurons, samples);
    } else {
      l.kind = OpsKind::Ann;
    }
    p.layers.push_back(l);
  }
  return p;
}

std::string energy_csv(const EnergyReport& r) {
  std::string out = "layer,kind,params,neurons,fan_in,spike_rate_M,spike_rate_pct,ops,energy_j\n";
  char buf[512];
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", row.layer.name.c_str(),
                  row.layer.kind == OpsKind::Snn ? "snn" : "ann", row.layer.params, row.layer.N, row.layer.C,
                  row.layer.M, 100.0 * row.step_rate, row.ops, row.energy_j);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "total,,%zu,,,,,%.17g,%.17g\n", r.total_params, r.snn_ops + r.ann_ops,
                r.total_energy_j);
  out += buf;
  return out;
}

std::string energy_table(const EnergyReport& r) {
  std::string out;
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-10s %-4s %10s %14s %10s %10s %14s\n", "layer", "kind", "#Params", "#OPS",
                "M", "rate %", "E_total (mJ)");
  out += buf;
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%-10s %-4s %10zu %14.4g %10.4g %10.2f %14.6g\n", row.layer.name.c_str(),
                  row.layer.kind == OpsKind::Snn ? "snn" : "ann", row.layer.params, row.ops, row.layer.M,
                  100.0 * row.step_rate, row.energy_j * 1e3);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-10s %-4s %10zu %14.4g %10s %10s %14.6g\n", "total", "", r.total_params,
                r.snn_ops + r.ann_ops, "", "", r.total_energy_j * 1e3);
  out += buf;
  return out;
}

}  // namespace tskip
