#include "tskip/cli/ablate.hpp"

#include <cstdio>

#include "tskip/energy.hpp"
#include "tskip/error.hpp"
#include "tskip/network.hpp"

namespace tskip::cli {

AblationAxis parse_axis(const std::string& s) {
  if (s == "delta_t") return AblationAxis::DeltaT;
  if (s == "position") return AblationAxis::Position;
  if (s == "depth") return AblationAxis::Depth;
  throw ParseError("unknown ablation axis '" + s + "' (expected delta_t, position or depth)");
}

std::string to_string(AblationAxis a) {
  switch (a) {
    case AblationAxis::DeltaT: return "delta_t";
    case AblationAxis::Position: return "position";
    case AblationAxis::Depth: return "depth";
  }
  return "?";
}

ArchSpec ablation_variant(const ArchSpec& base, AblationAxis axis, std::size_t value, std::size_t edge) {
  ArchSpec s = base;
  if (axis != AblationAxis::Depth && edge >= s.tskips.size())
    throw ValidationError("ablation: base architecture has no tskip #" + std::to_string(edge));
  switch (axis) {
    case AblationAxis::DeltaT:
      s.tskips[edge].delta_t = value;
      break;
    case AblationAxis::Position:
      s.tskips[edge].destination = value;
      break;
    case AblationAxis::Depth: {
      if (base.depth() < 2) throw ValidationError("ablation: depth sweep needs a hidden layer and a readout");
      if (value < 2) throw ValidationError("ablation: depth must be at least 2");
      const std::size_t old_depth = base.depth();
      const LayerSpec readout = base.layers.back();
      std::vector<LayerSpec> hidden(base.layers.begin(), base.layers.end() - 1);
      while (hidden.size() < value - 1) hidden.push_back(hidden.back());
      hidden.resize(value - 1);
      hidden.push_back(readout);
      s.layers = std::move(hidden);
      for (auto& e : s.tskips) {
        if (e.origin == old_depth) e.origin = value;
        if (e.destination == old_depth) e.destination = value;
      }
      break;
    }
  }
  return s;
}

std::vector<AblationRow> run_ablation(const ArchSpec& base, AblationAxis axis, const std::vector<std::size_t>& grid,
                                      std::size_t edge, const Dataset& train_set, const Dataset& test_set,
                                      const TrainConfig& cfg, std::uint64_t weight_seed) {
  std::vector<AblationRow> rows;
  for (std::size_t v : grid) {
    AblationRow row;
    row.value = v;
    ArchSpec spec;
    try {
      spec = ablation_variant(base, axis, v, edge);
      require_valid(spec);
    } catch (const ValidationError& e) {
      row.status = "invalid";
      row.note = e.what();
      rows.push_back(row);
      continue;
    }
    Network net(spec, weight_seed);
    const TrainResult tr = train(net, train_set, &test_set, cfg);
    const EvalResult ev = evaluate(net, test_set, cfg.eval_batch_size, cfg.loss);
    const EnergyReport er = energy_total(profile_network(net, ev.activity, ev.samples));
    row.status = "ok";
    row.params = param_count(spec);
    row.test_accuracy = ev.accuracy;
    row.best_test_accuracy = tr.best_test_accuracy;
    row.spike_rate = ev.spike_rate;
    row.energy_j = er.total_energy_j;
    row.epochs = tr.epochs_run;
    rows.push_back(row);
  }
  return rows;
}

std::string ablation_csv(AblationAxis axis, const std::vector<AblationRow>& rows) {
  std::string out = "axis,value,status,params,epochs,test_accuracy,best_test_accuracy,spike_rate,energy_j,note\n";
  char buf[512];
  for (const auto& r : rows) {
    std::string note = r.note;
    for (auto& c : note)
      if (c == ',' || c == '\n') c = ';';
    std::snprintf(buf, sizeof buf, "%s,%zu,%s,%zu,%zu,%.6f,%.6f,%.6g,%.6g,", to_string(axis).c_str(), r.value,
                  r.status.c_str(), r.params, r.epochs, r.test_accuracy, r.best_test_accuracy, r.spike_rate,
                  r.energy_j);
    out += buf + note + "\n";
  }
  return out;
}

}  // namespace tskip::cli
