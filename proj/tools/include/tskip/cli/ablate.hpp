#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tskip/arch.hpp"
#include "tskip/data.hpp"
#include "tskip/trainer.hpp"

namespace tskip::cli {

enum class AblationAxis { DeltaT, Position, Depth };

AblationAxis parse_axis(const std::string& s);
std::string to_string(AblationAxis a);

/// Variant of `base` at one grid value: the delay or destination of edge
/// `edge`, or the total layer count (hidden layers copied or dropped in front
/// of the readout; edges leaving the old readout follow it).
ArchSpec ablation_variant(const ArchSpec& base, AblationAxis axis, std::size_t value, std::size_t edge = 0);

struct AblationRow {
  std::size_t value = 0;
  /// "ok", or "invalid" with the violation text in `note`.
  std::string status;
  std::string note;
  std::size_t params = 0;
  double test_accuracy = 0.0;
  double best_test_accuracy = 0.0;
  double spike_rate = 0.0;
  double energy_j = 0.0;
  std::size_t epochs = 0;
};

std::vector<AblationRow> run_ablation(const ArchSpec& base, AblationAxis axis, const std::vector<std::size_t>& grid,
                                      std::size_t edge, const Dataset& train_set, const Dataset& test_set,
                                      const TrainConfig& cfg, std::uint64_t weight_seed);

std::string ablation_csv(AblationAxis axis, const std::vector<AblationRow>& rows);

}  // namespace tskip::cli
