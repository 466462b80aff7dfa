#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tskip/arch.hpp"
#include "tskip/rng.hpp"

namespace tskip {

struct Range {
  std::size_t lo = 0;
  std::size_t hi = 0;
  friend bool operator==(const Range&, const Range&) = default;
};

enum class EdgeDirections { Forward, Backward, Both };

/// Constrained architecture space: sampled hidden layers, optional fixed tail
/// layers, a fixed readout layer and a random set of TSkips.
struct SearchSpace {
  Shape input_shape;
  std::size_t T = 1;
  LayerKind kind = LayerKind::Dense;
  /// Number of sampled hidden layers.
  Range depth{1, 1};
  /// Units (or channels) of hidden layer i use units[min(i, size - 1)].
  std::vector<Range> units{{16, 16}};
  std::vector<std::size_t> kernels{3};
  std::vector<std::size_t> strides{1};
  /// Fixed layers inserted between the sampled layers and the readout.
  std::vector<LayerSpec> tail;
  LayerSpec output{LayerKind::Dense, 10, 1, 1, Activation::Integrator, true, false, {}};

  Range tskip_count{0, 1};
  Range delta_t{1, 1};
  EdgeDirections directions = EdgeDirections::Both;
  /// Admissible (origin, destination) pairs; empty admits every pair.
  std::vector<std::pair<std::size_t, std::size_t>> allowed_pairs;
  std::vector<Merge> merges{Merge::Concat};
  bool alpha = false;

  /// Maximum trainable parameters; zero disables the budget.
  std::size_t param_budget = 0;
  bool bntt = true;
  double leak_init = 0.6;
  double threshold_init = 1.0;
  ResetMode reset = ResetMode::Soft;

  friend bool operator==(const SearchSpace&, const SearchSpace&) = default;
};

/// Throws ValidationError when the space itself is malformed.
void check_space(const SearchSpace& space);

/// Uniform draw per dimension, resampled until the architecture is valid and within
/// budget. Throws ValidationError after `max_attempts` rejections.
ArchSpec sample(const SearchSpace& space, Rng& rng, std::size_t max_attempts = 1000);

/// Named constraint presets: "shd", "ssc" (0.3M budget), "shd-large",
/// "ssc-large" (1.3M), "dvs" (0.6M) and "flow" (no budget).
SearchSpace preset(const std::string& name);
std::vector<std::string> preset_names();

nlohmann::json space_to_json(const SearchSpace& space);
SearchSpace space_from_json(const nlohmann::json& j);
SearchSpace load_space(const std::filesystem::path& path);
void save_space(const SearchSpace& space, const std::filesystem::path& path);

}  // namespace tskip
