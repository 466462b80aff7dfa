#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tskip/tape.hpp"

namespace tskip {

/// Fixed, untrained channel selection that adapts a skip payload to the
/// channel count of the destination input.
struct ShortcutMatrix {
  std::size_t source_channels = 0;
  std::size_t target_channels = 0;
  std::vector<std::size_t> selection;
  std::uint64_t seed = 0;

  bool is_identity() const;
  friend bool operator==(const ShortcutMatrix&, const ShortcutMatrix&) = default;
};

/// Deterministic in (seed, source, target). Equal counts give the identity;
/// fewer targets draw distinct channels; more targets use every source channel
/// as evenly as possible.
ShortcutMatrix make_shortcut(std::uint64_t seed, std::size_t source_channels, std::size_t target_channels);

/// Applies the selection along axis 1 of x.
Var shortcut_apply(Tape& tape, const ShortcutMatrix& ws, Var x);

}  // namespace tskip
