#include "tskip/shortcut.hpp"

#include <algorithm>
#include <numeric>

#include "tskip/error.hpp"
#include "tskip/ops.hpp"
#include "tskip/rng.hpp"

namespace tskip {

bool ShortcutMatrix::is_identity() const {
  if (source_channels != target_channels) return false;
  for (std::size_t i = 0; i < selection.size(); ++i)
    if (selection[i] != i) return false;
  return true;
}

ShortcutMatrix make_shortcut(std::uint64_t seed, std::size_t source_channels, std::size_t target_channels) {
  if (source_channels == 0 || target_channels == 0) throw DimensionError("shortcut: channel counts must be positive");
  ShortcutMatrix ws{source_channels, target_channels, {}, seed};
  ws.selection.resize(target_channels);
  if (source_channels == target_channels) {
    std::iota(ws.selection.begin(), ws.selection.end(), std::size_t{0});
    return ws;
  }
  Rng rng(splitmix64(seed));
  std::vector<std::size_t> pool(source_channels);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  if (target_channels < source_channels) {
    shuffle(pool.begin(), pool.end(), rng);
    pool.resize(target_channels);
    std::sort(pool.begin(), pool.end());
    ws.selection = pool;
    return ws;
  }
  // Every source channel floor(target/source) times, plus a random distinct remainder.
  std::vector<std::size_t> sel;
  sel.reserve(target_channels);
  for (std::size_t r = 0; r < target_channels / source_channels; ++r) sel.insert(sel.end(), pool.begin(), pool.end());
  shuffle(pool.begin(), pool.end(), rng);
  sel.insert(sel.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(target_channels % source_channels));
  shuffle(sel.begin(), sel.end(), rng);
  ws.selection = std::move(sel);
  return ws;
}

Var shortcut_apply(Tape& tape, const ShortcutMatrix& ws, Var x) {
  const Tensor& X = tape.value(x);
  if (X.rank() < 2 || X.dim(1) != ws.source_channels)
    throw DimensionError("shortcut: expected " + std::to_string(ws.source_channels) + " channels, got " +
                         to_string(X.shape()));
  if (ws.is_identity()) return x;
  return select_channels(tape, x, ws.selection);
}

}  // namespace tskip
