#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tskip {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Independent seed for a named stream (e.g. "train", "search") of a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index = 0);

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double uniform01(Rng& rng);
/// Uniform integer in [lo, hi] by rejection; identical on every platform.
std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi);
bool bernoulli(Rng& rng, double p);

/// Fisher-Yates shuffle driven by uniform_int.
template <class It>
void shuffle(It first, It last, Rng& rng) {
  const auto n = last - first;
  for (auto i = n - 1; i > 0; --i) {
    const auto j = uniform_int(rng, 0, static_cast<std::int64_t>(i));
    std::iter_swap(first + i, first + j);
  }
}

}  // namespace tskip
