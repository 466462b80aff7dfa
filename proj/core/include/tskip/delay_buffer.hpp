#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tskip/error.hpp"

namespace tskip {

/// Raised when a consumer asks for a step that has not been produced yet.
class FutureReadError : public Error {
 public:
  using Error::Error;
};

/// Ring of the most recent `capacity` per-step values of one layer.
/// Steps are written in order 0, 1, 2, ...; reading step s < 0 yields the
/// caller's zero value (no history before the sequence starts).
template <class T>
class DelayBuffer {
 public:
  explicit DelayBuffer(std::size_t capacity = 0) : slots_(capacity) {}

  std::size_t capacity() const { return slots_.size(); }
  /// Number of steps written so far.
  std::size_t written() const { return written_; }

  void write(std::size_t step, T value) {
    if (step != written_)
      throw Error("delay buffer: expected step " + std::to_string(written_) + ", got " + std::to_string(step));
    if (!slots_.empty()) slots_[step % slots_.size()] = std::move(value);
    ++written_;
  }

  const T& read(std::ptrdiff_t step, const T& zero) const {
    if (step < 0) return zero;
    const auto s = static_cast<std::size_t>(step);
    if (s >= written_)
      throw FutureReadError("delay buffer: read of step " + std::to_string(s) + " before it was written (" +
                            std::to_string(written_) + " written)");
    if (slots_.empty() || written_ - s > slots_.size())
      throw Error("delay buffer: step " + std::to_string(s) + " already evicted");
    return *slots_[s % slots_.size()];
  }

 private:
  std::vector<std::optional<T>> slots_;
  std::size_t written_ = 0;
};

}  // namespace tskip
