#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "tskip/tensor.hpp"

namespace tskip {

/// Handle to a value recorded on a Tape.
struct Var {
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  std::uint32_t id = kNone;

  bool valid() const { return id != kNone; }
  friend bool operator==(Var, Var) = default;
};

class Tape;
class Gradients;
Gradients backward(const Tape& tape, Var loss);

/// Backward rule of a recorded op. `input_grads[i]` is null when input i
/// needs no gradient; otherwise the rule accumulates into it.
using BackwardFn =
    std::function<void(const Tape& tape, const Tensor& out_grad, std::span<Tensor* const> input_grads)>;

/// Append-only record of a computation. Node order is topological by
/// construction: an op can only reference vars that already exist.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  /// Leaf whose gradient is reported if `value.requires_grad()`.
  Var leaf(Tensor value);
  /// Leaf that never receives a gradient.
  Var constant(Tensor value);

  Var record(Tensor value, std::vector<Var> inputs, BackwardFn backward);

  const Tensor& value(Var v) const;
  const Shape& shape(Var v) const { return value(v).shape(); }
  bool requires_grad(Var v) const;
  std::span<const Var> inputs(Var v) const;
  bool is_leaf(Var v) const;
  std::size_t size() const { return nodes_.size(); }

 private:
  friend class Gradients;
  friend Gradients backward(const Tape& tape, Var loss);

  struct Node {
    Tensor value;
    std::vector<Var> inputs;
    BackwardFn backward;
    bool requires_grad = false;
    bool leaf = false;
  };
  const Node& node(Var v) const;

  std::vector<Node> nodes_;
};

/// Gradients of a scalar loss with respect to every requires_grad leaf.
class Gradients {
 public:
  /// Null if `v` is not a requires_grad leaf reached by the loss.
  const Tensor* find(Var v) const;
  /// Gradient of `v`, or zeros of its shape if the loss does not depend on it.
  Tensor get(const Tape& tape, Var v) const;

 private:
  friend Gradients backward(const Tape& tape, Var loss);
  std::vector<std::uint32_t> index_;  // var id -> slot + 1, 0 = absent
  std::vector<Tensor> grads_;
};

/// Reverse sweep over the tape from a scalar `loss`.
Gradients backward(const Tape& tape, Var loss);

}  // namespace tskip
