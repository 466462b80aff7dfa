#include "tskip/tape.hpp"

#include "tskip/error.hpp"

namespace tskip {

Var Tape::leaf(Tensor value) {
  if (!value.all_finite()) throw NumericError("non-finite leaf value of shape " + to_string(value.shape()));
  Node n;
  n.requires_grad = value.requires_grad();
  n.value = std::move(value);
  n.leaf = true;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant(Tensor value) {
  value.set_requires_grad(false);
  return leaf(std::move(value));
}

Var Tape::record(Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  if (!value.all_finite()) throw NumericError("operation produced non-finite values, shape " + to_string(value.shape()));
  bool needs = false;
  for (Var in : inputs) {
    if (!in.valid() || in.id >= nodes_.size()) throw Error("tape: op input is not on this tape");
    needs = needs || nodes_[in.id].requires_grad;
  }
  Node n;
  n.value = std::move(value);
  n.requires_grad = needs;
  if (needs) {
    n.inputs = std::move(inputs);
    n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) throw Error("tape: invalid var");
  return nodes_[v.id];
}

const Tensor& Tape::value(Var v) const { return node(v).value; }
bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }
std::span<const Var> Tape::inputs(Var v) const { return node(v).inputs; }
bool Tape::is_leaf(Var v) const { return node(v).leaf; }

const Tensor* Gradients::find(Var v) const {
  if (!v.valid() || v.id >= index_.size() || index_[v.id] == 0) return nullptr;
  return &grads_[index_[v.id] - 1];
}

Tensor Gradients::get(const Tape& tape, Var v) const {
  if (const Tensor* g = find(v)) return *g;
  return Tensor(tape.value(v).shape(), 0.0);
}

Gradients backward(const Tape& tape, Var loss) {
  const auto& loss_node = tape.node(loss);
  if (loss_node.value.size() != 1)
    throw DimensionError("backward: loss must be scalar, got shape " + to_string(loss_node.value.shape()));

  const std::size_t n = loss.id + 1;
  std::vector<Tensor> grads(n);
  grads[loss.id] = Tensor(loss_node.value.shape(), 1.0);

  Gradients out;
  out.index_.assign(n, 0);
  std::vector<Tensor*> slots;
  for (std::size_t i = n; i-- > 0;) {
    const auto& node = tape.nodes_[i];
    if (grads[i].empty() || !node.requires_grad) continue;
    if (node.leaf) {
      out.grads_.push_back(std::move(grads[i]));
      out.index_[i] = static_cast<std::uint32_t>(out.grads_.size());
      continue;
    }
    slots.assign(node.inputs.size(), nullptr);
    for (std::size_t k = 0; k < node.inputs.size(); ++k) {
      const Var in = node.inputs[k];
      if (!tape.nodes_[in.id].requires_grad) continue;
      if (grads[in.id].empty()) grads[in.id] = Tensor(tape.nodes_[in.id].value.shape(), 0.0);
      slots[k] = &grads[in.id];
    }
    // The same var may appear twice among the inputs; slots then alias, which is
    // what accumulation wants.
    node.backward(tape, grads[i], slots);
    grads[i] = Tensor();
  }
  return out;
}

}  // namespace tskip
