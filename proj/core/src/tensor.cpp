#include "tskip/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tskip/error.hpp"

namespace tskip {

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(numel(shape_), fill) {
  for (auto d : shape_)
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + to_string(shape_));
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  for (auto d : shape_)
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + to_string(shape_));
  if (numel(shape_) != data_.size())
    throw DimensionError("shape " + to_string(shape_) + " does not hold " + std::to_string(data_.size()) +
                         " values");
}

Tensor Tensor::scalar(double value) { return Tensor({1}, std::vector<double>{value}); }

Tensor Tensor::from(std::initializer_list<std::size_t> shape, std::initializer_list<double> values) {
  return Tensor(Shape(shape), std::vector<double>(values));
}

double Tensor::item() const {
  if (data_.size() != 1) throw DimensionError("item() on tensor of shape " + to_string(shape_));
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  Tensor out(std::move(shape), data_);
  out.requires_grad_ = requires_grad_;
  return out;
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Tensor take_leading(const Tensor& t, std::size_t index) {
  if (t.rank() < 2) throw DimensionError("take_leading needs rank >= 2, got " + to_string(t.shape()));
  if (index >= t.dim(0)) throw DimensionError("take_leading index out of range");
  Shape rest(t.shape().begin() + 1, t.shape().end());
  const std::size_t n = numel(rest);
  auto first = t.data().begin() + static_cast<std::ptrdiff_t>(index * n);
  return Tensor(std::move(rest), std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n)));
}

Tensor stack(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("stack of zero tensors");
  Shape shape = parts[0].shape();
  std::vector<double> data;
  data.reserve(parts.size() * parts[0].size());
  for (const auto& p : parts) {
    if (p.shape() != shape) throw DimensionError("stack: mismatched shapes");
    data.insert(data.end(), p.data().begin(), p.data().end());
  }
  shape.insert(shape.begin(), parts.size());
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace tskip
