#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace tskip {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

/// Dense row-major array of doubles.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double value);
  static Tensor from(std::initializer_list<std::size_t> shape, std::initializer_list<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  /// Value of a one-element tensor.
  double item() const;

  bool requires_grad() const { return requires_grad_; }
  void set_requires_grad(bool flag) { requires_grad_ = flag; }

  /// Same data, new shape with equal element count.
  Tensor reshaped(Shape shape) const;

  bool all_finite() const;
  void fill(double value);

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<double> data_;
  bool requires_grad_ = false;
};

/// Slice `index` along the leading axis; result drops that axis.
Tensor take_leading(const Tensor& t, std::size_t index);

/// Stack equally shaped tensors along a new leading axis.
Tensor stack(std::span<const Tensor> parts);

}  // namespace tskip
