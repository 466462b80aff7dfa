#pragma once

#include <span>

#include "tskip/tensor.hpp"

namespace tskip {

/// Fraction of rows of logits [B, C] whose argmax equals the label; ties go
/// to the lowest class index.
double accuracy(const Tensor& logits, std::span<const int> labels);

/// Index of the largest value of row `row` of a [B, C] tensor (lowest on ties).
std::size_t argmax_row(const Tensor& logits, std::size_t row);

/// Average endpoint error between flow fields [n, 2].
double aee(const Tensor& pred, const Tensor& gt);

}  // namespace tskip
