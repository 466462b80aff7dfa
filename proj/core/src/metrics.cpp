#include "tskip/metrics.hpp"

#include <cmath>

#include "tskip/error.hpp"

namespace tskip {

std::size_t argmax_row(const Tensor& logits, std::size_t row) {
  const std::size_t C = logits.dim(1);
  const double* p = logits.data().data() + row * C;
  std::size_t best = 0;
  for (std::size_t c = 1; c < C; ++c)
    if (p[c] > p[best]) best = c;
  return best;
}

double accuracy(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2) throw DimensionError("accuracy: logits must be [batch, classes], got " + to_string(logits.shape()));
  if (logits.dim(0) != labels.size()) throw DimensionError("accuracy: batch size differs from label count");
  if (labels.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t b = 0; b < labels.size(); ++b)
    if (labels[b] >= 0 && argmax_row(logits, b) == static_cast<std::size_t>(labels[b])) ++hits;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double aee(const Tensor& pred, const Tensor& gt) {
  if (pred.shape() != gt.shape()) throw DimensionError("aee: shape mismatch " + to_string(pred.shape()) + " vs " + to_string(gt.shape()));
  if (pred.rank() != 2 || pred.dim(1) != 2) throw DimensionError("aee: expected [n, 2] flow vectors");
  const std::size_t n = pred.dim(0);
  if (n == 0) throw DimensionError("aee: no flow vectors");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += std::hypot(pred[2 * i] - gt[2 * i], pred[2 * i + 1] - gt[2 * i + 1]);
  return total / static_cast<double>(n);
}

}  // namespace tskip
