#include <cmath>

#include "tskip/error.hpp"
#include "tskip/ops.hpp"

namespace tskip {

Var bntt_step(Tape& tape, Var x, BnStats& stats, Var gamma, Var beta, bool training, const BnConfig& cfg) {
  const Tensor& X = tape.value(x);
  if (X.rank() < 2) throw DimensionError("bntt: need [batch, channels, ...]");
  const std::size_t B = X.dim(0), C = X.dim(1);
  const std::size_t inner = X.size() / (B * C);
  const Tensor& G = tape.value(gamma);
  const Tensor& Be = tape.value(beta);
  if (G.size() != C || Be.size() != C || stats.mean.size() != C || stats.var.size() != C)
    throw DimensionError("bntt: parameter length does not match " + std::to_string(C) + " channels");
  if (training && B < 2) throw DimensionError("bntt: training requires a batch of at least 2");

  const double count = static_cast<double>(B * inner);
  std::vector<double> mu(C), inv_std(C);
  for (std::size_t c = 0; c < C; ++c) {
    if (training) {
      double s = 0.0;
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t i = 0; i < inner; ++i) s += X[(b * C + c) * inner + i];
      const double m = s / count;
      double v = 0.0;
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t i = 0; i < inner; ++i) {
          const double d = X[(b * C + c) * inner + i] - m;
          v += d * d;
        }
      v /= count;
      mu[c] = m;
      inv_std[c] = 1.0 / std::sqrt(v + cfg.eps);
      const double unbiased = count > 1.0 ? v * count / (count - 1.0) : v;
      stats.mean[c] = (1.0 - cfg.momentum) * stats.mean[c] + cfg.momentum * m;
      stats.var[c] = (1.0 - cfg.momentum) * stats.var[c] + cfg.momentum * unbiased;
    } else {
      mu[c] = stats.mean[c];
      inv_std[c] = 1.0 / std::sqrt(stats.var[c] + cfg.eps);
    }
  }

  Tensor xhat(X.shape());
  Tensor out(X.shape());
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t i = 0; i < inner; ++i) {
        const std::size_t idx = (b * C + c) * inner + i;
        xhat[idx] = (X[idx] - mu[c]) * inv_std[c];
        out[idx] = G[c] * xhat[idx] + Be[c];
      }

  return tape.record(
      std::move(out), {x, gamma, beta},
      [gamma, xhat = std::move(xhat), inv_std = std::move(inv_std), B, C, inner, training](
          const Tape& t, const Tensor& g, std::span<Tensor* const> grads) {
        const Tensor& G = t.value(gamma);
        const double count = static_cast<double>(B * inner);
        for (std::size_t c = 0; c < C; ++c) {
          double sum_g = 0.0, sum_gx = 0.0;
          for (std::size_t b = 0; b < B; ++b)
            for (std::size_t i = 0; i < inner; ++i) {
              const std::size_t idx = (b * C + c) * inner + i;
              sum_g += g[idx];
              sum_gx += g[idx] * xhat[idx];
            }
          if (grads[1]) (*grads[1])[c] += sum_gx;
          if (grads[2]) (*grads[2])[c] += sum_g;
          if (!grads[0]) continue;
          const double k = G[c] * inv_std[c];
          for (std::size_t b = 0; b < B; ++b)
            for (std::size_t i = 0; i < inner; ++i) {
              const std::size_t idx = (b * C + c) * inner + i;
              if (training)
                (*grads[0])[idx] += k * (g[idx] - sum_g / count - xhat[idx] * sum_gx / count);
              else
                (*grads[0])[idx] += k * g[idx];
            }
        }
      });
}

}  // namespace tskip
