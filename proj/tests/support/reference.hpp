#pragma once

// Straight-line reference executors written independently of run_forward.
// They cover dense layers only and use plain loops over std::vector.

#include <cmath>
#include <vector>

#include "tskip/network.hpp"

namespace tskip::testing {

using Matrix = std::vector<std::vector<double>>;  // [batch][features]

/// y[b][j] = sum_k x[b][k] w[k][j] (+ bias), accumulating k in ascending
/// order and skipping zero inputs, the same order run_forward uses.
inline Matrix ref_affine(const Matrix& x, const Tensor& w, const Tensor* bias) {
  const std::size_t in = w.dim(0), out = w.dim(1);
  Matrix y(x.size(), std::vector<double>(out, 0.0));
  for (std::size_t b = 0; b < x.size(); ++b) {
    for (std::size_t k = 0; k < in; ++k) {
      const double xv = x[b][k];
      if (xv == 0.0) continue;
      for (std::size_t j = 0; j < out; ++j) y[b][j] += xv * w[k * out + j];
    }
    if (bias)
      for (std::size_t j = 0; j < out; ++j) y[b][j] += (*bias)[j];
  }
  return y;
}

inline const Tensor* param(const Network& net, std::ptrdiff_t slot) {
  return slot < 0 ? nullptr : &net.parameters()[static_cast<std::size_t>(slot)].value;
}

/// Feed-forward unrolled network of dense LIF / integrator layers (no BNTT,
/// no skips, hard spikes, soft or hard reset). With `residual_into` > 0 the
/// layer with that number also receives the output of layer
/// residual_into - 2 (0 = input) added to its input, which is what a
/// zero-delay additive skip computes.
inline std::vector<Matrix> ref_unrolled(const Network& net, const Tensor& input, std::size_t residual_into = 0) {
  const ArchSpec& spec = net.spec();
  const std::size_t T = spec.T, B = input.dim(1), F = input.dim(2);
  std::vector<Matrix> U(spec.depth()), O(spec.depth());
  std::vector<Matrix> outputs;
  for (std::size_t t = 0; t < T; ++t) {
    Matrix x(B, std::vector<double>(F));
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t f = 0; f < F; ++f) x[b][f] = input[(t * B + b) * F + f];
    std::vector<Matrix> node{x};
    for (std::size_t i = 0; i < spec.depth(); ++i) {
      const auto& L = spec.layers[i];
      const auto& s = net.slots(i + 1);
      Matrix in = node.back();
      if (residual_into == i + 1) {
        const Matrix& skip = node[i - 1];
        for (std::size_t b = 0; b < B; ++b)
          for (std::size_t f = 0; f < in[b].size(); ++f) in[b][f] += skip[b][f];
      }
      Matrix a = ref_affine(in, *param(net, s.weight), param(net, s.bias));
      const double leak = (*param(net, s.leak))[0];
      if (U[i].empty()) {
        U[i] = Matrix(B, std::vector<double>(L.units, 0.0));
        O[i] = U[i];
      }
      Matrix y(B, std::vector<double>(L.units));
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t j = 0; j < L.units; ++j) {
          double& u = U[i][b][j];
          if (L.activation == Activation::Integrator) {
            u = leak * u + a[b][j];
            y[b][j] = u;
            continue;
          }
          const double th = (*param(net, s.threshold))[0];
          if (L.lif.reset == ResetMode::Soft) {
            u = leak * u + a[b][j] - th * O[i][b][j];
          } else {
            u = leak * (u * (1.0 - O[i][b][j])) + a[b][j];
          }
          y[b][j] = u / th - 1.0 > 0.0 ? 1.0 : 0.0;
          O[i][b][j] = y[b][j];
        }
      node.push_back(y);
    }
    outputs.push_back(node.back());
  }
  return outputs;
}

}  // namespace tskip::testing
