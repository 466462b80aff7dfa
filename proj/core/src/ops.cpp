#include "tskip/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tskip/error.hpp"

namespace tskip {
namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
}

const Tensor& one_element(const Tape& tape, Var v, const char* op) {
  const Tensor& t = tape.value(v);
  if (t.size() != 1) throw DimensionError(std::string(op) + ": expected a one-element tensor, got " + to_string(t.shape()));
  return t;
}

// Batch rows (dim 0), channels (dim 1) and the flattened remainder.
struct ChannelLayout {
  std::size_t outer;
  std::size_t channels;
  std::size_t inner;
};

ChannelLayout channel_layout(const Shape& s, const char* op) {
  if (s.size() < 2) throw DimensionError(std::string(op) + ": need rank >= 2, got " + to_string(s));
  std::size_t inner = 1;
  for (std::size_t i = 2; i < s.size(); ++i) inner *= s[i];
  return {s[0], s[1], inner};
}

}  // namespace

double surrogate_grad(double z, const SurrogateConfig& cfg) {
  const double u = std::numbers::pi / 2.0 * cfg.alpha * z;
  return cfg.alpha / (2.0 * (1.0 + u * u));
}

double surrogate_primitive(double z, const SurrogateConfig& cfg) {
  return std::atan(std::numbers::pi / 2.0 * cfg.alpha * z) / std::numbers::pi + 0.5;
}

Var matmul(Tape& tape, Var a, Var b) {
  const Tensor& A = tape.value(a);
  const Tensor& B = tape.value(b);
  if (A.rank() != 2 || B.rank() != 2 || A.dim(1) != B.dim(0))
    throw DimensionError("matmul: cannot multiply " + to_string(A.shape()) + " by " + to_string(B.shape()));
  const std::size_t m = A.dim(0), k = A.dim(1), n = B.dim(1);
  Tensor C({m, n}, 0.0);
  const double* pa = A.data().data();
  const double* pb = B.data().data();
  double* pc = C.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = pc + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      if (av == 0.0) continue;
      const double* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return tape.record(std::move(C), {a, b}, [a, b, m, k, n](const Tape& t, const Tensor& g, std::span<Tensor* const> grads) {
    const double* pa = t.value(a).data().data();
    const double* pb = t.value(b).data().data();
    const double* pg = g.data().data();
    if (grads[0]) {
      double* da = grads[0]->data().data();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          const double* grow = pg + i * n;
          const double* brow = pb + p * n;
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          da[i * k + p] += acc;
        }
    }
    if (grads[1]) {
      double* db = grads[1]->data().data();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double av = pa[i * k + p];
          if (av == 0.0) continue;
          const double* grow = pg + i * n;
          double* drow = db + p * n;
          for (std::size_t j = 0; j < n; ++j) drow[j] += av * grow[j];
        }
    }
  });
}

Var add(Tape& tape, Var a, Var b) {
  const Tensor& A = tape.value(a);
  const Tensor& B = tape.value(b);
  require_same_shape(A, B, "add");
  Tensor out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += B[i];
  return tape.record(std::move(out), {a, b}, [](const Tape&, const Tensor& g, std::span<Tensor* const> grads) {
    for (Tensor* d : grads)
      if (d)
        for (std::size_t i = 0; i < g.size(); ++i) (*d)[i] += g[i];
  });
}

Var sub(Tape& tape, Var a, Var b) {
  const Tensor& A = tape.value(a);
  const Tensor& B = tape.value(b);
  require_same_shape(A, B, "sub");
  Tensor out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= B[i];
  return tape.record(std::move(out), {a, b}, [](const Tape&, const Tensor& g, std::span<Tensor* const> grads) {
    if (grads[0])
      for (std::size_t i = 0; i < g.size(); ++i) (*grads[0])[i] += g[i];
    if (grads[1])
      for (std::size_t i = 0; i < g.size(); ++i) (*grads[1])[i] -= g[i];
  });
}

Var mul(Tape& tape, Var a, Var b) {
  const Tensor& A = tape.value(a);
  const Tensor& B = tape.value(b);
  require_same_shape(A, B, "mul");
  Tensor out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= B[i];
  return tape.record(std::move(out), {a, b}, [a, b](const Tape& t, const Tensor& g, std::span<Tensor* const> grads) {
    const Tensor& A = t.value(a);
    const Tensor& B = t.value(b);
    if (grads[0])
      for (std::size_t i = 0; i < g.size(); ++i) (*grads[0])[i] += g[i] * B[i];
    if (grads[1])
      for (std::size_t i = 0; i < g.size(); ++i) (*grads[1])[i] += g[i] * A[i];
  });
}

Var add_n(Tape& tape, std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("add_n: no inputs");
  Tensor out = tape.value(parts[0]);
  for (std::size_t p = 1; p < parts.size(); ++p) {
    const Tensor& X = tape.value(parts[p]);
    require_same_shape(out, X, "add_n");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += X[i];
  }
  return tape.record(std::move(out), std::vector<Var>(parts.begin(), parts.end()),
                     [](const Tape&, const Tensor& g, std::span<Tensor* const> grads) {
                       for (Tensor* d : grads)
                         if (d)
                           for (std::size_t i = 0; i < g.size(); ++i) (*d)[i] += g[i];
                     });
}

Var scale(Tape& tape, Var x, double factor) {
  Tensor out = tape.value(x);
  for (auto& v : out.data()) v *= factor;
  return tape.record(std::move(out), {x}, [factor](const Tape&, const Tensor& g, std::span<Tensor* const> grads) {
    for (std::size_t i = 0; i < g.size(); ++i) (*grads[0])[i] += g[i] * factor;
  });
}

Var mul_scalar(Tape& tape, Var x, Var s) {
  const double sv = one_element(tape, s, "mul_scalar").item();
  Tensor out = tape.value(x);
  for (auto& v : out.data()) v *= sv;
  return tape.record(std::move(out), {x, s}, [x, s](const Tape& t, const Tensor& g, std::span<Tensor* const> grads) {
    const Tensor& X = t.value(x);
    const double sv = t.value(s).item();
    if (grads[0])
      for (std::size_t i = 0; i < g.size(); ++i) (*grads[0])[i] += g[i] * sv;
    if (grads[1]) {
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * X[i];
      (*grads[1])[0] += acc;
    }
  });
}

Var mix(Tape& tape, Var alpha, Var a, Var b) {
  const double al = one_element(tape, alpha, "mix").item();
  const Tensor& A = tape.value(a);
  const Tensor& B = tape.value(b);
  require_same_shape(A, B, "mix");
  Tensor out(A.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = al * A[i] + (1.0 - al) * B[i];
  return tape.record(std::move(out), {alpha, a, b},
                     [alpha, a, b](const Tape& t, const Tensor& g, std::span<Tensor* const> grads) {
                       const double al = t.value(alpha).item();
                       const Tensor& A = t.value(a);
                       const Tensor& B = t.value(b);
                       if (grads[0]) {
                         double acc = 0.0;
                         for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * (A[i] - B[i]);
                         (*grads[0])[0] += acc;
                       }
                       if (grads[1])
                         for (std::size_t i = 0; i < g.size(); ++i) (*grads[1])[i] += g[i] * al;
                       if (grads[2])
                         for (std::size_t i = 0; i < g.size(); ++i) (*grads[2])[i] += g[i] * (1.0 - al);
                     });
}

Var add_bias(Tape& tape, Var x, Var bias) {
  const Tensor& X = tape.value(x);
  const Tensor& Bv = tape.value(bias);
  const auto L = channel_layout(X.shape(), "add_bias");
  if (Bv.size() != L.channels)
    throw DimensionError("add_bias: bias of " + std::to_string(Bv.size()) + " for " + std::to_string(L.channels) +
                         " channels");
  Tensor out = X;
  double* po = out.data().data();
  for (std::size_t o = 0; o < L.outer; ++o)
    for (std::size_t c = 0; c < L.channels; ++c) {
      double* p = po + (o * L.channels + c) * L.inner;
      for (std::size_t i = 0; i < L.inner; ++i) p[i] += Bv[c];
    }
  return tape.record(std::move(out), {x, bias}, [L](const Tape&, const Tensor& g, std::span<Tensor* const> grads) {
    if (grads[0])
      for (std::size_t i = 0; i < g.size(); ++i) (*grads[0])[i] += g[i];
    if (grads[1]) {
      const double* pg = g.data().data();
      for (std::size_t o = 0; o < L.outer; ++o)
        for (std::size_t c = 0; c < L.channels; ++c) {
          const double* p = pg + (o * L.channels + c) * L.inner;
          double acc = 0.0;
          for (std::size_t i = 0; i < L.inner; ++i) acc += p[i];
          (*grads[1])[c] += acc;
        }
    }
  });
}

Var relu(Tape& tape, Var x) {
  Tensor out = tape.value(x);
  for (auto& v : out.data()) v = v > 0.0 ? v : 0.0;
  return tape.record(std::move(out), {x}, [x](const Tape& t, const Tensor& g, std::span<Tensor* const> grads) {
    const Tensor& X = t.value(x);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (X[i] > 0.0) (*grads[0])[i] += g[i];
  });
}

Var sigmoid(Tape& tape, Var x) {
  Tensor out = tape.value(x);
  for (auto& v : out.data()) v = 1.0 / (1.0 + std::exp(-v));
  Tensor saved = out;
  return tape.record(std::move(out), {x},
                     [saved = std::move(saved)](const Tape&, const Tensor& g, std::span<Tensor* const> grads) {
                       for (std::size_t i = 0; i < g.size(); ++i) (*grads[0])[i] += g[i] * saved[i] * (1.0 - saved[i]);
                     });
}

Var flatten(Tape& tape, Var x) {
  const Tensor& X = tape.value(x);
  if (X.rank() < 2) throw DimensionError("flatten: need rank >= 2");
  if (X.rank() == 2) return x;
  Tensor out = X.reshaped({X.dim(0), X.size() / X.dim(0)});
  out.set_requires_grad(false);
  return tape.record(std::move(out), {x}, [](const Tape&, const Tensor& g, std::span<Tensor* const> grads) {
    for (std::size_t i = 0; i < g.size(); ++i) (*grads[0])[i] += g[i];
  });
}

Var spike(Tape& tape, Var z, const SurrogateConfig& cfg, SpikeMode mode) {
  if (!(cfg.alpha > 0.0)) throw Error("surrogate alpha must be positive");
  Tensor out = tape.value(z);
  if (mode == SpikeMode::Hard) {
    for (auto& v : out.data()) v = v > 0.0 ? 1.0 : 0.0;
  } else {
    for (auto& v : out.data()) v = surrogate_primitive(v, cfg);
  }
  return tape.record(std::move(out), {z}, [z, cfg](const Tape& t, const Tensor& g, std::span<Tensor* const> grads) {
    const Tensor& Z = t.value(z);
    for (std::size_t i = 0; i < g.size(); ++i) (*grads[0])[i] += g[i] * surrogate_grad(Z[i], cfg);
  });
}

Var concat(Tape& tape, Var a, Var b) {
  const Tensor& A = tape.value(a);
  const Tensor& B = tape.value(b);
  const auto la = channel_layout(A.shape(), "concat");
  const auto lb = channel_layout(B.shape(), "concat");
  Shape sa = A.shape(), sb = B.shape();
  sa[1] = sb[1] = 0;
  if (sa != sb)
    throw DimensionError("concat: non-channel dims differ, " + to_string(A.shape()) + " vs " + to_string(B.shape()));
  Shape so = A.shape();
  so[1] = la.channels + lb.channels;
  Tensor out(so);
  const std::size_t na = la.channels * la.inner, nb = lb.channels * lb.inner;
  for (std::size_t o = 0; o < la.outer; ++o) {
    std::copy_n(A.data().data() + o * na, na, out.data().data() + o * (na + nb));
    std::copy_n(B.data().data() + o * nb, nb, out.data().data() + o * (na + nb) + na);
  }
  return tape.record(std::move(out), {a, b}, [na, nb, outer = la.outer](const Tape&, const Tensor& g, std::span<Tensor* const> grads) {
    for (std::size_t o = 0; o < outer; ++o) {
      const double* pg = g.data().data() + o * (na + nb);
      if (grads[0])
        for (std::size_t i = 0; i < na; ++i) (*grads[0])[o * na + i] += pg[i];
      if (grads[1])
        for (std::size_t i = 0; i < nb; ++i) (*grads[1])[o * nb + i] += pg[na + i];
    }
  });
}

Var select_channels(Tape& tape, Var x, std::span<const std::size_t> selection) {
  const Tensor& X = tape.value(x);
  const auto L = channel_layout(X.shape(), "select_channels");
  for (auto s : selection)
    if (s >= L.channels)
      throw DimensionError("select_channels: index " + std::to_string(s) + " out of " + std::to_string(L.channels));
  if (selection.empty()) throw DimensionError("select_channels: empty selection");
  Shape so = X.shape();
  so[1] = selection.size();
  Tensor out(so);
  const std::size_t nc = selection.size();
  for (std::size_t o = 0; o < L.outer; ++o)
    for (std::size_t c = 0; c < nc; ++c)
      std::copy_n(X.data().data() + (o * L.channels + selection[c]) * L.inner, L.inner,
                  out.data().data() + (o * nc + c) * L.inner);
  std::vector<std::size_t> sel(selection.begin(), selection.end());
  return tape.record(std::move(out), {x}, [L, sel = std::move(sel)](const Tape&, const Tensor& g, std::span<Tensor* const> grads) {
    const std::size_t nc = sel.size();
    for (std::size_t o = 0; o < L.outer; ++o)
      for (std::size_t c = 0; c < nc; ++c) {
        const double* pg = g.data().data() + (o * nc + c) * L.inner;
        double* pd = grads[0]->data().data() + (o * L.channels + sel[c]) * L.inner;
        for (std::size_t i = 0; i < L.inner; ++i) pd[i] += pg[i];
      }
  });
}

Var sum(Tape& tape, Var x) {
  double acc = 0.0;
  for (double v : tape.value(x).data()) acc += v;
  return tape.record(Tensor::scalar(acc), {x}, [](const Tape&, const Tensor& g, std::span<Tensor* const> grads) {
    const double gv = g[0];
    for (auto& d : grads[0]->data()) d += gv;
  });
}

Var mean(Tape& tape, Var x) {
  const Tensor& X = tape.value(x);
  double acc = 0.0;
  for (double v : X.data()) acc += v;
  const double n = static_cast<double>(X.size());
  return tape.record(Tensor::scalar(acc / n), {x}, [n](const Tape&, const Tensor& g, std::span<Tensor* const> grads) {
    const double gv = g[0] / n;
    for (auto& d : grads[0]->data()) d += gv;
  });
}

Var mse_loss(Tape& tape, Var pred, Var target) {
  const Tensor& P = tape.value(pred);
  const Tensor& T = tape.value(target);
  require_same_shape(P, T, "mse_loss");
  double acc = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i) acc += (P[i] - T[i]) * (P[i] - T[i]);
  const double n = static_cast<double>(P.size());
  return tape.record(Tensor::scalar(acc / n), {pred, target},
                     [pred, target, n](const Tape& t, const Tensor& g, std::span<Tensor* const> grads) {
                       const Tensor& P = t.value(pred);
                       const Tensor& T = t.value(target);
                       const double f = 2.0 * g[0] / n;
                       for (std::size_t i = 0; i < P.size(); ++i) {
                         const double d = f * (P[i] - T[i]);
                         if (grads[0]) (*grads[0])[i] += d;
                         if (grads[1]) (*grads[1])[i] -= d;
                       }
                     });
}

Var cross_entropy(Tape& tape, Var logits, std::span<const int> labels) {
  const Tensor& L = tape.value(logits);
  if (L.rank() != 2) throw DimensionError("cross_entropy: logits must be [batch, classes]");
  const std::size_t B = L.dim(0), C = L.dim(1);
  if (labels.size() != B) throw DimensionError("cross_entropy: label count differs from batch size");
  Tensor probs({B, C});
  double loss = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    const int y = labels[b];
    if (y < 0 || static_cast<std::size_t>(y) >= C) throw DimensionError("cross_entropy: label out of range");
    const double* row = L.data().data() + b * C;
    const double mx = *std::max_element(row, row + C);
    double z = 0.0;
    for (std::size_t c = 0; c < C; ++c) z += std::exp(row[c] - mx);
    for (std::size_t c = 0; c < C; ++c) probs[b * C + c] = std::exp(row[c] - mx) / z;
    loss += (mx + std::log(z)) - row[y];
  }
  std::vector<int> ys(labels.begin(), labels.end());
  return tape.record(Tensor::scalar(loss / static_cast<double>(B)), {logits},
                     [probs = std::move(probs), ys = std::move(ys), B, C](const Tape&, const Tensor& g, std::span<Tensor* const> grads) {
                       const double f = g[0] / static_cast<double>(B);
                       for (std::size_t b = 0; b < B; ++b)
                         for (std::size_t c = 0; c < C; ++c) {
                           const double target = static_cast<int>(c) == ys[b] ? 1.0 : 0.0;
                           (*grads[0])[b * C + c] += f * (probs[b * C + c] - target);
                         }
                     });
}

}  // namespace tskip
