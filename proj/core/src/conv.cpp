#include <algorithm>

#include "tskip/error.hpp"
#include "tskip/ops.hpp"

namespace tskip {
namespace {

struct ConvGeometry {
  std::size_t batch, in_c, h, w;
  std::size_t out_c, kh, kw;
  std::size_t stride, oh, ow;
  std::size_t pad_top, pad_left;
};

ConvGeometry geometry(const Tensor& x, const Tensor& k, std::size_t stride) {
  if (x.rank() != 4 || k.rank() != 4)
    throw DimensionError("conv2d: expected x [B,C,H,W] and kernel [O,C,KH,KW], got " + to_string(x.shape()) +
                         " and " + to_string(k.shape()));
  if (stride == 0) throw DimensionError("conv2d: stride must be positive");
  if (x.dim(1) != k.dim(1))
    throw DimensionError("conv2d: input has " + std::to_string(x.dim(1)) + " channels, kernel expects " +
                         std::to_string(k.dim(1)));
  ConvGeometry g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), k.dim(0), k.dim(2), k.dim(3), stride, 0, 0, 0, 0};
  g.oh = same_output_size(g.h, stride);
  g.ow = same_output_size(g.w, stride);
  const auto pad_total = [](std::size_t out, std::size_t s, std::size_t kernel, std::size_t in) {
    const std::size_t need = (out - 1) * s + kernel;
    return need > in ? need - in : std::size_t{0};
  };
  const std::size_t ph = pad_total(g.oh, stride, g.kh, g.h);
  const std::size_t pw = pad_total(g.ow, stride, g.kw, g.w);
  if (g.kh > g.h + ph || g.kw > g.w + pw) throw DimensionError("conv2d: kernel larger than padded input");
  g.pad_top = ph / 2;
  g.pad_left = pw / 2;
  return g;
}

// Calls f(x_index, k_index, out_index) for every valid tap.
template <class F>
void for_each_tap(const ConvGeometry& g, F&& f) {
  for (std::size_t b = 0; b < g.batch; ++b)
    for (std::size_t o = 0; o < g.out_c; ++o)
      for (std::size_t oy = 0; oy < g.oh; ++oy)
        for (std::size_t ox = 0; ox < g.ow; ++ox) {
          const std::size_t out_idx = ((b * g.out_c + o) * g.oh + oy) * g.ow + ox;
          for (std::size_t c = 0; c < g.in_c; ++c)
            for (std::size_t ky = 0; ky < g.kh; ++ky) {
              const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                        static_cast<std::ptrdiff_t>(g.pad_top);
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
              for (std::size_t kx = 0; kx < g.kw; ++kx) {
                const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                                          static_cast<std::ptrdiff_t>(g.pad_left);
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) continue;
                const std::size_t x_idx = ((b * g.in_c + c) * g.h + static_cast<std::size_t>(iy)) * g.w +
                                          static_cast<std::size_t>(ix);
                const std::size_t k_idx = ((o * g.in_c + c) * g.kh + ky) * g.kw + kx;
                f(x_idx, k_idx, out_idx);
              }
            }
        }
}

}  // namespace

std::size_t same_output_size(std::size_t in, std::size_t stride) { return (in + stride - 1) / stride; }

Var conv2d(Tape& tape, Var x, Var kernel, std::size_t stride) {
  const Tensor& X = tape.value(x);
  const Tensor& K = tape.value(kernel);
  const ConvGeometry g = geometry(X, K, stride);
  Tensor out({g.batch, g.out_c, g.oh, g.ow}, 0.0);
  const double* px = X.data().data();
  const double* pk = K.data().data();
  double* po = out.data().data();
  for_each_tap(g, [&](std::size_t xi, std::size_t ki, std::size_t oi) { po[oi] += px[xi] * pk[ki]; });
  return tape.record(std::move(out), {x, kernel}, [x, kernel, g](const Tape& t, const Tensor& grad, std::span<Tensor* const> grads) {
    const double* px = t.value(x).data().data();
    const double* pk = t.value(kernel).data().data();
    const double* pg = grad.data().data();
    double* dx = grads[0] ? grads[0]->data().data() : nullptr;
    double* dk = grads[1] ? grads[1]->data().data() : nullptr;
    for_each_tap(g, [&](std::size_t xi, std::size_t ki, std::size_t oi) {
      if (dx) dx[xi] += pg[oi] * pk[ki];
      if (dk) dk[ki] += pg[oi] * px[xi];
    });
  });
}

}  // namespace tskip
