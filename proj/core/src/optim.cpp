#include "tskip/optim.hpp"

#include <cmath>
#include <numbers>

#include "tskip/error.hpp"

namespace tskip {

void adam_step(std::vector<Parameter>& params, const std::vector<const Tensor*>& grads, AdamState& state,
               double lr) {
  if (grads.size() != params.size()) throw DimensionError("adam_step: gradient count differs from parameter count");
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.value.shape(), 0.0);
      state.v.emplace_back(p.value.shape(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw DimensionError("adam_step: optimizer state does not match parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!grads[i]) continue;
    if (grads[i]->shape() != params[i].value.shape())
      throw DimensionError("adam_step: gradient shape mismatch for " + params[i].name);
    if (!grads[i]->all_finite()) throw NumericError("non-finite gradient for parameter " + params[i].name);
  }

  ++state.step;
  const auto& c = state.cfg;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!grads[i] || !params[i].trainable) continue;
    auto w = params[i].value.data();
    auto g = grads[i]->data();
    auto m = state.m[i].data();
    auto v = state.v[i].data();
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      const double mh = m[j] / bc1;
      const double vh = v[j] / bc2;
      w[j] -= lr * mh / (std::sqrt(vh) + c.eps);
    }
  }
}

double clip_global_norm(std::vector<Tensor>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads)
    for (double x : g.data()) sq += x * x;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double f = max_norm / norm;
    for (auto& g : grads)
      for (double& x : g.data()) x *= f;
  }
  return norm;
}

double cosine_lr(const SchedulerConfig& s, std::size_t k) {
  if (s.period == 0) return s.lr_init;
  const double kk = static_cast<double>(std::min(k, s.period));
  return s.min_lr + 0.5 * (s.lr_init - s.min_lr) * (1.0 + std::cos(std::numbers::pi * kk / static_cast<double>(s.period)));
}

double multistep_lr(const SchedulerConfig& s, std::size_t epoch) {
  const std::size_t every = s.every_n_epochs ? s.every_n_epochs : 1;
  return s.lr_init * std::pow(s.gamma, static_cast<double>(epoch / every));
}

double lr_at(const SchedulerConfig& s, std::size_t epoch, std::size_t iteration) {
  switch (s.kind) {
    case SchedulerKind::Cosine:
      return cosine_lr(s, iteration / (s.step_every ? s.step_every : 1));
    case SchedulerKind::Multistep:
      return multistep_lr(s, epoch);
    case SchedulerKind::Constant:
      break;
  }
  return s.lr_init;
}

std::string to_string(SchedulerKind k) {
  switch (k) {
    case SchedulerKind::Cosine: return "cosine";
    case SchedulerKind::Multistep: return "multistep";
    case SchedulerKind::Constant: return "constant";
  }
  return "?";
}

SchedulerKind parse_scheduler(const std::string& s) {
  if (s == "cosine") return SchedulerKind::Cosine;
  if (s == "multistep") return SchedulerKind::Multistep;
  if (s == "constant") return SchedulerKind::Constant;
  throw ParseError("unknown scheduler '" + s + "' (expected cosine, multistep or constant)");
}

}  // namespace tskip
