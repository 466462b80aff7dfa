#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tskip/network.hpp"
#include "tskip/tensor.hpp"

namespace tskip {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig cfg{};
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::size_t step = 0;
};

/// One bias-corrected Adam update of `params` in place. Entries whose
/// gradient pointer is null (or parameters marked non-trainable) are skipped.
/// A non-finite gradient throws NumericError naming the parameter.
void adam_step(std::vector<Parameter>& params, const std::vector<const Tensor*>& grads, AdamState& state,
               double lr);

/// Scales gradients so their joint L2 norm is at most `max_norm`; returns the
/// norm before clipping.
double clip_global_norm(std::vector<Tensor>& grads, double max_norm);

enum class SchedulerKind { Cosine, Multistep, Constant };

struct SchedulerConfig {
  SchedulerKind kind = SchedulerKind::Cosine;
  double lr_init = 1e-3;
  // cosine
  double min_lr = 5e-6;
  /// Number of lr updates over the whole run (K). Zero means "derive from the
  /// training length".
  std::size_t period = 0;
  /// Minibatch iterations between cosine updates.
  std::size_t step_every = 10;
  // multistep
  double gamma = 0.7;
  std::size_t every_n_epochs = 10;
};

/// Cosine: lr at update index k (clamped to period). Multistep: lr at `epoch`.
double cosine_lr(const SchedulerConfig& s, std::size_t k);
double multistep_lr(const SchedulerConfig& s, std::size_t epoch);
/// Learning rate used for minibatch `iteration` (0-based, global) in `epoch`.
double lr_at(const SchedulerConfig& s, std::size_t epoch, std::size_t iteration);

std::string to_string(SchedulerKind k);
SchedulerKind parse_scheduler(const std::string& s);

}  // namespace tskip
