#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "tskip/data.hpp"
#include "tskip/network.hpp"
#include "tskip/optim.hpp"

namespace tskip {

enum class LossKind { CrossEntropy, Mse };

std::string to_string(LossKind k);
LossKind parse_loss(const std::string& s);

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  SchedulerConfig scheduler{};
  LossKind loss = LossKind::CrossEntropy;
  double dropout = 0.0;
  std::uint64_t seed = 0;
  /// Global gradient-norm ceiling; zero disables clipping.
  double grad_clip = 10.0;
  SurrogateConfig surrogate{};
  AdamConfig adam{};
  /// Stop once test accuracy reaches this value (0 disables).
  double target_accuracy = 0.0;
  std::size_t eval_batch_size = 100;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  std::string split;
  double loss = 0.0;
  double accuracy = 0.0;
  /// Mean spikes per LIF neuron per sample.
  double spike_rate = 0.0;
  double lr = 0.0;
};

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
  double spike_rate = 0.0;
  std::size_t samples = 0;
  /// Per layer, accumulated over every evaluated sample.
  std::vector<LayerActivity> activity;
};

struct TrainResult {
  std::vector<EpochMetrics> log;
  std::size_t epochs_run = 0;
  double best_test_accuracy = 0.0;
  double final_test_accuracy = 0.0;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Loss of readout [B, classes] against labels; MSE uses one-hot targets.
Var classification_loss(Tape& tape, Var readout, std::span<const int> labels, LossKind kind);

/// BPTT training with Adam. Evaluates `test` after every epoch when given.
/// Throws DivergenceError when the loss or a gradient becomes non-finite.
TrainResult train(Network& net, const Dataset& train_set, const Dataset* test_set, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

EvalResult evaluate(Network& net, const Dataset& data, std::size_t batch_size = 100,
                    LossKind loss = LossKind::CrossEntropy);

std::string metrics_csv_header();
std::string metrics_csv_row(const EpochMetrics& m);

}  // namespace tskip
