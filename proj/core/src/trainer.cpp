#include "tskip/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "tskip/error.hpp"
#include "tskip/metrics.hpp"
#include "tskip/rng.hpp"

namespace tskip {

std::string to_string(LossKind k) { return k == LossKind::Mse ? "mse" : "cross_entropy"; }

LossKind parse_loss(const std::string& s) {
  if (s == "mse") return LossKind::Mse;
  if (s == "cross_entropy" || s == "ce") return LossKind::CrossEntropy;
  throw ParseError("unknown loss '" + s + "' (expected mse or cross_entropy)");
}

Var classification_loss(Tape& tape, Var readout, std::span<const int> labels, LossKind kind) {
  if (kind == LossKind::CrossEntropy) return cross_entropy(tape, readout, labels);
  const Shape& s = tape.shape(readout);
  if (s.size() != 2 || s[0] != labels.size()) throw DimensionError("mse loss: readout/label batch mismatch");
  Tensor target(s, 0.0);
  for (std::size_t b = 0; b < labels.size(); ++b) {
    if (labels[b] < 0 || static_cast<std::size_t>(labels[b]) >= s[1]) throw DimensionError("mse loss: label out of range");
    target[b * s[1] + static_cast<std::size_t>(labels[b])] = 1.0;
  }
  return mse_loss(tape, readout, tape.constant(std::move(target)));
}

namespace {

double mean_spike_rate(const std::vector<LayerActivity>& act, std::size_t samples) {
  double spikes = 0.0, neurons = 0.0;
  for (const auto& a : act)
    if (a.spiking) {
      spikes += a.spikes;
      neurons += static_cast<double>(a.neurons);
    }
  return neurons > 0 && samples > 0 ? spikes / (neurons * static_cast<double>(samples)) : 0.0;
}

void accumulate(std::vector<LayerActivity>& into, const std::vector<LayerActivity>& from) {
  if (into.empty()) {
    into = from;
    return;
  }
  for (std::size_t i = 0; i < into.size(); ++i) into[i].spikes += from[i].spikes;
}

}  // namespace

EvalResult evaluate(Network& net, const Dataset& data, std::size_t batch_size, LossKind loss) {
  if (data.size() == 0) throw Error("evaluate: empty dataset");
  if (batch_size == 0) throw Error("evaluate: batch size must be positive");
  EvalResult r;
  double loss_sum = 0.0, correct = 0.0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    idx.clear();
    for (std::size_t i = start; i < std::min(data.size(), start + batch_size); ++i) idx.push_back(i);
    Tape tape;
    ForwardOptions opts;
    opts.mode = RunMode::Eval;
    const auto fwd = run_forward(net, tape, make_batch(data, idx), opts);
    const Var readout = accumulate_readout(tape, fwd);
    const auto labels = batch_labels(data, idx);
    const Var l = classification_loss(tape, readout, labels, loss);
    loss_sum += tape.value(l).item() * static_cast<double>(idx.size());
    correct += accuracy(tape.value(readout), labels) * static_cast<double>(idx.size());
    accumulate(r.activity, fwd.activity);
  }
  r.samples = data.size();
  r.loss = loss_sum / static_cast<double>(data.size());
  r.accuracy = correct / static_cast<double>(data.size());
  r.spike_rate = mean_spike_rate(r.activity, r.samples);
  return r;
}

TrainResult train(Network& net, const Dataset& train_set, const Dataset* test_set, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  if (train_set.size() == 0) throw Error("train: empty training set");
  if (cfg.batch_size == 0) throw Error("train: batch size must be positive");
  if (!(cfg.scheduler.lr_init > 0.0)) throw Error("train: initial learning rate must be positive");
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) throw Error("train: dropout must lie in [0,1)");

  const std::size_t n = train_set.size();
  const std::size_t iters_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  SchedulerConfig sched = cfg.scheduler;
  if (sched.kind == SchedulerKind::Cosine && sched.period == 0) {
    const std::size_t every = sched.step_every ? sched.step_every : 1;
    sched.period = std::max<std::size_t>(1, (cfg.epochs * iters_per_epoch + every - 1) / every);
  }

  AdamState adam;
  adam.cfg = cfg.adam;
  Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  std::size_t iteration = 0;
  auto emit = [&](const EpochMetrics& m) {
    result.log.push_back(m);
    if (on_epoch) on_epoch(m);
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0, correct = 0.0;
    std::size_t seen = 0;
    std::vector<LayerActivity> activity;
    double lr = lr_at(sched, epoch, iteration);

    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      // A single-sample batch cannot be normalized; it only happens as a remainder.
      if (end - start < 2 && seen > 0) break;
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      lr = lr_at(sched, epoch, iteration);

      Tape tape;
      ForwardOptions opts;
      opts.mode = RunMode::Train;
      opts.surrogate = cfg.surrogate;
      opts.dropout = cfg.dropout;
      opts.dropout_seed = derive_seed(cfg.seed, "dropout", iteration);
      const auto labels = batch_labels(train_set, idx);
      std::vector<Tensor> grads;
      ForwardResult fwd;
      double batch_loss = 0.0;
      Var readout;
      try {
        fwd = run_forward(net, tape, make_batch(train_set, idx), opts);
        readout = accumulate_readout(tape, fwd);
        const Var l = classification_loss(tape, readout, labels, cfg.loss);
        batch_loss = tape.value(l).item();
        const Gradients g = backward(tape, l);
        grads.reserve(fwd.param_vars.size());
        for (Var v : fwd.param_vars) grads.push_back(g.get(tape, v));
      } catch (const NumericError& e) {
        throw DivergenceError("training diverged at epoch " + std::to_string(epoch) + ", iteration " +
                              std::to_string(iteration) + ": " + e.what());
      }
      for (std::size_t i = 0; i < grads.size(); ++i)
        if (!grads[i].all_finite())
          throw DivergenceError("training diverged at epoch " + std::to_string(epoch) +
                                ": non-finite gradient for " + net.parameters()[i].name);
      if (cfg.grad_clip > 0.0) clip_global_norm(grads, cfg.grad_clip);
      std::vector<const Tensor*> ptrs;
      ptrs.reserve(grads.size());
      for (std::size_t i = 0; i < grads.size(); ++i) ptrs.push_back(net.parameters()[i].trainable ? &grads[i] : nullptr);
      adam_step(net.parameters(), ptrs, adam, lr);
      net.clamp_lif();

      const std::size_t b = idx.size();
      loss_sum += batch_loss * static_cast<double>(b);
      correct += accuracy(tape.value(readout), labels) * static_cast<double>(b);
      seen += b;
      accumulate(activity, fwd.activity);
      ++iteration;
    }

    emit({epoch, "train", loss_sum / static_cast<double>(seen), correct / static_cast<double>(seen),
          mean_spike_rate(activity, seen), lr});
    result.epochs_run = epoch + 1;

    if (test_set && test_set->size() > 0) {
      const EvalResult ev = evaluate(net, *test_set, cfg.eval_batch_size, cfg.loss);
      emit({epoch, "test", ev.loss, ev.accuracy, ev.spike_rate, lr});
      result.best_test_accuracy = std::max(result.best_test_accuracy, ev.accuracy);
      result.final_test_accuracy = ev.accuracy;
      if (cfg.target_accuracy > 0.0 && ev.accuracy >= cfg.target_accuracy) break;
    }
  }
  return result;
}

std::string metrics_csv_header() { return "epoch,split,loss,accuracy,spike_rate,lr"; }

std::string metrics_csv_row(const EpochMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu,%s,%.17g,%.17g,%.17g,%.17g", m.epoch, m.split.c_str(), m.loss, m.accuracy,
                m.spike_rate, m.lr);
  return buf;
}

}  // namespace tskip
