#include <algorithm>
#include <cmath>

#include "tskip/data.hpp"
#include "tskip/error.hpp"
#include "tskip/rng.hpp"

namespace tskip {

DelayedRecallSet gen_delayed_recall(const DelayedRecallConfig& cfg) {
  const std::size_t T = cfg.T, D = cfg.delay, C = cfg.classes;
  if (C < 2) throw Error("delayed recall needs at least 2 classes");
  if (T < 2) throw Error("delayed recall needs T >= 2");
  if (D >= T) throw Error("delayed recall: delay " + std::to_string(D) + " must be below T " + std::to_string(T));
  if (cfg.samples == 0) throw Error("delayed recall: zero samples");
  if (!(cfg.distractor_rate >= 0.0 && cfg.distractor_rate <= 1.0)) throw Error("distractor_rate must lie in [0,1]");

  Rng rng(derive_seed(cfg.seed, "delayed_recall"));
  const std::size_t channels = C + 1;

  std::vector<int> labels(cfg.samples);
  for (std::size_t i = 0; i < cfg.samples; ++i) labels[i] = static_cast<int>(i % C);
  shuffle(labels.begin(), labels.end(), rng);

  DelayedRecallSet out;
  out.data.sample_shape = {channels};
  out.data.T = T;
  out.data.num_classes = C;
  out.data.samples.reserve(cfg.samples);
  out.token_steps.reserve(cfg.samples);

  for (std::size_t i = 0; i < cfg.samples; ++i) {
    const int label = labels[i];
    const auto t0 = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(T - D - 1)));
    const std::size_t cue = t0 + D;

    // Free steps: everything except the labelled token and the cue.
    std::vector<std::size_t> free_steps;
    for (std::size_t t = 0; t < T; ++t)
      if (t != t0 && t != cue) free_steps.push_back(t);
    shuffle(free_steps.begin(), free_steps.end(), rng);
    const auto n_distract = static_cast<std::size_t>(std::llround(cfg.distractor_rate * static_cast<double>(free_steps.size())));
    free_steps.resize(n_distract);

    // Balanced token multiset including the label: every class appears
    // floor(n/C) times, the remainder goes to distinct random classes.
    const std::size_t n_tokens = n_distract + 1;
    std::vector<int> tokens;
    tokens.reserve(n_tokens);
    for (std::size_t k = 0; k < n_tokens / C; ++k)
      for (std::size_t c = 0; c < C; ++c) tokens.push_back(static_cast<int>(c));
    std::vector<int> classes(C);
    for (std::size_t c = 0; c < C; ++c) classes[c] = static_cast<int>(c);
    shuffle(classes.begin(), classes.end(), rng);
    for (std::size_t k = 0; k < n_tokens % C; ++k) tokens.push_back(classes[k]);
    auto it = std::find(tokens.begin(), tokens.end(), label);
    if (it == tokens.end()) {
      tokens.front() = label;
      it = tokens.begin();
    }
    tokens.erase(it);
    shuffle(tokens.begin(), tokens.end(), rng);

    Tensor x({T, channels}, 0.0);
    x[t0 * channels + static_cast<std::size_t>(label)] = 1.0;
    x[cue * channels + C] = 1.0;
    for (std::size_t k = 0; k < free_steps.size(); ++k)
      x[free_steps[k] * channels + static_cast<std::size_t>(tokens[k])] = 1.0;
    if (cfg.noise_rate > 0.0) x = inject_noise(x, cfg.noise_rate, derive_seed(cfg.seed, "recall_noise", i));

    out.data.samples.push_back({std::move(x), label});
    out.token_steps.push_back(t0);
  }
  return out;
}

}  // namespace tskip
