#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tskip/tensor.hpp"

namespace tskip {

/// One DVS event: pixel, timestamp in microseconds, polarity (0 = OFF, 1 = ON).
struct Event {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  std::int64_t t_us = 0;
  std::uint8_t p = 0;
  friend bool operator==(const Event&, const Event&) = default;
};

struct EventStream {
  std::vector<Event> events;
  std::size_t width = 0;
  std::size_t height = 0;
};

/// One spike of an audio cochlea-style recording: unit index and timestamp.
struct AudioSpike {
  std::uint32_t unit = 0;
  std::int64_t t_us = 0;
  friend bool operator==(const AudioSpike&, const AudioSpike&) = default;
};

struct AudioSpikeStream {
  std::vector<AudioSpike> spikes;
  std::size_t num_units = 700;
};

struct BinningConfig {
  std::size_t T = 1;
  /// Total duration covered by the T bins.
  std::int64_t window_us = 1;
  /// Separate ON/OFF channels for visual events (otherwise one merged channel).
  bool polarity_channels = true;
  /// Accumulate event counts instead of binary occupancy.
  bool count_mode = false;
};

/// Visual AER CSV: `x,y,t_us,p` per line, optional header, '#' comments.
/// When width/height are zero the sensor size is taken from the data.
EventStream parse_events(std::string_view text, std::size_t width = 0, std::size_t height = 0);
/// Audio CSV: `x,t_us` per line.
AudioSpikeStream parse_audio_spikes(std::string_view text, std::size_t num_units);

std::string format_events(const EventStream& stream);
std::string format_audio_spikes(const AudioSpikeStream& stream);

/// [T, 2 or 1, H, W]; cell = 1 if any event falls in it (or the count in count mode).
Tensor bin_events(const EventStream& stream, const BinningConfig& cfg);
/// [T, units].
Tensor bin_audio(const AudioSpikeStream& stream, const BinningConfig& cfg);
/// Bin index of timestamp t for a window split into T bins (clamped to T-1).
std::size_t bin_index(std::int64_t t_us, std::int64_t window_us, std::size_t T);

/// Inverse of bin_audio for a binary [T, units] tensor: one spike per active
/// cell, timestamped at the start of its bin.
AudioSpikeStream unbin_audio(const Tensor& spikes, std::int64_t bin_us);

/// Every zero cell flips to one with probability `rate`.
Tensor inject_noise(const Tensor& x, double rate, std::uint64_t seed);

// Datasets -----------------------------------------------------------------

struct Sample {
  /// [T, ...sample shape]
  Tensor spikes;
  int label = -1;
};

struct Dataset {
  Shape sample_shape;
  std::size_t T = 0;
  std::size_t num_classes = 0;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
};

/// Stacks samples into [T, batch, ...sample shape].
Tensor make_batch(const Dataset& data, std::span<const std::size_t> indices);
std::vector<int> batch_labels(const Dataset& data, std::span<const std::size_t> indices);

struct ManifestEntry {
  std::string file;
  int label = -1;
  std::string split = "train";
};

/// Lists sample files (relative to the manifest) and their labels.
struct Manifest {
  std::string kind = "audio";  // "audio" or "visual"
  std::size_t num_units = 0;   // audio
  std::size_t width = 0;       // visual
  std::size_t height = 0;
  std::size_t T = 1;
  std::int64_t window_us = 1;
  bool polarity_channels = true;
  std::size_t num_classes = 0;
  std::vector<ManifestEntry> entries;
};

Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& m, const std::filesystem::path& path);
/// Reads and bins every entry of `split` ("" for all).
Dataset load_dataset(const std::filesystem::path& manifest_path, const std::string& split);

// Synthetic tasks -------------------------------------------------------------

struct DelayedRecallConfig {
  std::size_t delay = 16;
  std::size_t T = 99;
  std::size_t samples = 1000;
  std::size_t classes = 10;
  /// Fraction of remaining steps that carry a distractor class token.
  double distractor_rate = 1.0;
  /// Bernoulli background noise applied after construction.
  double noise_rate = 0.0;
  std::uint64_t seed = 0;
};

/// Delayed recall. Channels 0..C-1 carry one-hot class tokens, channel C is a
/// recall cue. The labelled token appears at step t0 < T - D and the cue fires
/// at t0 + D. Every other step carries a distractor token, with class counts
/// balanced so token frequencies reveal nothing about the label; only the
/// token exactly D steps before the cue identifies the class.
struct DelayedRecallSet {
  Dataset data;
  std::vector<std::size_t> token_steps;  // t0 per sample
};

DelayedRecallSet gen_delayed_recall(const DelayedRecallConfig& cfg);

/// Writes `data` as audio CSV files plus manifest.json under `dir`; the first
/// `n_train` samples go to the train split, the rest to test.
void write_spike_dataset(const Dataset& data, std::size_t n_train, const std::filesystem::path& dir,
                         std::int64_t bin_us = 1000);

}  // namespace tskip
