#include "tskip/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <limits>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tskip/error.hpp"
#include "tskip/rng.hpp"

namespace tskip {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_int(std::string_view s, std::int64_t& v) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size();
}

bool looks_numeric(std::string_view s) {
  return !s.empty() && (std::isdigit(static_cast<unsigned char>(s.front())) || s.front() == '-' || s.front() == '+');
}

// Calls row(fields, line_no) for each data line, skipping blanks, comments and
// a leading header line.
template <class F>
void for_each_row(std::string_view text, F&& row) {
  std::size_t line_no = 0;
  bool first = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_fields(line);
    if (first && !looks_numeric(fields.front())) {
      first = false;
      continue;
    }
    first = false;
    row(fields, line_no);
  }
}

[[noreturn]] void fail(std::size_t line_no, const std::string& msg) {
  throw ParseError("line " + std::to_string(line_no) + ": " + msg);
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ParseError("cannot open " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

EventStream parse_events(std::string_view text, std::size_t width, std::size_t height) {
  EventStream s{{}, width, height};
  std::int64_t last_t = std::numeric_limits<std::int64_t>::min();
  std::size_t max_x = 0, max_y = 0;
  for_each_row(text, [&](const std::vector<std::string_view>& f, std::size_t line) {
    if (f.size() != 4) fail(line, "expected 4 fields x,y,t_us,p, got " + std::to_string(f.size()));
    std::int64_t x, y, t, p;
    if (!parse_int(f[0], x) || !parse_int(f[1], y) || !parse_int(f[2], t) || !parse_int(f[3], p))
      fail(line, "non-integer field");
    if (x < 0 || y < 0) fail(line, "negative coordinate");
    if (t < 0) fail(line, "negative timestamp");
    if (p != 0 && p != 1) fail(line, "polarity must be 0 or 1, got " + std::to_string(p));
    if (width && static_cast<std::size_t>(x) >= width) fail(line, "x outside sensor width");
    if (height && static_cast<std::size_t>(y) >= height) fail(line, "y outside sensor height");
    if (t < last_t) fail(line, "timestamps must be non-decreasing");
    last_t = t;
    max_x = std::max(max_x, static_cast<std::size_t>(x));
    max_y = std::max(max_y, static_cast<std::size_t>(y));
    s.events.push_back({static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y), t, static_cast<std::uint8_t>(p)});
  });
  if (!width) s.width = s.events.empty() ? 0 : max_x + 1;
  if (!height) s.height = s.events.empty() ? 0 : max_y + 1;
  return s;
}

AudioSpikeStream parse_audio_spikes(std::string_view text, std::size_t num_units) {
  AudioSpikeStream s{{}, num_units};
  std::int64_t last_t = std::numeric_limits<std::int64_t>::min();
  for_each_row(text, [&](const std::vector<std::string_view>& f, std::size_t line) {
    if (f.size() != 2) fail(line, "expected 2 fields x,t_us, got " + std::to_string(f.size()));
    std::int64_t x, t;
    if (!parse_int(f[0], x) || !parse_int(f[1], t)) fail(line, "non-integer field");
    if (x < 0 || static_cast<std::size_t>(x) >= num_units) fail(line, "unit index outside [0, " + std::to_string(num_units) + ")");
    if (t < 0) fail(line, "negative timestamp");
    if (t < last_t) fail(line, "timestamps must be non-decreasing");
    last_t = t;
    s.spikes.push_back({static_cast<std::uint32_t>(x), t});
  });
  return s;
}

std::string format_events(const EventStream& stream) {
  std::string out;
  for (const auto& e : stream.events)
    out += std::to_string(e.x) + "," + std::to_string(e.y) + "," + std::to_string(e.t_us) + "," +
           std::to_string(static_cast<int>(e.p)) + "\n";
  return out;
}

std::string format_audio_spikes(const AudioSpikeStream& stream) {
  std::string out;
  for (const auto& s : stream.spikes) out += std::to_string(s.unit) + "," + std::to_string(s.t_us) + "\n";
  return out;
}

std::size_t bin_index(std::int64_t t_us, std::int64_t window_us, std::size_t T) {
  if (window_us <= 0) throw Error("binning window must be positive");
  if (t_us <= 0) return 0;
  const auto b = static_cast<std::size_t>((static_cast<__int128>(t_us) * static_cast<__int128>(T)) / window_us);
  return std::min(b, T - 1);
}

Tensor bin_events(const EventStream& stream, const BinningConfig& cfg) {
  if (cfg.T < 1) throw Error("binning needs T >= 1");
  if (stream.width == 0 || stream.height == 0) throw Error("bin_events: sensor size is zero");
  const std::size_t C = cfg.polarity_channels ? 2 : 1;
  const std::size_t H = stream.height, W = stream.width;
  Tensor out({cfg.T, C, H, W}, 0.0);
  for (const auto& e : stream.events) {
    const std::size_t c = cfg.polarity_channels ? e.p : 0;
    const std::size_t idx = ((bin_index(e.t_us, cfg.window_us, cfg.T) * C + c) * H + e.y) * W + e.x;
    out[idx] = cfg.count_mode ? out[idx] + 1.0 : 1.0;
  }
  return out;
}

Tensor bin_audio(const AudioSpikeStream& stream, const BinningConfig& cfg) {
  if (cfg.T < 1) throw Error("binning needs T >= 1");
  if (stream.num_units == 0) throw Error("bin_audio: zero units");
  Tensor out({cfg.T, stream.num_units}, 0.0);
  for (const auto& s : stream.spikes) {
    const std::size_t idx = bin_index(s.t_us, cfg.window_us, cfg.T) * stream.num_units + s.unit;
    out[idx] = cfg.count_mode ? out[idx] + 1.0 : 1.0;
  }
  return out;
}

AudioSpikeStream unbin_audio(const Tensor& spikes, std::int64_t bin_us) {
  if (spikes.rank() != 2) throw DimensionError("unbin_audio: expected [T, units]");
  AudioSpikeStream s{{}, spikes.dim(1)};
  for (std::size_t t = 0; t < spikes.dim(0); ++t)
    for (std::size_t u = 0; u < spikes.dim(1); ++u)
      if (spikes[t * spikes.dim(1) + u] != 0.0)
        s.spikes.push_back({static_cast<std::uint32_t>(u), static_cast<std::int64_t>(t) * bin_us});
  return s;
}

Tensor inject_noise(const Tensor& x, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw Error("noise rate must lie in [0,1]");
  Tensor out = x;
  if (rate == 0.0) return out;
  Rng rng(derive_seed(seed, "noise"));
  for (auto& v : out.data())
    if (v == 0.0 && bernoulli(rng, rate)) v = 1.0;
  return out;
}

Tensor make_batch(const Dataset& data, std::span<const std::size_t> indices) {
  if (indices.empty()) throw DimensionError("make_batch: empty batch");
  const std::size_t B = indices.size();
  const std::size_t per = numel(data.sample_shape);
  Shape shape{data.T, B};
  shape.insert(shape.end(), data.sample_shape.begin(), data.sample_shape.end());
  Tensor out(shape, 0.0);
  for (std::size_t b = 0; b < B; ++b) {
    const Tensor& s = data.samples.at(indices[b]).spikes;
    if (s.size() != data.T * per) throw DimensionError("make_batch: sample has wrong size");
    for (std::size_t t = 0; t < data.T; ++t)
      std::copy_n(s.data().data() + t * per, per, out.data().data() + (t * B + b) * per);
  }
  return out;
}

std::vector<int> batch_labels(const Dataset& data, std::span<const std::size_t> indices) {
  std::vector<int> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(data.samples.at(i).label);
  return out;
}

Manifest load_manifest(const std::filesystem::path& path) {
  try {
    const auto j = nlohmann::json::parse(read_file(path));
    Manifest m;
    m.kind = j.value("kind", std::string("audio"));
    m.num_units = j.value("num_units", std::size_t{0});
    m.width = j.value("width", std::size_t{0});
    m.height = j.value("height", std::size_t{0});
    m.T = j.at("T").get<std::size_t>();
    m.window_us = j.at("window_us").get<std::int64_t>();
    m.polarity_channels = j.value("polarity_channels", true);
    m.num_classes = j.at("num_classes").get<std::size_t>();
    for (const auto& e : j.at("samples"))
      m.entries.push_back({e.at("file").get<std::string>(), e.at("label").get<int>(), e.value("split", std::string("train"))});
    if (m.kind != "audio" && m.kind != "visual") throw ParseError("manifest kind must be audio or visual");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest " + path.string() + ": " + e.what());
  }
}

void save_manifest(const Manifest& m, const std::filesystem::path& path) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& e : m.entries) samples.push_back({{"file", e.file}, {"label", e.label}, {"split", e.split}});
  nlohmann::json j = {{"format", "tskip-manifest"},
                      {"version", 1},
                      {"kind", m.kind},
                      {"T", m.T},
                      {"window_us", m.window_us},
                      {"num_classes", m.num_classes},
                      {"samples", samples}};
  if (m.kind == "audio") {
    j["num_units"] = m.num_units;
  } else {
    j["width"] = m.width;
    j["height"] = m.height;
    j["polarity_channels"] = m.polarity_channels;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(1) << "\n";
}

Dataset load_dataset(const std::filesystem::path& manifest_path, const std::string& split) {
  const Manifest m = load_manifest(manifest_path);
  const auto base = manifest_path.parent_path();
  Dataset d;
  d.T = m.T;
  d.num_classes = m.num_classes;
  const BinningConfig cfg{m.T, m.window_us, m.polarity_channels, false};
  for (const auto& e : m.entries) {
    if (!split.empty() && e.split != split) continue;
    if (e.label < 0 || static_cast<std::size_t>(e.label) >= m.num_classes)
      throw ParseError("manifest: label " + std::to_string(e.label) + " out of range for " + e.file);
    const std::string text = read_file(base / e.file);
    Tensor x;
    try {
      if (m.kind == "audio") {
        x = bin_audio(parse_audio_spikes(text, m.num_units), cfg);
      } else {
        x = bin_events(parse_events(text, m.width, m.height), cfg);
      }
    } catch (const ParseError& err) {
      throw ParseError(e.file + ": " + err.what());
    }
    if (d.sample_shape.empty()) d.sample_shape.assign(x.shape().begin() + 1, x.shape().end());
    d.samples.push_back({std::move(x), e.label});
  }
  return d;
}

void write_spike_dataset(const Dataset& data, std::size_t n_train, const std::filesystem::path& dir,
                         std::int64_t bin_us) {
  if (data.sample_shape.size() != 1) throw Error("write_spike_dataset: only [T, units] samples are supported");
  std::filesystem::create_directories(dir / "train");
  std::filesystem::create_directories(dir / "test");
  Manifest m;
  m.kind = "audio";
  m.num_units = data.sample_shape[0];
  m.T = data.T;
  m.window_us = static_cast<std::int64_t>(data.T) * bin_us;
  m.num_classes = data.num_classes;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::string split = i < n_train ? "train" : "test";
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.csv", i);
    const std::string rel = split + "/" + name;
    std::ofstream out(dir / rel, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / rel).string());
    out << "x,t_us\n" << format_audio_spikes(unbin_audio(data.samples[i].spikes, bin_us));
    m.entries.push_back({rel, data.samples[i].label, split});
  }
  save_manifest(m, dir / "manifest.json");
}

}  // namespace tskip
