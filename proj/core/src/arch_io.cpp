#include "tskip/arch_io.hpp"

#include <charconv>
#include <fstream>
#include <regex>
#include <sstream>

#include "tskip/error.hpp"

namespace tskip {

using nlohmann::json;

namespace {

Activation parse_activation(std::string_view s) {
  if (s == "lif") return Activation::Lif;
  if (s == "relu") return Activation::Relu;
  if (s == "integrator" || s == "int") return Activation::Integrator;
  if (s == "linear" || s == "lin") return Activation::Linear;
  throw ParseError("unknown activation '" + std::string(s) + "'");
}

std::size_t to_size(const std::string& s) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ParseError("expected an integer, got '" + s + "'");
  return v;
}

Shape parse_input_string(const std::string& s) {
  Shape out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, 'x')) out.push_back(to_size(part));
  if (out.empty()) throw ParseError("empty input shape");
  return out;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

LayerSpec layer_from_json(const json& j) {
  if (j.is_string()) return parse_layer_shorthand(j.get<std::string>());
  if (j.is_number_unsigned()) {
    LayerSpec L;
    L.units = j.get<std::size_t>();
    return L;
  }
  if (!j.is_object()) throw ParseError("layer must be an object or a shorthand string");
  LayerSpec L;
  const auto kind = get_or<std::string>(j, "kind", "dense");
  if (kind == "dense") L.kind = LayerKind::Dense;
  else if (kind == "conv2d" || kind == "conv") L.kind = LayerKind::Conv2d;
  else throw ParseError("unknown layer kind '" + kind + "'");
  L.units = j.at("units").get<std::size_t>();
  L.kernel = get_or<std::size_t>(j, "kernel", 1);
  L.stride = get_or<std::size_t>(j, "stride", 1);
  L.activation = parse_activation(get_or<std::string>(j, "activation", "lif"));
  L.bias = get_or<bool>(j, "bias", true);
  L.bntt = get_or<bool>(j, "bntt", true);
  L.lif.leak = get_or<double>(j, "leak", L.lif.leak);
  L.lif.threshold = get_or<double>(j, "threshold", L.lif.threshold);
  const auto reset = get_or<std::string>(j, "reset", "soft");
  if (reset == "soft") L.lif.reset = ResetMode::Soft;
  else if (reset == "hard") L.lif.reset = ResetMode::Hard;
  else throw ParseError("unknown reset mode '" + reset + "'");
  L.lif.learnable = get_or<bool>(j, "learnable", true);
  return L;
}

}  // namespace

LayerSpec parse_layer_shorthand(std::string_view text) {
  static const std::regex conv_re(R"(^(\d+)c(\d+)s(\d+)(?:/(\w+))?$)");
  static const std::regex dense_re(R"(^(?:d|fc)?(\d+)(?:/(\w+))?$)");
  const std::string s(text);
  std::smatch m;
  LayerSpec L;
  if (std::regex_match(s, m, conv_re)) {
    L.kind = LayerKind::Conv2d;
    L.kernel = to_size(m[1]);
    L.units = to_size(m[2]);
    L.stride = to_size(m[3]);
    if (m[4].matched) L.activation = parse_activation(m[4].str());
  } else if (std::regex_match(s, m, dense_re)) {
    L.kind = LayerKind::Dense;
    L.units = to_size(m[1]);
    if (m[2].matched) L.activation = parse_activation(m[2].str());
  } else {
    throw ParseError("cannot parse layer shorthand '" + s + "'");
  }
  if (L.units == 0 || L.kernel == 0 || L.stride == 0) throw ParseError("layer shorthand '" + s + "' has a zero field");
  return L;
}

std::string layer_shorthand(const LayerSpec& L) {
  std::string s = L.kind == LayerKind::Conv2d
                      ? std::to_string(L.kernel) + "c" + std::to_string(L.units) + "s" + std::to_string(L.stride)
                      : "d" + std::to_string(L.units);
  if (L.activation != Activation::Lif) s += "/" + to_string(L.activation);
  return s;
}

json arch_to_json(const ArchSpec& spec) {
  json layers = json::array();
  for (const auto& L : spec.layers) {
    layers.push_back({{"kind", to_string(L.kind)},
                      {"units", L.units},
                      {"kernel", L.kernel},
                      {"stride", L.stride},
                      {"activation", to_string(L.activation)},
                      {"bias", L.bias},
                      {"bntt", L.bntt},
                      {"leak", L.lif.leak},
                      {"threshold", L.lif.threshold},
                      {"reset", to_string(L.lif.reset)},
                      {"learnable", L.lif.learnable}});
  }
  json edges = json::array();
  for (const auto& e : spec.tskips) {
    edges.push_back({{"from", e.origin},
                     {"to", e.destination},
                     {"delta_t", e.delta_t},
                     {"merge", to_string(e.merge)},
                     {"alpha", e.alpha_enabled},
                     {"alpha_raw", e.alpha_raw}});
  }
  return {{"T", spec.T}, {"input", spec.input_shape}, {"layers", layers}, {"tskips", edges}};
}

ArchSpec arch_from_json(const json& j) {
  try {
    ArchSpec spec;
    spec.T = j.at("T").get<std::size_t>();
    const auto& in = j.at("input");
    spec.input_shape = in.is_string() ? parse_input_string(in.get<std::string>()) : in.get<Shape>();
    for (const auto& L : j.at("layers")) spec.layers.push_back(layer_from_json(L));
    if (auto it = j.find("tskips"); it != j.end()) {
      for (const auto& e : *it) {
        TSkipEdge edge;
        edge.origin = (e.contains("origin") ? e.at("origin") : e.at("from")).get<std::size_t>();
        edge.destination = (e.contains("destination") ? e.at("destination") : e.at("to")).get<std::size_t>();
        edge.delta_t = e.at("delta_t").get<std::size_t>();
        const auto merge = get_or<std::string>(e, "merge", "concat");
        if (merge == "concat") edge.merge = Merge::Concat;
        else if (merge == "add") edge.merge = Merge::Add;
        else throw ParseError("unknown merge '" + merge + "'");
        edge.alpha_enabled = get_or<bool>(e, "alpha", false);
        edge.alpha_raw = get_or<double>(e, "alpha_raw", 0.0);
        spec.tskips.push_back(edge);
      }
    }
    return spec;
  } catch (const json::exception& e) {
    throw ParseError(std::string("architecture: ") + e.what());
  }
}

std::string serialize_arch(const ArchSpec& spec) { return arch_to_json(spec).dump(2) + "\n"; }

ArchSpec parse_arch(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("architecture: ") + e.what());
  }
  return arch_from_json(j);
}

ArchSpec load_arch(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_arch(ss.str());
}

void save_arch(const ArchSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << serialize_arch(spec);
}

}  // namespace tskip
