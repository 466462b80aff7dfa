#include "tskip/search_space.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "tskip/arch_io.hpp"
#include "tskip/error.hpp"

namespace tskip {
namespace {

std::size_t draw(Rng& rng, Range r) {
  return static_cast<std::size_t>(uniform_int(rng, static_cast<std::int64_t>(r.lo), static_cast<std::int64_t>(r.hi)));
}

template <class T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(v.size()) - 1))];
}

bool direction_ok(EdgeDirections d, std::size_t origin, std::size_t destination) {
  if (d == EdgeDirections::Forward) return origin < destination;
  if (d == EdgeDirections::Backward) return origin > destination;
  return true;
}

std::vector<std::pair<std::size_t, std::size_t>> admissible_pairs(const SearchSpace& s, std::size_t depth) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  auto ok = [&](std::size_t o, std::size_t d) {
    return o != d && o <= depth && d >= 1 && d <= depth && direction_ok(s.directions, o, d);
  };
  if (s.allowed_pairs.empty()) {
    for (std::size_t o = 0; o <= depth; ++o)
      for (std::size_t d = 1; d <= depth; ++d)
        if (ok(o, d)) out.emplace_back(o, d);
  } else {
    for (const auto& [o, d] : s.allowed_pairs)
      if (ok(o, d)) out.emplace_back(o, d);
  }
  return out;
}

}  // namespace

void check_space(const SearchSpace& s) {
  auto bad = [](const std::string& m) { throw ValidationError("search space: " + m); };
  if (s.input_shape.empty()) bad("input shape is empty");
  if (s.T < 1) bad("T must be positive");
  if (s.depth.lo < 1 || s.depth.lo > s.depth.hi) bad("depth range must satisfy 1 <= lo <= hi");
  if (s.units.empty()) bad("no unit ranges");
  for (const auto& r : s.units)
    if (r.lo < 1 || r.lo > r.hi) bad("unit range must satisfy 1 <= lo <= hi");
  if (s.kind == LayerKind::Conv2d && (s.kernels.empty() || s.strides.empty())) bad("conv space needs kernel and stride choices");
  if (s.tskip_count.lo > s.tskip_count.hi) bad("tskip count range is reversed");
  if (s.tskip_count.hi > 0) {
    if (s.delta_t.lo > s.delta_t.hi) bad("delta_t range is reversed");
    if (s.delta_t.hi >= s.T) bad("delta_t range must lie below T");
    if (s.merges.empty()) bad("no merge choices");
  }
  if (!(s.leak_init > 0.0 && s.leak_init < 1.0)) bad("leak_init must lie in (0,1)");
  if (!(s.threshold_init > 0.0)) bad("threshold_init must be positive");
}

ArchSpec sample(const SearchSpace& space, Rng& rng, std::size_t max_attempts) {
  check_space(space);
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    ArchSpec spec;
    spec.input_shape = space.input_shape;
    spec.T = space.T;
    const std::size_t hidden = draw(rng, space.depth);
    LifParams lif{space.leak_init, space.threshold_init, space.reset, true};
    for (std::size_t i = 0; i < hidden; ++i) {
      LayerSpec L;
      L.kind = space.kind;
      L.units = draw(rng, space.units[std::min(i, space.units.size() - 1)]);
      if (space.kind == LayerKind::Conv2d) {
        L.kernel = pick(rng, space.kernels);
        L.stride = pick(rng, space.strides);
      }
      L.bntt = space.bntt;
      L.lif = lif;
      spec.layers.push_back(L);
    }
    for (LayerSpec L : space.tail) {
      if (L.activation == Activation::Lif) L.lif = lif;
      L.bntt = space.bntt;
      spec.layers.push_back(L);
    }
    LayerSpec out = space.output;
    out.lif.leak = space.leak_init;
    out.bntt = false;
    spec.layers.push_back(out);

    const std::size_t n_edges = draw(rng, space.tskip_count);
    auto pairs = admissible_pairs(space, spec.depth());
    if (n_edges > pairs.size()) continue;
    std::set<std::pair<std::size_t, std::size_t>> used;
    for (std::size_t k = 0; k < n_edges; ++k) {
      std::pair<std::size_t, std::size_t> p;
      do p = pick(rng, pairs);
      while (used.count(p));
      used.insert(p);
      TSkipEdge e;
      e.origin = p.first;
      e.destination = p.second;
      e.delta_t = draw(rng, space.delta_t);
      e.merge = pick(rng, space.merges);
      e.alpha_enabled = space.alpha;
      spec.tskips.push_back(e);
    }

    if (!validate(spec).empty()) continue;
    if (space.param_budget && param_count(spec) > space.param_budget) continue;
    return spec;
  }
  throw ValidationError("search space infeasible: no valid spec within budget after " + std::to_string(max_attempts) +
                        " attempts");
}

std::vector<std::string> preset_names() { return {"shd", "ssc", "shd-large", "ssc-large", "dvs", "flow"}; }

SearchSpace preset(const std::string& name) {
  SearchSpace s;
  if (name == "shd" || name == "ssc" || name == "shd-large" || name == "ssc-large") {
    const bool large = name.ends_with("-large");
    s.input_shape = {700};
    s.T = 99;
    s.kind = LayerKind::Dense;
    s.depth = large ? Range{4, 7} : Range{2, 4};
    s.units = {large ? Range{128, 768} : Range{64, 448}};
    s.output = LayerSpec{LayerKind::Dense, name.starts_with("shd") ? 20u : 35u, 1, 1, Activation::Integrator, true, false, {}};
    s.tskip_count = {1, 2};
    s.delta_t = {10, 45};
    s.merges = {Merge::Concat};
    s.alpha = false;
    s.param_budget = large ? 1'300'000 : 300'000;
  } else if (name == "dvs") {
    s.input_shape = {2, 64, 64};
    s.T = 30;
    s.kind = LayerKind::Conv2d;
    s.depth = {3, 5};
    s.units = {{32, 128}};
    s.kernels = {1, 3, 5};
    s.strides = {1};
    s.tail = {LayerSpec{LayerKind::Conv2d, 32, 1, 11, Activation::Lif, true, true, {}}};
    s.output = LayerSpec{LayerKind::Dense, 11, 1, 1, Activation::Integrator, true, false, {}};
    s.tskip_count = {1, 2};
    s.delta_t = {5, 14};
    s.merges = {Merge::Concat};
    s.alpha = true;
    s.param_budget = 600'000;
  } else if (name == "flow") {
    s.input_shape = {2, 32, 32};
    s.T = 10;
    s.kind = LayerKind::Conv2d;
    s.depth = {3, 5};
    s.units = {{16, 64}};
    s.kernels = {3};
    s.strides = {1};
    s.output = LayerSpec{LayerKind::Conv2d, 2, 1, 1, Activation::Integrator, true, false, {}};
    s.output.lif.reset = ResetMode::Hard;
    s.reset = ResetMode::Hard;
    s.tskip_count = {1, 2};
    s.delta_t = {2, 6};
    s.merges = {Merge::Concat, Merge::Add};
    s.alpha = true;
    s.param_budget = 0;
  } else {
    throw ValidationError("unknown preset '" + name + "'");
  }
  return s;
}

namespace {

nlohmann::json range_json(Range r) { return nlohmann::json::array({r.lo, r.hi}); }
Range range_from(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<std::size_t>(), j.get<std::size_t>()};
  return {j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>()};
}

std::string dir_str(EdgeDirections d) {
  return d == EdgeDirections::Forward ? "forward" : d == EdgeDirections::Backward ? "backward" : "both";
}
EdgeDirections dir_from(const std::string& s) {
  if (s == "forward") return EdgeDirections::Forward;
  if (s == "backward") return EdgeDirections::Backward;
  if (s == "both") return EdgeDirections::Both;
  throw ParseError("unknown edge direction '" + s + "'");
}

nlohmann::json layer_json(const LayerSpec& L) {
  ArchSpec tmp;
  tmp.input_shape = {1};
  tmp.layers = {L};
  return arch_to_json(tmp).at("layers").at(0);
}
LayerSpec layer_from(const nlohmann::json& j) {
  if (j.is_string()) return parse_layer_shorthand(j.get<std::string>());
  nlohmann::json a = {{"T", 1}, {"input", {1}}, {"layers", {j}}};
  return arch_from_json(a).layers.at(0);
}

}  // namespace

nlohmann::json space_to_json(const SearchSpace& s) {
  nlohmann::json units = nlohmann::json::array();
  for (auto r : s.units) units.push_back(range_json(r));
  nlohmann::json tail = nlohmann::json::array();
  for (const auto& L : s.tail) tail.push_back(layer_json(L));
  nlohmann::json pairs = nlohmann::json::array();
  for (auto [o, d] : s.allowed_pairs) pairs.push_back({o, d});
  nlohmann::json merges = nlohmann::json::array();
  for (auto m : s.merges) merges.push_back(to_string(m));
  return {{"input", s.input_shape},
          {"T", s.T},
          {"kind", to_string(s.kind)},
          {"depth", range_json(s.depth)},
          {"units", units},
          {"kernels", s.kernels},
          {"strides", s.strides},
          {"tail", tail},
          {"output", layer_json(s.output)},
          {"tskip_count", range_json(s.tskip_count)},
          {"delta_t", range_json(s.delta_t)},
          {"directions", dir_str(s.directions)},
          {"allowed_pairs", pairs},
          {"merges", merges},
          {"alpha", s.alpha},
          {"param_budget", s.param_budget},
          {"bntt", s.bntt},
          {"leak_init", s.leak_init},
          {"threshold_init", s.threshold_init},
          {"reset", to_string(s.reset)}};
}

SearchSpace space_from_json(const nlohmann::json& j) {
  try {
    SearchSpace s;
    if (j.contains("preset")) s = preset(j.at("preset").get<std::string>());
    if (j.contains("input")) s.input_shape = j.at("input").get<Shape>();
    if (j.contains("T")) s.T = j.at("T").get<std::size_t>();
    if (j.contains("kind")) {
      const auto k = j.at("kind").get<std::string>();
      if (k != "dense" && k != "conv2d") throw ParseError("kind must be dense or conv2d");
      s.kind = k == "dense" ? LayerKind::Dense : LayerKind::Conv2d;
    }
    if (j.contains("depth")) s.depth = range_from(j.at("depth"));
    if (j.contains("units")) {
      s.units.clear();
      const auto& u = j.at("units");
      if (u.is_array() && !u.empty() && u.at(0).is_array()) {
        for (const auto& r : u) s.units.push_back(range_from(r));
      } else {
        s.units.push_back(range_from(u));
      }
    }
    if (j.contains("kernels")) s.kernels = j.at("kernels").get<std::vector<std::size_t>>();
    if (j.contains("strides")) s.strides = j.at("strides").get<std::vector<std::size_t>>();
    if (j.contains("tail")) {
      s.tail.clear();
      for (const auto& L : j.at("tail")) s.tail.push_back(layer_from(L));
    }
    if (j.contains("output")) s.output = layer_from(j.at("output"));
    if (j.contains("tskip_count")) s.tskip_count = range_from(j.at("tskip_count"));
    if (j.contains("delta_t")) s.delta_t = range_from(j.at("delta_t"));
    if (j.contains("directions")) s.directions = dir_from(j.at("directions").get<std::string>());
    if (j.contains("allowed_pairs")) {
      s.allowed_pairs.clear();
      for (const auto& p : j.at("allowed_pairs")) s.allowed_pairs.emplace_back(p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>());
    }
    if (j.contains("merges")) {
      s.merges.clear();
      for (const auto& m : j.at("merges")) {
        const auto v = m.get<std::string>();
        if (v != "concat" && v != "add") throw ParseError("merge must be concat or add");
        s.merges.push_back(v == "concat" ? Merge::Concat : Merge::Add);
      }
    }
    if (j.contains("alpha")) s.alpha = j.at("alpha").get<bool>();
    if (j.contains("param_budget")) s.param_budget = j.at("param_budget").get<std::size_t>();
    if (j.contains("bntt")) s.bntt = j.at("bntt").get<bool>();
    if (j.contains("leak_init")) s.leak_init = j.at("leak_init").get<double>();
    if (j.contains("threshold_init")) s.threshold_init = j.at("threshold_init").get<double>();
    if (j.contains("reset")) {
      const auto r = j.at("reset").get<std::string>();
      if (r != "soft" && r != "hard") throw ParseError("reset must be soft or hard");
      s.reset = r == "soft" ? ResetMode::Soft : ResetMode::Hard;
    }
    check_space(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("search space: ") + e.what());
  }
}

SearchSpace load_space(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return space_from_json(nlohmann::json::parse(ss.str()));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("search space " + path.string() + ": " + e.what());
  }
}

void save_space(const SearchSpace& space, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << space_to_json(space).dump(2) << "\n";
}

}  // namespace tskip
