#include "tskip/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "tskip/arch_io.hpp"
#include "tskip/error.hpp"

namespace tskip {

nlohmann::json checkpoint_to_json(const Network& net) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : net.parameters())
    params.push_back({{"name", p.name}, {"shape", p.value.shape()}, {"data", p.value.values()}});
  nlohmann::json stats = nlohmann::json::array();
  for (const auto& layer : net.all_bn_stats()) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : layer) steps.push_back({{"mean", s.mean}, {"var", s.var}});
    stats.push_back(steps);
  }
  return {{"format", "tskip-checkpoint"},
          {"version", kCheckpointVersion},
          {"seed", net.seed()},
          {"arch", arch_to_json(net.spec())},
          {"params", params},
          {"bn_stats", stats}};
}

Network checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string()) != "tskip-checkpoint") throw ParseError("not a tskip checkpoint");
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion)
      throw ParseError("unsupported checkpoint version " + std::to_string(version));
    Network net(arch_from_json(j.at("arch")), j.at("seed").get<std::uint64_t>());
    const auto& params = j.at("params");
    if (params.size() != net.parameters().size()) throw ParseError("checkpoint parameter count does not match architecture");
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = net.parameters()[i];
      if (params[i].at("name").get<std::string>() != p.name)
        throw ParseError("checkpoint parameter " + std::to_string(i) + " is " + params[i].at("name").get<std::string>() +
                         ", expected " + p.name);
      const auto shape = params[i].at("shape").get<Shape>();
      if (shape != p.value.shape()) throw ParseError("checkpoint shape mismatch for " + p.name);
      p.value = Tensor(shape, params[i].at("data").get<std::vector<double>>());
    }
    const auto& stats = j.at("bn_stats");
    auto& mine = net.all_bn_stats();
    if (stats.size() != mine.size()) throw ParseError("checkpoint BNTT statistics do not match architecture");
    for (std::size_t l = 0; l < mine.size(); ++l) {
      if (stats[l].size() != mine[l].size()) throw ParseError("checkpoint BNTT statistics do not match architecture");
      for (std::size_t t = 0; t < mine[l].size(); ++t) {
        mine[l][t].mean = stats[l][t].at("mean").get<std::vector<double>>();
        mine[l][t].var = stats[l][t].at("var").get<std::vector<double>>();
      }
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Network& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << checkpoint_to_json(net).dump() << "\n";
}

Network load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return checkpoint_from_json(nlohmann::json::parse(ss.str()));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace tskip
