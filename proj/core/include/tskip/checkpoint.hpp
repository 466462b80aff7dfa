#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "tskip/network.hpp"

namespace tskip {

inline constexpr int kCheckpointVersion = 1;

/// Architecture, seed, every parameter and all BNTT running statistics.
nlohmann::json checkpoint_to_json(const Network& net);
Network checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const Network& net, const std::filesystem::path& path);
Network load_checkpoint(const std::filesystem::path& path);

}  // namespace tskip
