#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "tskip/arch.hpp"

namespace tskip {

/// Parses layer shorthand: "3c80s1" (3x3 conv, 80 channels, stride 1) or
/// "d124" (dense, 124 units), optionally suffixed with "/relu", "/int" or "/lin".
LayerSpec parse_layer_shorthand(std::string_view text);
std::string layer_shorthand(const LayerSpec& layer);

nlohmann::json arch_to_json(const ArchSpec& spec);
/// Accepts the canonical object form written by arch_to_json as well as
/// shorthand layer strings and an "input" string such as "2x64x64".
ArchSpec arch_from_json(const nlohmann::json& j);

std::string serialize_arch(const ArchSpec& spec);
ArchSpec parse_arch(std::string_view text);

ArchSpec load_arch(const std::filesystem::path& path);
void save_arch(const ArchSpec& spec, const std::filesystem::path& path);

}  // namespace tskip
