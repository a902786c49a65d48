#pragma once

#include <cstdint>
#include <filesystem>

#include "json.hpp"

#include "sigdeg/nn/residual_net.hpp"

namespace sigdeg::nn {

inline constexpr int kParamFormatVersion = 1;

nlohmann::json arch_to_json(const NetArch& arch);
NetArch arch_from_json(const nlohmann::json& j);

/// Header carries {"format_version", "arch", "seed", "extra"}; payload is
/// ResidualNetParams::values() in layer order.
void save_params(const std::filesystem::path& path, const ResidualNetParams& params, std::uint64_t seed,
                 const nlohmann::json& extra = nlohmann::json::object());

struct LoadedParams {
    ResidualNetParams params;
    std::uint64_t seed;
    nlohmann::json extra;
};

LoadedParams load_params(const std::filesystem::path& path);

}  // namespace sigdeg::nn
