#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace sigdeg::cli {

inline constexpr char kCodeVersion[] = "sigdeg-0.1.0";

/// Provenance record written next to every artifact. Paths are stored
/// relative to the run directory; hashes are FNV-1a of the file bytes.
struct Manifest {
    std::string stage;
    std::uint64_t seed = 0;
    nlohmann::json config;
    nlohmann::json upstream = nlohmann::json::object();  ///< path -> hash
    nlohmann::json outputs = nlohmann::json::object();   ///< path -> hash
    nlohmann::json info = nlohmann::json::object();

    void add_upstream(const std::filesystem::path& root, const std::filesystem::path& file);
    void add_output(const std::filesystem::path& root, const std::filesystem::path& file);

    nlohmann::json to_json() const;
    static Manifest from_json(const nlohmann::json& j);
    void write(const std::filesystem::path& path) const;
    static Manifest read(const std::filesystem::path& path);
};

}  // namespace sigdeg::cli
