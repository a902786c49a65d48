#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace sigdeg::io {

/// Binary container used for datasets and checkpoints:
///   8-byte magic | uint64 LE header length | JSON header (UTF-8) | float64 LE payload.
struct Blob {
    nlohmann::json header;
    std::vector<double> payload;
};

void write_blob(const std::filesystem::path& path, std::string_view magic, const nlohmann::json& header,
                std::span<const double> payload);
Blob read_blob(const std::filesystem::path& path, std::string_view magic);

std::uint64_t fnv1a64(std::string_view bytes);
/// Hex FNV-1a hash of a file's bytes.
std::string file_hash(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace sigdeg::io
