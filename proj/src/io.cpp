#include "sigdeg/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sigdeg/errors.hpp"

namespace sigdeg::io {

static_assert(std::endian::native == std::endian::little, "payload layout assumes a little-endian host");

namespace {

void ensure_parent(const std::filesystem::path& path) {
    if (!path.has_parent_path()) return;
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
}

}  // namespace

void write_blob(const std::filesystem::path& path, std::string_view magic, const nlohmann::json& header,
                std::span<const double> payload) {
    if (magic.size() != 8) throw std::invalid_argument("write_blob: magic must be 8 bytes");
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    const std::string text = header.dump();
    const std::uint64_t len = text.size();
    out.write(magic.data(), 8);
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(double)));
    if (!out) throw IoError("write failed: " + path.string());
}

Blob read_blob(const std::filesystem::path& path, std::string_view magic) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    char got[8];
    in.read(got, 8);
    if (!in || std::string_view(got, 8) != magic) throw IoError("bad magic in " + path.string());
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    std::string text(len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(len));
    if (!in) throw IoError("truncated header in " + path.string());
    Blob blob;
    try {
        blob.header = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed header in " + path.string() + ": " + e.what());
    }
    const auto start = in.tellg();
    in.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::size_t>(in.tellg() - start);
    in.seekg(start);
    if (bytes % sizeof(double) != 0) throw IoError("payload size not a multiple of 8 in " + path.string());
    blob.payload.resize(bytes / sizeof(double));
    in.read(reinterpret_cast<char*>(blob.payload.data()), static_cast<std::streamsize>(bytes));
    if (!in) throw IoError("truncated payload in " + path.string());
    return blob;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    return s;
}

std::string file_hash(const std::filesystem::path& path) { return hex64(fnv1a64(read_text(path))); }

void write_text(const std::filesystem::path& path, const std::string& text) {
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace sigdeg::io
