#include "sigdeg/cli/manifest.hpp"

#include "sigdeg/errors.hpp"
#include "sigdeg/io.hpp"

namespace sigdeg::cli {

namespace {

std::string relative_key(const std::filesystem::path& root, const std::filesystem::path& file) {
    return std::filesystem::relative(file, root).generic_string();
}

}  // namespace

void Manifest::add_upstream(const std::filesystem::path& root, const std::filesystem::path& file) {
    upstream[relative_key(root, file)] = io::file_hash(file);
}

void Manifest::add_output(const std::filesystem::path& root, const std::filesystem::path& file) {
    outputs[relative_key(root, file)] = io::file_hash(file);
}

nlohmann::json Manifest::to_json() const {
    return {{"stage", stage}, {"version", kCodeVersion}, {"seed", seed}, {"config", config},
            {"upstream", upstream}, {"outputs", outputs}, {"info", info}};
}

Manifest Manifest::from_json(const nlohmann::json& j) {
    try {
        Manifest m;
        m.stage = j.at("stage").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.config = j.at("config");
        m.upstream = j.value("upstream", nlohmann::json::object());
        m.outputs = j.value("outputs", nlohmann::json::object());
        m.info = j.value("info", nlohmann::json::object());
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed manifest: ") + e.what());
    }
}

void Manifest::write(const std::filesystem::path& path) const { io::write_text(path, to_json().dump(2) + "\n"); }

Manifest Manifest::read(const std::filesystem::path& path) {
    return from_json(nlohmann::json::parse(io::read_text(path), nullptr, false));
}

}  // namespace sigdeg::cli
