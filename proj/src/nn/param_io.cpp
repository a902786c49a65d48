#include "sigdeg/nn/param_io.hpp"

#include <algorithm>

#include "sigdeg/errors.hpp"
#include "sigdeg/io.hpp"

namespace sigdeg::nn {

namespace {
constexpr std::string_view kMagic = "SDEGPAR1";
}

nlohmann::json arch_to_json(const NetArch& a) {
    return {{"d_in", a.d_in},
            {"d_out", a.d_out},
            {"hidden", a.hidden},
            {"time_embed_dim", a.time_embed_dim},
            {"n_blocks", a.n_blocks},
            {"freq_base", a.freq_base},
            {"activation", a.activation == Activation::silu ? "silu" : "identity"}};
}

NetArch arch_from_json(const nlohmann::json& j) {
    NetArch a;
    a.d_in = j.at("d_in").get<int>();
    a.d_out = j.at("d_out").get<int>();
    a.hidden = j.at("hidden").get<int>();
    a.time_embed_dim = j.at("time_embed_dim").get<int>();
    a.n_blocks = j.at("n_blocks").get<int>();
    a.freq_base = j.at("freq_base").get<double>();
    a.activation = j.value("activation", std::string("silu")) == "identity" ? Activation::identity : Activation::silu;
    return a;
}

void save_params(const std::filesystem::path& path, const ResidualNetParams& params, std::uint64_t seed,
                 const nlohmann::json& extra) {
    const nlohmann::json header{{"format_version", kParamFormatVersion},
                                {"arch", arch_to_json(params.arch())},
                                {"n_params", params.size()},
                                {"seed", seed},
                                {"extra", extra}};
    io::write_blob(path, kMagic, header, params.values());
}

LoadedParams load_params(const std::filesystem::path& path) {
    io::Blob blob = io::read_blob(path, kMagic);
    if (blob.header.at("format_version").get<int>() != kParamFormatVersion)
        throw IoError("unsupported parameter format version in " + path.string());
    ResidualNetParams params(arch_from_json(blob.header.at("arch")));
    if (blob.payload.size() != params.size()) throw IoError("parameter count mismatch in " + path.string());
    std::copy(blob.payload.begin(), blob.payload.end(), params.values().begin());
    return {std::move(params), blob.header.at("seed").get<std::uint64_t>(),
            blob.header.value("extra", nlohmann::json::object())};
}

}  // namespace sigdeg::nn
