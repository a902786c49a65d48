#include "sigdeg/data/matrix_file.hpp"

#include <span>

#include "sigdeg/errors.hpp"
#include "sigdeg/io.hpp"

namespace sigdeg::data {

void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m, const nlohmann::json& meta) {
    nlohmann::json header = {{"shape", {m.rows(), m.cols()}}, {"dtype", "f64"}, {"order", "column-major"}, {"meta", meta}};
    io::write_blob(path, kMatrixMagic, header, std::span<const double>(m.data(), static_cast<std::size_t>(m.size())));
}

LoadedMatrix load_matrix(const std::filesystem::path& path) {
    io::Blob b = io::read_blob(path, kMatrixMagic);
    const auto rows = b.header.at("shape").at(0).get<Eigen::Index>();
    const auto cols = b.header.at("shape").at(1).get<Eigen::Index>();
    if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != b.payload.size())
        throw IoError("load_matrix: payload size does not match shape in " + path.string());
    LoadedMatrix out;
    out.matrix = Eigen::Map<const Eigen::MatrixXd>(b.payload.data(), rows, cols);
    out.meta = b.header.value("meta", nlohmann::json::object());
    return out;
}

}  // namespace sigdeg::data
