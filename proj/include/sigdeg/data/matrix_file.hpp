#pragma once

#include <filesystem>

#include <Eigen/Core>

#include "json.hpp"

namespace sigdeg::data {

inline constexpr char kMatrixMagic[] = "SDEGMAT1";

/// Header fields: {"shape": [rows, cols], "dtype": "f64", "order": "column-major"} plus `meta`.
/// Columns are samples.
void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                 const nlohmann::json& meta = nlohmann::json::object());

struct LoadedMatrix {
    Eigen::MatrixXd matrix;
    nlohmann::json meta;
};

LoadedMatrix load_matrix(const std::filesystem::path& path);

}  // namespace sigdeg::data
