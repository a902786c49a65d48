#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "sigdeg/stoch/rng.hpp"

namespace sigdeg::data {

/// Two-component (by default) Gaussian mixture on the real line.
struct MixtureSpec {
    std::vector<double> means{-2.0, 2.0};
    double stddev = 0.5;
    std::vector<double> weights{0.5, 0.5};
    std::size_t n_total = 10000;
    /// train / validation / test shares: 7900 / 100 / 2000 of 10000
    std::array<double, 3> fractions{0.79, 0.01, 0.20};

    void validate() const;
};

/// n i.i.d. draws as a 1 x n matrix.
Eigen::MatrixXd sample_mixture(const MixtureSpec& spec, std::size_t n, stoch::Rng& rng);

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

/// Random disjoint partition of {0..n-1}; validation and test sizes are
/// round(f * n), training takes the remainder.
Split split_dataset(std::size_t n, const std::array<double, 3>& fractions, stoch::Rng& rng);

/// Columns of `data` listed in `idx`, in that order.
Eigen::MatrixXd take_columns(const Eigen::MatrixXd& data, std::span<const std::size_t> idx);

/// Per-coordinate affine standardization fitted on training columns.
struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;

    static Standardizer fit(const Eigen::MatrixXd& data);
    static Standardizer identity(Eigen::Index d);
    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
    Eigen::MatrixXd invert(const Eigen::MatrixXd& z) const;

    nlohmann::json to_json() const;
    static Standardizer from_json(const nlohmann::json& j);
};

}  // namespace sigdeg::data
