#pragma once

#include <array>
#include <cstddef>

#include <Eigen/Core>

#include "sigdeg/stoch/rng.hpp"

namespace sigdeg::data {

/// Rough Bergomi model
///   V_t = xi exp(eta Y_t - eta^2 t^{2a+1} / 2),  Y_t = sqrt(2a+1) int_0^t (t-u)^a dW1_u,
///   d log S = sqrt(V) dB - V dt / 2,  B = rho W1 + sqrt(1 - rho^2) W2,
/// observed at n_obs uniform times on (0, T].
struct RBergomiSpec {
    double xi = 0.235 * 0.235;
    double eta = 1.9;
    double rho = -0.9;
    double a = -0.35;
    double horizon = 1.0;
    double s0 = 1.0;
    std::size_t n_obs = 25;
    std::size_t steps_per_obs = 4;
    std::size_t n_paths = 20000;
    std::array<double, 3> fractions{0.6, 0.2, 0.2};

    void validate() const;
    std::size_t n_steps() const { return n_obs * steps_per_obs; }
    /// Flat sample dimension: log S and log V channels.
    std::size_t dim() const { return 2 * n_obs; }
};

/// Hybrid-scheme draws (kappa = 1) of the Volterra process on a uniform grid.
/// Row i of each matrix refers to step i + 1: dw1 is W1(t_{i+1}) - W1(t_i),
/// y is Y(t_{i+1}); one column per path.
struct VolterraDraw {
    Eigen::MatrixXd dw1;
    Eigen::MatrixXd y;
};

VolterraDraw hybrid_volterra(double a, double horizon, std::size_t n_steps, std::size_t n_paths, stoch::Rng& rng);

/// Paths as columns of a (2 n_obs) x n_paths matrix: rows [log S(t_1..t_n), log V(t_1..t_n)].
Eigen::MatrixXd rbergomi_hybrid(const RBergomiSpec& spec, std::size_t n_paths, stoch::Rng& rng);

/// Covariance of (dW1_1..dW1_n, Y(t_1)..Y(t_n)) on n_grid uniform steps of
/// (0, T], every entry by tanh-sinh quadrature. Throws NumericError when the
/// quadrature error estimate exceeds 1e-8.
Eigen::MatrixXd rbergomi_cov_oracle(const RBergomiSpec& spec, std::size_t n_grid);

}  // namespace sigdeg::data
