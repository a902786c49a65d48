#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "sigdeg/stoch/rng.hpp"
#include "sigdeg/taylor/sde.hpp"

namespace sigdeg::taylor {

enum class Scheme { high_order, euler };

const char* scheme_name(Scheme s);

struct StrongOrderOptions {
    std::vector<std::size_t> resolutions{4, 8, 16, 32};  ///< coarse step counts on [0, t_end]
    std::size_t n_paths = 4096;
    std::size_t reference_steps = std::size_t{1} << 16;  ///< shared-noise Euler reference
    double t_end = 1.0;
    Eigen::VectorXd y0 = Eigen::VectorXd::Ones(1);
};

struct StrongOrderResult {
    Scheme scheme = Scheme::high_order;
    std::vector<double> step_sizes;
    std::vector<double> mean_abs_error;  ///< E|Y_T^coarse - Y_T^ref| per resolution
    std::vector<double> std_error;       ///< Monte Carlo standard error of the mean
    double slope = 0.0;                  ///< least-squares slope of log error vs log step
};

/// Least-squares slope of log(err) against log(step).
double fit_log_log_slope(const std::vector<double>& step_sizes, const std::vector<double>& errors);

/// Both schemes on the same Brownian paths (path p uses stream p of rng's seed).
/// Coarse PS blocks come from the piecewise-linear reference path.
std::vector<StrongOrderResult> estimate_strong_orders(const SdeSpec& sde, const StrongOrderOptions& opts,
                                                      const stoch::Rng& rng);

StrongOrderResult estimate_strong_order(const SdeSpec& sde, Scheme scheme, const StrongOrderOptions& opts,
                                        const stoch::Rng& rng);

}  // namespace sigdeg::taylor
