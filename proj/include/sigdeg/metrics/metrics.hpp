#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Core>

namespace sigdeg::metrics {

/// Path samples are matrix columns; row c * n_grid + t holds channel c at time t.
struct PathLayout {
    std::size_t n_grid = 1;
    std::size_t n_channels = 1;

    std::size_t dim() const { return n_grid * n_channels; }
    Eigen::Index row(std::size_t t, std::size_t c) const { return static_cast<Eigen::Index>(c * n_grid + t); }
};

/// W1 between empirical measures on the line. Equal sizes: mean absolute
/// difference of sorted samples; otherwise the integral of the quantile gap.
double wasserstein1_1d(std::span<const double> a, std::span<const double> b);

/// Mean of the 1-d W1 over rows (every (t, channel) coordinate).
double wasserstein1_mean(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// |Var(a) - Var(b)| with unbiased variances.
double variance_score(std::span<const double> a, std::span<const double> b);

/// Per coordinate: `bins` equal-width bins on the pooled range, density-normalized
/// histograms, mean absolute bin difference; averaged over coordinates.
/// A coordinate whose pooled range is a single point contributes 0.
double marginal_hist_loss(const Eigen::MatrixXd& real, const Eigen::MatrixXd& gen, std::size_t bins);

/// (1 / (T c^2)) sum over all coordinate pairs of |rho_real - rho_gen|, with T
/// time points and c channels. Pairs involving a constant coordinate are
/// skipped and the normalizer shrinks by the same share.
double correlation_discrepancy(const Eigen::MatrixXd& real, const Eigen::MatrixXd& gen, const PathLayout& layout);

/// Lag-averaged absolute difference of autocorrelations AC_1..AC_L, averaged
/// over channels. AC_tau pools the lag-tau products of all paths after
/// standardizing each channel by its global mean and std.
double autocorrelation_discrepancy(const Eigen::MatrixXd& real, const Eigen::MatrixXd& gen, const PathLayout& layout,
                                   std::size_t max_lag);

/// AC_1..AC_L of one channel, as used above.
Eigen::VectorXd autocorrelation(const Eigen::MatrixXd& paths, const PathLayout& layout, std::size_t channel,
                                std::size_t max_lag);

}  // namespace sigdeg::metrics
