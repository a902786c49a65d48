#include "sigdeg/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace sigdeg::metrics {

namespace {

std::vector<double> row_vector(const Eigen::MatrixXd& m, Eigen::Index r) {
    std::vector<double> v(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) v[static_cast<std::size_t>(j)] = m(r, j);
    return v;
}

void check_pair(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, Eigen::Index min_cols) {
    if (a.rows() != b.rows()) throw std::invalid_argument("metrics: sample sets have different dimensions");
    if (a.cols() < min_cols || b.cols() < min_cols) throw std::invalid_argument("metrics: too few samples");
}

void check_layout(const Eigen::MatrixXd& m, const PathLayout& layout) {
    if (static_cast<std::size_t>(m.rows()) != layout.dim() || layout.dim() == 0)
        throw std::invalid_argument("metrics: data rows do not match the path layout");
}

Eigen::MatrixXd correlation(const Eigen::MatrixXd& x, std::vector<bool>& valid) {
    const Eigen::VectorXd mean = x.rowwise().mean();
    const Eigen::MatrixXd c = x.colwise() - mean;
    const Eigen::MatrixXd cov = c * c.transpose();
    const Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
    const double root_n = std::sqrt(static_cast<double>(x.cols()));
    valid.assign(static_cast<std::size_t>(x.rows()), true);
    for (Eigen::Index i = 0; i < sd.size(); ++i)
        valid[static_cast<std::size_t>(i)] = sd[i] / root_n > 1e-12 * (1.0 + std::abs(mean[i]));
    Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(x.rows(), x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.rows(); ++j)
            if (valid[static_cast<std::size_t>(i)] && valid[static_cast<std::size_t>(j)]) rho(i, j) = cov(i, j) / (sd[i] * sd[j]);
    return rho;
}

}  // namespace

double wasserstein1_1d(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein1_1d: empty sample");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    if (x.size() == y.size()) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
        return s / static_cast<double>(x.size());
    }
    // walk the merged quantile breakpoints k/n and l/m
    const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double u = 0.0, total = 0.0;
    while (i < x.size() && j < y.size()) {
        const double next_x = static_cast<double>(i + 1) / n, next_y = static_cast<double>(j + 1) / m;
        const double next = std::min(next_x, next_y);
        total += (next - u) * std::abs(x[i] - y[j]);
        u = next;
        if (next_x <= next) ++i;
        if (next_y <= next) ++j;
    }
    return total;
}

double wasserstein1_mean(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    check_pair(a, b, 1);
    if (a.rows() == 0) throw std::invalid_argument("wasserstein1_mean: zero-dimensional samples");
    double s = 0.0;
    for (Eigen::Index r = 0; r < a.rows(); ++r) s += wasserstein1_1d(row_vector(a, r), row_vector(b, r));
    return s / static_cast<double>(a.rows());
}

double variance_score(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("variance_score: need at least two samples each");
    auto var = [](std::span<const double> v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return s / static_cast<double>(v.size() - 1);
    };
    return std::abs(var(a) - var(b));
}

double marginal_hist_loss(const Eigen::MatrixXd& real, const Eigen::MatrixXd& gen, std::size_t bins) {
    check_pair(real, gen, 1);
    if (bins == 0) throw std::invalid_argument("marginal_hist_loss: bins must be >= 1");
    if (real.rows() == 0) throw std::invalid_argument("marginal_hist_loss: zero-dimensional samples");
    double total = 0.0;
    std::vector<double> hr(bins), hg(bins);
    for (Eigen::Index r = 0; r < real.rows(); ++r) {
        const double lo = std::min(real.row(r).minCoeff(), gen.row(r).minCoeff());
        const double hi = std::max(real.row(r).maxCoeff(), gen.row(r).maxCoeff());
        if (!(hi > lo)) continue;
        const double width = (hi - lo) / static_cast<double>(bins);
        auto fill = [&](const Eigen::MatrixXd& m, std::vector<double>& h) {
            std::fill(h.begin(), h.end(), 0.0);
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                auto k = static_cast<std::size_t>((m(r, j) - lo) / width);
                h[std::min(k, bins - 1)] += 1.0;
            }
            const double norm = 1.0 / (static_cast<double>(m.cols()) * width);
            for (double& v : h) v *= norm;
        };
        fill(real, hr);
        fill(gen, hg);
        double s = 0.0;
        for (std::size_t k = 0; k < bins; ++k) s += std::abs(hr[k] - hg[k]);
        total += s / static_cast<double>(bins);
    }
    return total / static_cast<double>(real.rows());
}

double correlation_discrepancy(const Eigen::MatrixXd& real, const Eigen::MatrixXd& gen, const PathLayout& layout) {
    check_pair(real, gen, 2);
    check_layout(real, layout);
    std::vector<bool> vr, vg;
    const Eigen::MatrixXd rr = correlation(real, vr), rg = correlation(gen, vg);
    const auto d = static_cast<Eigen::Index>(layout.dim());
    double sum = 0.0;
    std::size_t used = 0;
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) {
            const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
            if (!(vr[ui] && vr[uj] && vg[ui] && vg[uj])) continue;
            sum += std::abs(rr(i, j) - rg(i, j));
            ++used;
        }
    if (used == 0) throw std::invalid_argument("correlation_discrepancy: every coordinate is constant");
    const double all_pairs = static_cast<double>(d) * static_cast<double>(d);
    const double norm = static_cast<double>(layout.n_grid) * static_cast<double>(layout.n_channels * layout.n_channels);
    return sum / (norm * static_cast<double>(used) / all_pairs);
}

Eigen::VectorXd autocorrelation(const Eigen::MatrixXd& paths, const PathLayout& layout, std::size_t channel,
                                std::size_t max_lag) {
    check_layout(paths, layout);
    if (channel >= layout.n_channels) throw std::invalid_argument("autocorrelation: channel out of range");
    if (max_lag < 1 || max_lag >= layout.n_grid) throw std::invalid_argument("autocorrelation: need 1 <= max_lag < n_grid");
    if (paths.cols() < 1) throw std::invalid_argument("autocorrelation: no paths");
    const auto T = static_cast<Eigen::Index>(layout.n_grid);
    const Eigen::MatrixXd block = paths.middleRows(layout.row(0, channel), T);
    const double mean = block.mean();
    const double var = (block.array() - mean).square().mean();
    Eigen::VectorXd ac(static_cast<Eigen::Index>(max_lag));
    if (!(var > 0.0)) {
        ac.setZero();
        return ac;
    }
    const Eigen::MatrixXd z = (block.array() - mean) / std::sqrt(var);
    for (std::size_t tau = 1; tau <= max_lag; ++tau) {
        const auto l = static_cast<Eigen::Index>(tau);
        ac[l - 1] = (z.topRows(T - l).array() * z.bottomRows(T - l).array()).mean();
    }
    return ac;
}

double autocorrelation_discrepancy(const Eigen::MatrixXd& real, const Eigen::MatrixXd& gen, const PathLayout& layout,
                                   std::size_t max_lag) {
    check_pair(real, gen, 1);
    double total = 0.0;
    for (std::size_t c = 0; c < layout.n_channels; ++c)
        total += (autocorrelation(real, layout, c, max_lag) - autocorrelation(gen, layout, c, max_lag)).cwiseAbs().mean();
    return total / static_cast<double>(layout.n_channels);
}

}  // namespace sigdeg::metrics
