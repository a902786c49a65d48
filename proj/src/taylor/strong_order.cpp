#include "sigdeg/taylor/strong_order.hpp"

#include <cmath>
#include <stdexcept>

#include "sigdeg/taylor/solvers.hpp"

namespace sigdeg::taylor {

const char* scheme_name(Scheme s) { return s == Scheme::high_order ? "high_order" : "euler"; }

double fit_log_log_slope(const std::vector<double>& step_sizes, const std::vector<double>& errors) {
    if (step_sizes.size() != errors.size() || step_sizes.size() < 2)
        throw std::invalid_argument("fit_log_log_slope: need >= 2 matching points");
    const double n = static_cast<double>(step_sizes.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < step_sizes.size(); ++i) {
        const double x = std::log(step_sizes[i]);
        const double y = std::log(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<StrongOrderResult> estimate_strong_orders(const SdeSpec& sde, const StrongOrderOptions& opts,
                                                      const stoch::Rng& rng) {
    if (opts.resolutions.size() < 3)
        throw std::invalid_argument("estimate_strong_order: need at least 3 resolutions");
    if (opts.n_paths == 0) throw std::invalid_argument("estimate_strong_order: n_paths must be >= 1");
    if (opts.y0.size() != sde.dim) throw std::invalid_argument("estimate_strong_order: y0 dimension mismatch");
    for (const auto n : opts.resolutions)
        if (n == 0 || opts.reference_steps % n != 0)
            throw std::invalid_argument("estimate_strong_order: resolutions must divide reference_steps");

    const int d = sde.dim;
    const std::size_t nf = opts.reference_steps;
    const double h = opts.t_end / static_cast<double>(nf);
    const double sqrt_h = std::sqrt(h);
    const std::size_t n_res = opts.resolutions.size();

    std::vector<double> sum_abs[2], sum_sq[2];
    for (auto* v : {&sum_abs[0], &sum_abs[1], &sum_sq[0], &sum_sq[1]}) v->assign(n_res, 0.0);

    Eigen::MatrixXd incs(d, static_cast<Eigen::Index>(nf));
    Eigen::VectorXd y(d), mu(d);
    std::vector<stoch::PartialSignature> blocks;

    for (std::size_t p = 0; p < opts.n_paths; ++p) {
        stoch::Rng path_rng = rng.fork(stoch::stream_id("strong_order.path", p));
        for (Eigen::Index i = 0; i < incs.cols(); ++i)
            for (int k = 0; k < d; ++k) incs(k, i) = sqrt_h * path_rng.normal();

        y = opts.y0;
        for (std::size_t i = 0; i < nf; ++i) {
            const double t = static_cast<double>(i) * h;
            sde.drift(t, y, mu);
            y += h * mu + sde.sigma(t) * incs.col(static_cast<Eigen::Index>(i));
        }
        const Eigen::VectorXd reference = y;

        for (std::size_t r = 0; r < n_res; ++r) {
            const std::size_t n_coarse = opts.resolutions[r];
            const std::size_t ratio = nf / n_coarse;
            const stoch::TimeGrid coarse(0.0, opts.t_end, n_coarse);
            blocks.assign(n_coarse, stoch::PartialSignature::zero(static_cast<std::size_t>(d)));
            for (std::size_t b = 0; b < n_coarse; ++b) {
                auto& ps = blocks[b];
                for (std::size_t i = b * ratio; i < (b + 1) * ratio; ++i) {
                    const auto delta = incs.col(static_cast<Eigen::Index>(i));
                    ps.s21 += h * ps.dw + (0.5 * h) * delta;
                    ps.dw += delta;
                }
                ps.dt = coarse.step();
            }
            const Trajectory ho = solve_high_order(sde, opts.y0, coarse, blocks);

            stoch::BrownianIncrements coarse_incs{coarse, Eigen::MatrixXd(static_cast<Eigen::Index>(n_coarse), d)};
            for (std::size_t b = 0; b < n_coarse; ++b)
                coarse_incs.increments.row(static_cast<Eigen::Index>(b)) = blocks[b].dw.transpose();
            const Trajectory em = solve_euler(sde, opts.y0, coarse_incs);

            const double e_ho = (ho.terminal() - reference).norm();
            const double e_em = (em.terminal() - reference).norm();
            sum_abs[0][r] += e_ho;
            sum_sq[0][r] += e_ho * e_ho;
            sum_abs[1][r] += e_em;
            sum_sq[1][r] += e_em * e_em;
        }
    }

    std::vector<StrongOrderResult> results(2);
    const double np = static_cast<double>(opts.n_paths);
    for (int s = 0; s < 2; ++s) {
        auto& res = results[static_cast<std::size_t>(s)];
        res.scheme = s == 0 ? Scheme::high_order : Scheme::euler;
        for (std::size_t r = 0; r < n_res; ++r) {
            const double mean = sum_abs[s][r] / np;
            const double var = np > 1 ? (sum_sq[s][r] - np * mean * mean) / (np - 1) : 0.0;
            res.step_sizes.push_back(opts.t_end / static_cast<double>(opts.resolutions[r]));
            res.mean_abs_error.push_back(mean);
            res.std_error.push_back(std::sqrt(std::max(var, 0.0) / np));
        }
        res.slope = fit_log_log_slope(res.step_sizes, res.mean_abs_error);
    }
    return results;
}

StrongOrderResult estimate_strong_order(const SdeSpec& sde, Scheme scheme, const StrongOrderOptions& opts,
                                        const stoch::Rng& rng) {
    auto both = estimate_strong_orders(sde, opts, rng);
    return both[scheme == Scheme::high_order ? 0 : 1];
}

}  // namespace sigdeg::taylor
