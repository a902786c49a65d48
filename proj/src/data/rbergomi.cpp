#include "sigdeg/data/rbergomi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "sigdeg/errors.hpp"

namespace sigdeg::data {

void RBergomiSpec::validate() const {
    if (!(a > -0.5 && a < 0.0)) throw std::invalid_argument("RBergomiSpec: a must lie in (-0.5, 0)");
    if (!(std::abs(rho) <= 1.0)) throw std::invalid_argument("RBergomiSpec: |rho| must be <= 1");
    if (!(xi > 0.0 && eta > 0.0)) throw std::invalid_argument("RBergomiSpec: xi and eta must be positive");
    if (!(horizon > 0.0 && s0 > 0.0)) throw std::invalid_argument("RBergomiSpec: horizon and s0 must be positive");
    if (n_obs < 2 || steps_per_obs < 1) throw std::invalid_argument("RBergomiSpec: need n_obs >= 2 and steps_per_obs >= 1");
}

VolterraDraw hybrid_volterra(double a, double horizon, std::size_t n_steps, std::size_t n_paths, stoch::Rng& rng) {
    if (!(a > -0.5 && a < 0.0)) throw std::invalid_argument("hybrid_volterra: a must lie in (-0.5, 0)");
    if (n_steps < 1 || n_paths < 1) throw std::invalid_argument("hybrid_volterra: empty request");
    const double dt = horizon / static_cast<double>(n_steps);
    const auto n = static_cast<Eigen::Index>(n_steps);
    const auto np = static_cast<Eigen::Index>(n_paths);

    // (dW, int over the last cell of (t_i - s)^a dW) is jointly Gaussian
    const double v11 = dt;
    const double v12 = std::pow(dt, a + 1.0) / (a + 1.0);
    const double v22 = std::pow(dt, 2.0 * a + 1.0) / (2.0 * a + 1.0);
    const double l11 = std::sqrt(v11);
    const double l21 = v12 / l11;
    const double l22 = std::sqrt(v22 - l21 * l21);

    // Riemann weights at the optimal points b_k, k >= 2
    Eigen::VectorXd w(n + 1);
    w.setZero();
    for (Eigen::Index k = 2; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double bk = std::pow((std::pow(kk, a + 1.0) - std::pow(kk - 1.0, a + 1.0)) / (a + 1.0), 1.0 / a);
        w[k] = std::pow(bk * dt, a);
    }

    VolterraDraw out{Eigen::MatrixXd(n, np), Eigen::MatrixXd(n, np)};
    Eigen::VectorXd local(n);
    const double scale = std::sqrt(2.0 * a + 1.0);
    for (Eigen::Index p = 0; p < np; ++p) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double z1 = rng.normal(), z2 = rng.normal();
            out.dw1(i, p) = l11 * z1;
            local[i] = l21 * z1 + l22 * z2;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            // step i + 1: cell k covers increment index i + 1 - k
            double s = local[i];
            for (Eigen::Index k = 2; k <= i + 1; ++k) s += w[k] * out.dw1(i + 1 - k, p);
            out.y(i, p) = scale * s;
        }
    }
    return out;
}

Eigen::MatrixXd rbergomi_hybrid(const RBergomiSpec& spec, std::size_t n_paths, stoch::Rng& rng) {
    spec.validate();
    if (n_paths == 0) throw std::invalid_argument("rbergomi_hybrid: n_paths must be >= 1");
    const std::size_t ns = spec.n_steps();
    const double dt = spec.horizon / static_cast<double>(ns);
    const auto no = static_cast<Eigen::Index>(spec.n_obs);
    const double rho_bar = std::sqrt(1.0 - spec.rho * spec.rho);
    const double two_a1 = 2.0 * spec.a + 1.0;

    Eigen::MatrixXd out(2 * no, static_cast<Eigen::Index>(n_paths));
    const std::size_t chunk = 1024;
    for (std::size_t c0 = 0, ci = 0; c0 < n_paths; c0 += chunk, ++ci) {
        const std::size_t nc = std::min(chunk, n_paths - c0);
        stoch::Rng crng = rng.fork(stoch::stream_id("rbergomi.paths", rng.stream(), ci));
        const VolterraDraw vd = hybrid_volterra(spec.a, spec.horizon, ns, nc, crng);
        for (std::size_t p = 0; p < nc; ++p) {
            const auto pc = static_cast<Eigen::Index>(p);
            const auto col = static_cast<Eigen::Index>(c0 + p);
            double log_s = std::log(spec.s0);
            double v_prev = spec.xi;
            for (std::size_t i = 0; i < ns; ++i) {
                const auto ii = static_cast<Eigen::Index>(i);
                const double db = spec.rho * vd.dw1(ii, pc) + rho_bar * std::sqrt(dt) * crng.normal();
                log_s += std::sqrt(v_prev) * db - 0.5 * v_prev * dt;
                const double t = static_cast<double>(i + 1) * dt;
                const double log_v = std::log(spec.xi) + spec.eta * vd.y(ii, pc) - 0.5 * spec.eta * spec.eta * std::pow(t, two_a1);
                v_prev = std::exp(log_v);
                if ((i + 1) % spec.steps_per_obs == 0) {
                    const auto o = static_cast<Eigen::Index>((i + 1) / spec.steps_per_obs - 1);
                    out(o, col) = log_s;
                    out(no + o, col) = log_v;
                }
            }
        }
    }
    return out;
}

Eigen::MatrixXd rbergomi_cov_oracle(const RBergomiSpec& spec, std::size_t n_grid) {
    spec.validate();
    if (n_grid < 1 || n_grid > 32) throw std::invalid_argument("rbergomi_cov_oracle: n_grid must lie in [1, 32]");
    const double a = spec.a;
    const double dt = spec.horizon / static_cast<double>(n_grid);
    const auto n = static_cast<Eigen::Index>(n_grid);
    const double c = std::sqrt(2.0 * a + 1.0);
    boost::math::quadrature::tanh_sinh<double> integrator;
    constexpr double kTol = 1e-8;

    auto integrate = [&](auto f, double lo, double hi) {
        if (!(hi > lo)) return 0.0;
        double err = 0.0, l1 = 0.0;
        const double v = integrator.integrate(f, lo, hi, 1e-12, &err, &l1);
        if (!std::isfinite(v) || err > kTol * std::max(1.0, l1))
            throw NumericError("rbergomi_cov_oracle: quadrature did not converge on [" + std::to_string(lo) + ", " +
                               std::to_string(hi) + "], error estimate " + std::to_string(err));
        return v;
    };
    auto node = [&](Eigen::Index i) { return static_cast<double>(i) * dt; };

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (Eigen::Index m = 0; m < n; ++m) cov(m, m) = dt;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double ti = node(i + 1);
        // increment m covers [t_m, t_{m+1}]; kernel is zero past t_i
        for (Eigen::Index m = 0; m <= i; ++m) {
            const double hi = node(m + 1);
            const double v = c * integrate([&](double s, double dist_to_hi) {
                const double r = dist_to_hi > 0.0 ? (ti - hi) + dist_to_hi : ti - s;
                return std::pow(r, a);
            }, node(m), hi);
            cov(m, n + i) = cov(n + i, m) = v;
        }
        for (Eigen::Index j = i; j < n; ++j) {
            const double tj = node(j + 1);
            const double v = (2.0 * a + 1.0) *
                             integrate([&](double s, double dist_to_hi) {
                                 // dist_to_hi = ti - s near the upper endpoint avoids cancellation
                                 const double r = dist_to_hi > 0.0 ? dist_to_hi : ti - s;
                                 return std::pow(r, a) * std::pow(tj - ti + r, a);
                             }, 0.0, ti);
            cov(n + i, n + j) = cov(n + j, n + i) = v;
        }
    }
    return cov;
}

}  // namespace sigdeg::data
