#include <cmath>
#include <vector>

#include "doctest.h"

#include "sigdeg/stoch/partial_signature.hpp"
#include "sigdeg/taylor/solvers.hpp"
#include "sigdeg/taylor/strong_order.hpp"

using namespace sigdeg;
using namespace sigdeg::taylor;

namespace {

SdeSpec constant_noise(double c) { return make_linear_test_sde(0.0, c, 0.0); }

std::vector<stoch::PartialSignature> blocks_from(const stoch::BrownianIncrements& inc, std::size_t n_coarse) {
    const std::size_t r = inc.grid.n_steps() / n_coarse;
    std::vector<stoch::PartialSignature> out;
    for (std::size_t i = 0; i < n_coarse; ++i) out.push_back(stoch::ps_from_increments(inc, i * r, (i + 1) * r));
    return out;
}

}  // namespace

TEST_CASE("f_local reduces correctly") {
    const auto sde = make_linear_test_sde(-0.5, 0.4, 1.0);
    Eigen::VectorXd y(1);
    y << 1.2;
    CHECK(f_local(0.3, y, stoch::PartialSignature::zero(1), sde).norm() == 0.0);

    const auto flat = constant_noise(0.7);
    stoch::PartialSignature ps{0.2, Eigen::VectorXd::Constant(1, 0.3), Eigen::VectorXd::Constant(1, 0.01)};
    CHECK(f_local(0.1, y, ps, flat)(0) == doctest::Approx(0.7 * 0.3).epsilon(1e-15));
}

TEST_CASE("f_local matches a term-by-term evaluation") {
    const double a = -0.5, s0 = 0.4, b = 1.0, s = 0.3, yv = 1.2;
    const double s1 = 0.1, s2 = 0.05, s21 = 0.002;
    const auto sde = make_linear_test_sde(a, s0, b);
    Eigen::VectorXd y(1);
    y << yv;
    stoch::PartialSignature ps{s1, Eigen::VectorXd::Constant(1, s2), Eigen::VectorXd::Constant(1, s21)};
    const double sig = s0 * std::exp(b * s);
    const double oracle = a * yv * s1 + sig * s2 + b * sig * (s1 * s2 - s21) + a * sig * s21;
    CHECK(f_local(s, y, ps, sde)(0) == doctest::Approx(oracle).epsilon(1e-14));
    CHECK(f_local(s, y, ps, sde)(0) == doctest::Approx(-0.0319229368024191354).epsilon(1e-14));

    stoch::PartialSignature bad{s1, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)};
    CHECK_THROWS_AS(f_local(s, y, bad, sde), std::invalid_argument);
}

TEST_CASE("deterministic limit converges to the exponential") {
    const double a = -0.8;
    const auto sde = make_linear_test_sde(a, 0.0, 0.0);
    Eigen::VectorXd y0 = Eigen::VectorXd::Ones(1);
    double prev = 1e9;
    for (std::size_t n : {8, 16, 32, 64}) {
        const auto g = stoch::make_uniform_grid(0, 1, n);
        std::vector<stoch::PartialSignature> ps;
        for (std::size_t i = 0; i < n; ++i) ps.push_back({g.step(), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)});
        const double err = std::abs(solve_high_order(sde, y0, g, ps).terminal()(0) - std::exp(a));
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 1e-2);
}

TEST_CASE("euler step definition and ODE case") {
    const auto sde = make_linear_test_sde(-1.0, 0.5, 0.5);
    stoch::BrownianIncrements inc{stoch::make_uniform_grid(0.2, 0.45, 1), Eigen::MatrixXd::Constant(1, 1, 0.3)};
    Eigen::VectorXd y0 = Eigen::VectorXd::Constant(1, 2.0);
    const double expect = 2.0 + (-2.0) * 0.25 + 0.5 * std::exp(0.5 * 0.2) * 0.3;
    CHECK(solve_euler(sde, y0, inc).terminal()(0) == doctest::Approx(expect).epsilon(1e-15));

    const auto ode = make_linear_test_sde(0.5, 0.0, 0.0);
    stoch::BrownianIncrements z{stoch::make_uniform_grid(0, 1, 4), Eigen::MatrixXd::Zero(4, 1)};
    CHECK(solve_euler(ode, Eigen::VectorXd::Ones(1), z).terminal()(0) == doctest::Approx(std::pow(1.125, 4)).epsilon(1e-14));
}

TEST_CASE("additive constant noise is exact and both schemes couple") {
    stoch::Rng r(3);
    const auto g = stoch::make_uniform_grid(0, 1, 64);
    const auto sde = constant_noise(0.9);
    for (int trial = 0; trial < 10; ++trial) {
        auto inc = sample_brownian(g, 1, r);
        Eigen::VectorXd y0 = Eigen::VectorXd::Constant(1, 0.4);
        const double wt = inc.increments.sum();
        for (std::size_t nc : {1, 4, 16}) {
            auto ho = solve_high_order(sde, y0, stoch::make_uniform_grid(0, 1, nc), blocks_from(inc, nc));
            CHECK(ho.terminal()(0) == doctest::Approx(0.4 + 0.9 * wt).epsilon(1e-13));
        }
        CHECK(solve_euler(sde, y0, inc).terminal()(0) == doctest::Approx(0.4 + 0.9 * wt).epsilon(1e-13));
    }
}

TEST_CASE("high-order inputs from folding give identical output") {
    stoch::Rng r(4);
    const auto sde = make_linear_test_sde(-1.0, 0.5, 0.5);
    auto inc = sample_brownian(stoch::make_uniform_grid(0, 1, 32), 1, r);
    auto direct = blocks_from(inc, 4);
    std::vector<stoch::PartialSignature> folded;
    for (std::size_t i = 0; i < 4; ++i) {
        auto acc = stoch::PartialSignature::zero(1);
        for (std::size_t k = 8 * i; k < 8 * (i + 1); ++k)
            acc = stoch::ps_chain(acc, stoch::ps_from_increments(inc, k, k + 1));
        folded.push_back(acc);
    }
    const auto g = stoch::make_uniform_grid(0, 1, 4);
    Eigen::VectorXd y0 = Eigen::VectorXd::Ones(1);
    auto a = solve_high_order(sde, y0, g, direct), b = solve_high_order(sde, y0, g, folded);
    CHECK((a.states - b.states).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(a.states.rows() == 5);
    CHECK(a.states(0, 0) == 1.0);
    CHECK_THROWS_AS(solve_high_order(sde, y0, g, std::span(direct).first(3)), std::invalid_argument);
}

TEST_CASE("least-squares slope") {
    std::vector<double> h{0.25, 0.125, 0.0625};
    std::vector<double> e;
    for (double x : h) e.push_back(3.0 * x * x);
    CHECK(fit_log_log_slope(h, e) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("strong order estimator behaviour") {
    const auto sde = make_linear_test_sde(-1.0, 0.5, 0.5);
    StrongOrderOptions opts;
    opts.n_paths = 256;
    opts.reference_steps = 1 << 12;
    const auto res = estimate_strong_orders(sde, opts, stoch::Rng(2024));
    REQUIRE(res.size() == 2);
    const auto& ho = res[0];
    const auto& eu = res[1];
    CHECK(ho.scheme == Scheme::high_order);
    CHECK(ho.slope > 0.85);
    CHECK(ho.slope < 1.15);
    for (std::size_t i = 0; i < ho.mean_abs_error.size(); ++i) CHECK(ho.mean_abs_error[i] < eu.mean_abs_error[i]);
    for (std::size_t i = 1; i < ho.mean_abs_error.size(); ++i) {
        CHECK(ho.mean_abs_error[i] <= ho.mean_abs_error[i - 1]);
        CHECK(eu.mean_abs_error[i] <= eu.mean_abs_error[i - 1]);
    }
    // additive noise with a smooth volatility: Euler is also first order here
    CHECK(eu.slope > 0.8);

    StrongOrderOptions few = opts;
    few.resolutions = {4, 8};
    CHECK_THROWS_AS(estimate_strong_orders(sde, few, stoch::Rng(1)), std::invalid_argument);
}

TEST_CASE("deterministic sde errors do not depend on path count") {
    const auto sde = make_linear_test_sde(-1.0, 0.0, 0.0);
    StrongOrderOptions opts;
    opts.reference_steps = 1 << 10;
    opts.n_paths = 4;
    auto a = estimate_strong_order(sde, Scheme::high_order, opts, stoch::Rng(1));
    opts.n_paths = 16;
    auto b = estimate_strong_order(sde, Scheme::high_order, opts, stoch::Rng(2));
    for (std::size_t i = 0; i < a.mean_abs_error.size(); ++i)
        CHECK(a.mean_abs_error[i] == doctest::Approx(b.mean_abs_error[i]).epsilon(1e-12));
}
