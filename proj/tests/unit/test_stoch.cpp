#include <cmath>
#include <vector>

#include "doctest.h"

#include "sigdeg/stoch/partial_signature.hpp"
#include "sigdeg/stoch/rng.hpp"
#include "sigdeg/stoch/time_grid.hpp"

using namespace sigdeg::stoch;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace

TEST_CASE("philox known-answer vectors") {
    auto zero = Rng::philox_block({0, 0, 0, 0}, {0, 0});
    CHECK(zero[0] == 0x6627e8d5u);
    CHECK(zero[1] == 0xe169c58du);
    CHECK(zero[2] == 0xbc57ac4cu);
    CHECK(zero[3] == 0x9b00dbd8u);
    auto ones = Rng::philox_block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    CHECK(ones[0] == 0x408f276du);
    CHECK(ones[1] == 0x41c83b0eu);
    CHECK(ones[2] == 0xa20bc7c6u);
    CHECK(ones[3] == 0x6d5451fdu);
}

TEST_CASE("rng streams are reproducible and distinct") {
    Rng a(42, 7), b(42, 7), c(42, 8);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a();
        CHECK(x == b());
        differs = differs || (x != c());
    }
    CHECK(differs);
    CHECK(stream_id("teacher.batch", 1, 2) == stream_id("teacher.batch", 1, 2));
    CHECK(stream_id("teacher.batch", 1, 2) != stream_id("teacher.batch", 2, 1));
    CHECK(stream_id("a") != stream_id("b"));
}

TEST_CASE("rng uniform and normal moments") {
    Rng r(1);
    const int n = 200000;
    double su = 0, sn = 0, sn2 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        su += u;
        const double z = r.normal();
        sn += z;
        sn2 += z * z;
    }
    CHECK(std::abs(su / n - 0.5) < 3 * std::sqrt(1.0 / 12 / n));
    CHECK(std::abs(sn / n) < 3 / std::sqrt(double(n)));
    CHECK(std::abs(sn2 / n - 1.0) < 3 * std::sqrt(2.0 / n));
}

TEST_CASE("time grid") {
    auto g = make_uniform_grid(0, 1, 4);
    std::vector<double> expect{0, 0.25, 0.5, 0.75, 1.0};
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(g.node(i) == expect[i]);
    auto one = make_uniform_grid(0, 1, 1);
    CHECK(one.node(0) == 0.0);
    CHECK(one.node(1) == 1.0);
    auto fine = make_uniform_grid(0, 1, 300);
    CHECK(fine.step() == doctest::Approx(1.0 / 300).epsilon(1e-15));
    CHECK(std::abs(fine.step() * 300 - 1.0) < 1e-15);
    for (std::size_t i = 0; i < 300; ++i) CHECK(fine.node(i + 1) > fine.node(i));
    CHECK_THROWS_AS(make_uniform_grid(0, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_uniform_grid(1, 0, 3), std::invalid_argument);
}

TEST_CASE("brownian increments") {
    const auto g = make_uniform_grid(0, 1, 100);
    Rng r(3);
    const int n = 100000;
    double s1 = 0, s2 = 0, t2 = 0;
    for (int p = 0; p < n; ++p) {
        auto inc = sample_brownian(make_uniform_grid(0, 1, 100), 1, r);
        const double x = inc.increments(17, 0);
        s1 += x;
        s2 += x * x;
        const double tot = inc.increments.sum();
        t2 += tot * tot;
        if (p == 0) {
            auto path = inc.path();
            CHECK(path(0, 0) == 0.0);
            CHECK(path(100, 0) == doctest::Approx(tot).epsilon(1e-12));
        }
    }
    const double var = s2 / n - (s1 / n) * (s1 / n);
    CHECK(std::abs(var - 0.01) < 3e-4);
    CHECK(std::abs(t2 / n - 1.0) < 0.02);

    Rng a(9), b(9);
    CHECK(sample_brownian(g, 3, a).increments == sample_brownian(g, 3, b).increments);
}

TEST_CASE("partial signature of linear paths") {
    const auto g1 = make_uniform_grid(0, 1, 1);
    BrownianIncrements one{g1, Eigen::MatrixXd::Ones(1, 1)};
    auto ps = ps_from_increments(one, 0, 1);
    CHECK(ps.dt == 1.0);
    CHECK(ps.dw(0) == 1.0);
    CHECK(ps.s21(0) == 0.5);

    BrownianIncrements two{make_uniform_grid(0, 2, 2), Eigen::MatrixXd::Ones(2, 1)};
    auto ps2 = ps_from_increments(two, 0, 2);
    CHECK(ps2.dt == 2.0);
    CHECK(ps2.dw(0) == 2.0);
    CHECK(ps2.s21(0) == 2.0);
    auto chained = ps_chain(ps, ps);
    CHECK(chained.dt == 2.0);
    CHECK(chained.dw(0) == 2.0);
    CHECK(chained.s21(0) == 2.0);

    CHECK_THROWS_AS(ps_from_increments(two, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(ps_from_increments(two, 0, 3), std::invalid_argument);
    CHECK_THROWS_AS(ps_chain(PartialSignature::zero(1), PartialSignature::zero(2)), std::invalid_argument);
}

TEST_CASE("chain with zero signature is identity") {
    Rng r(5);
    auto ps = sample_ps_exact(0.3, 2, r);
    auto z = PartialSignature::zero(2);
    for (const auto& c : {ps_chain(z, ps), ps_chain(ps, z)}) {
        CHECK(c.dt == ps.dt);
        CHECK(c.dw == ps.dw);
        CHECK(c.s21 == ps.s21);
    }
    CHECK(z.dt == 0.0);
    CHECK(z.dw.isZero(0));
    CHECK(z.s21.isZero(0));
}

TEST_CASE("chain consistency and associativity on sampled paths") {
    Rng r(11);
    const auto g = make_uniform_grid(0, 1, 64);
    for (int trial = 0; trial < 50; ++trial) {
        auto inc = sample_brownian(g, 2, r);
        const std::size_t u = 1 + static_cast<std::size_t>(r.uniform() * 62);
        auto whole = ps_from_increments(inc, 0, 64);
        auto split = ps_chain(ps_from_increments(inc, 0, u), ps_from_increments(inc, u, 64));
        CHECK(rel_err(whole.dt, split.dt) < 1e-12);
        for (int i = 0; i < 2; ++i) {
            CHECK(rel_err(whole.dw(i), split.dw(i)) < 1e-12);
            CHECK(rel_err(whole.s21(i), split.s21(i)) < 1e-12);
        }
        auto a = ps_from_increments(inc, 0, 10), b = ps_from_increments(inc, 10, 30), c = ps_from_increments(inc, 30, 64);
        auto lhs = ps_chain(ps_chain(a, b), c), rhs = ps_chain(a, ps_chain(b, c));
        for (int i = 0; i < 2; ++i) CHECK(std::abs(lhs.s21(i) - rhs.s21(i)) < 1e-12);
    }
}

TEST_CASE("integration by parts against a Riemann-Stieltjes sum") {
    Rng r(13);
    const std::size_t n = 256;
    const auto g = make_uniform_grid(0, 1, n);
    for (int trial = 0; trial < 20; ++trial) {
        auto inc = sample_brownian(g, 1, r);
        auto ps = ps_from_increments(inc, 0, n);
        // int (u - s) dW over the piecewise-linear path: midpoint of each linear piece
        double rs = 0.0;
        for (std::size_t k = 0; k < n; ++k) rs += (g.node(k) + 0.5 * g.step()) * inc.increments(k, 0);
        CHECK(std::abs(ps.dt * ps.dw(0) - ps.s21(0) - rs) < 1e-10);
    }
}

TEST_CASE("direct Riemann integral of the piecewise-linear path") {
    Rng r(17);
    const std::size_t n = 32;
    auto inc = sample_brownian(make_uniform_grid(0, 1, n), 1, r);
    const Eigen::MatrixXd w = inc.path();
    double trap = 0.0;
    const double h = 1.0 / n;
    for (std::size_t k = 0; k < n; ++k) trap += 0.5 * h * (w(k, 0) + w(k + 1, 0));
    CHECK(std::abs(ps_from_increments(inc, 0, n).s21(0) - trap) < 1e-13);
}

TEST_CASE("exact sampling follows the Gaussian law") {
    for (double dt : {0.1, 0.25, 1.0}) {
        Rng r(19);
        const int n = 200000;
        double m1 = 0, m2 = 0, c11 = 0, c12 = 0, c22 = 0;
        for (int i = 0; i < n; ++i) {
            auto ps = sample_ps_exact(dt, 1, r);
            const double a = ps.dw(0), b = ps.s21(0);
            m1 += a;
            m2 += b;
            c11 += a * a;
            c12 += a * b;
            c22 += b * b;
        }
        m1 /= n;
        m2 /= n;
        c11 /= n;
        c12 /= n;
        c22 /= n;
        const double s11 = dt, s12 = dt * dt / 2, s22 = dt * dt * dt / 3;
        CHECK(std::abs(m1) < 3 * std::sqrt(s11 / n));
        CHECK(std::abs(m2) < 3 * std::sqrt(s22 / n));
        // Var of product estimators for a centred Gaussian pair
        CHECK(std::abs(c11 - s11) < 3 * std::sqrt(2 * s11 * s11 / n));
        CHECK(std::abs(c12 - s12) < 3 * std::sqrt((s11 * s22 + s12 * s12) / n));
        CHECK(std::abs(c22 - s22) < 3 * std::sqrt(2 * s22 * s22 / n));
    }
}

TEST_CASE("exact sampling conditional moments at dt = 1") {
    Rng r(23);
    const int n = 200000;
    std::vector<double> a(n), b(n);
    double sab = 0, saa = 0;
    for (int i = 0; i < n; ++i) {
        auto ps = sample_ps_exact(1.0, 1, r);
        a[i] = ps.dw(0);
        b[i] = ps.s21(0);
        sab += a[i] * b[i];
        saa += a[i] * a[i];
    }
    const double slope = sab / saa;
    double res = 0;
    for (int i = 0; i < n; ++i) res += (b[i] - slope * a[i]) * (b[i] - slope * a[i]);
    CHECK(std::abs(slope - 0.5) < 0.01);
    CHECK(std::abs(res / n - 1.0 / 12) < 0.005);
    CHECK_THROWS_AS(sample_ps_exact(0.0, 1, r), std::invalid_argument);
    CHECK_THROWS_AS(sample_ps_exact(-1.0, 1, r), std::invalid_argument);
}

TEST_CASE("exact sampling variance scaling at dt = 0.25") {
    Rng r(29);
    const int n = 100000;
    double s = 0;
    for (int i = 0; i < n; ++i) {
        const double x = sample_ps_exact(0.25, 1, r).s21(0);
        s += x * x;
    }
    const double target = std::pow(0.25, 3) / 3;
    CHECK(std::abs(s / n - target) < 3 * std::sqrt(2.0 / n) * target);
}

TEST_CASE("blocks of disjoint intervals are uncorrelated") {
    Rng r(31);
    const int n = 50000;
    const auto g = make_uniform_grid(0, 1, 8);
    double c1 = 0, c2 = 0, v1 = 0, v2 = 0;
    for (int p = 0; p < n; ++p) {
        auto inc = sample_brownian(g, 1, r);
        auto a = ps_from_increments(inc, 0, 4), b = ps_from_increments(inc, 4, 8);
        c1 += a.dw(0) * b.dw(0);
        c2 += a.s21(0) * b.s21(0);
        v1 += a.dw(0) * a.dw(0) * b.dw(0) * b.dw(0);
        v2 += a.s21(0) * a.s21(0) * b.s21(0) * b.s21(0);
    }
    CHECK(std::abs(c1 / n) < 3 * std::sqrt(v1 / n / n));
    CHECK(std::abs(c2 / n) < 3 * std::sqrt(v2 / n / n));
}

TEST_CASE("batched prepend matches the forward fold") {
    Rng r(37);
    const std::size_t n = 12;
    const auto g = make_uniform_grid(0, 1, n);
    std::vector<BrownianIncrements> paths;
    for (int p = 0; p < 3; ++p) paths.push_back(sample_brownian(g, 2, r));
    PsBatch acc = PsBatch::zero(2, 3);
    for (std::size_t k = n; k-- > 0;) {
        Eigen::MatrixXd delta(2, 3);
        for (int p = 0; p < 3; ++p) delta.col(p) = paths[p].increments.row(k).transpose();
        ps_prepend_step(acc, g.step(), delta);
    }
    for (int p = 0; p < 3; ++p) {
        auto ref = ps_from_increments(paths[p], 0, n);
        CHECK(std::abs(acc.dt - ref.dt) < 1e-14);
        for (int i = 0; i < 2; ++i) {
            CHECK(std::abs(acc.dw(i, p) - ref.dw(i)) < 1e-12);
            CHECK(std::abs(acc.s21(i, p) - ref.s21(i)) < 1e-12);
        }
    }
    auto left = sample_ps_exact_batch(0.5, 2, 3, r), right = sample_ps_exact_batch(0.5, 2, 3, r);
    auto joined = ps_chain(left, right);
    for (int p = 0; p < 3; ++p) {
        auto single = ps_chain(left.column(p), right.column(p));
        CHECK((joined.column(p).s21 - single.s21).norm() < 1e-14);
    }
}
