#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"

#include "sigdeg/metrics/metrics.hpp"
#include "sigdeg/metrics/report.hpp"
#include "sigdeg/stoch/rng.hpp"

using namespace sigdeg;
using namespace sigdeg::metrics;

namespace {

std::vector<double> normals(std::size_t n, double mean, double sd, stoch::Rng& r) {
    std::vector<double> v(n);
    for (double& x : v) x = mean + sd * r.normal();
    return v;
}

Eigen::MatrixXd white(std::size_t T, std::size_t n, stoch::Rng& r) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(n));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = r.normal();
    return m;
}

}  // namespace

TEST_CASE("wasserstein examples") {
    std::vector<double> a{0.3, -1.0, 2.0};
    CHECK(wasserstein1_1d(a, a) == 0.0);
    CHECK(wasserstein1_1d(std::vector<double>{0.0}, std::vector<double>{1.0}) == 1.0);
    CHECK(wasserstein1_1d(std::vector<double>{0.0, 1.0}, std::vector<double>{0.0, 0.5, 1.0}) == doctest::Approx(1.0 / 6));
    std::vector<double> twice{0.3, -1.0, 2.0, 2.0, 0.3, -1.0};
    CHECK(wasserstein1_1d(a, twice) == doctest::Approx(0.0).scale(1));
    CHECK_THROWS_AS(wasserstein1_1d(std::vector<double>{}, a), std::invalid_argument);

    stoch::Rng r(1);
    auto x = normals(100000, 0.0, 1.0, r), y = normals(100000, 0.5, 1.0, r);
    CHECK(std::abs(wasserstein1_1d(x, y) - 0.5) < 0.02);
}

TEST_CASE("wasserstein properties") {
    stoch::Rng r(2);
    for (int trial = 0; trial < 20; ++trial) {
        auto a = normals(50 + trial, 0.0, 1.0, r), b = normals(70, 0.3, 2.0, r), c = normals(33, -0.5, 0.5, r);
        CHECK(wasserstein1_1d(a, c) <= wasserstein1_1d(a, b) + wasserstein1_1d(b, c) + 1e-12);
        CHECK(wasserstein1_1d(a, b) == doctest::Approx(wasserstein1_1d(b, a)).epsilon(1e-12));
        const double lambda = -2.5;
        auto la = a, lb = b;
        for (double& v : la) v *= lambda;
        for (double& v : lb) v *= lambda;
        CHECK(wasserstein1_1d(la, lb) == doctest::Approx(std::abs(lambda) * wasserstein1_1d(a, b)).epsilon(1e-12));
        auto pa = a;
        std::reverse(pa.begin(), pa.end());
        CHECK(wasserstein1_1d(pa, b) == doctest::Approx(wasserstein1_1d(a, b)).epsilon(1e-14));
    }
    Eigen::MatrixXd m1(2, 2), m2(2, 2);
    m1 << 0, 0, 1, 1;
    m2 << 1, 1, 1, 1;
    CHECK(wasserstein1_mean(m1, m2) == 0.5);
}

TEST_CASE("variance score") {
    stoch::Rng r(3);
    auto a = normals(100000, 0.0, 1.0, r), b = normals(100000, 0.0, 2.0, r);
    CHECK(variance_score(a, a) == 0.0);
    CHECK(std::abs(variance_score(a, b) - 3.0) < 0.15);
    auto mix = [&](std::size_t n) {
        std::vector<double> v(n);
        for (double& x : v) x = (r.uniform() < 0.5 ? -2.0 : 2.0) + 0.5 * r.normal();
        return v;
    };
    CHECK(variance_score(mix(10000), mix(10000)) <= 0.1);
    CHECK_THROWS_AS(variance_score(std::vector<double>{1.0}, a), std::invalid_argument);
}

TEST_CASE("marginal histogram loss") {
    stoch::Rng r(4);
    Eigen::MatrixXd real = white(5, 300, r);
    CHECK(marginal_hist_loss(real, real, 50) == 0.0);
    // supports [0, 1) and [1, 2] over the pooled range [0, 2] with two unit bins
    Eigen::MatrixXd lo(1, 4), hi(1, 4);
    lo << 0.0, 0.2, 0.5, 0.9;
    hi << 1.0, 1.5, 1.7, 2.0;
    CHECK(marginal_hist_loss(lo, hi, 2) == doctest::Approx(1.0).epsilon(1e-14));
    Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(1, 4, 3.0);
    CHECK(marginal_hist_loss(flat, flat, 10) == 0.0);
    Eigen::MatrixXd perm = real.rowwise().reverse();
    CHECK(marginal_hist_loss(real, perm, 50) == doctest::Approx(0.0).scale(1));
}

TEST_CASE("correlation discrepancy") {
    stoch::Rng r(5);
    const int n = 20000;
    Eigen::MatrixXd eq(2, n), ind(2, n);
    for (int j = 0; j < n; ++j) {
        const double common = r.normal();
        eq(0, j) = std::sqrt(0.9) * common + std::sqrt(0.1) * r.normal();
        eq(1, j) = std::sqrt(0.9) * common + std::sqrt(0.1) * r.normal();
        ind(0, j) = r.normal();
        ind(1, j) = r.normal();
    }
    PathLayout one_time{1, 2};
    CHECK(correlation_discrepancy(eq, eq, one_time) == 0.0);
    // two off-diagonal entries of 0.9 over T d^2 = 4
    CHECK(std::abs(correlation_discrepancy(eq, ind, one_time) - 0.45) < 0.02);

    PathLayout layout{3, 2};
    Eigen::MatrixXd iid = white(6, n, r);
    Eigen::MatrixXd swapped(6, n);
    swapped.topRows(3) = iid.bottomRows(3);
    swapped.bottomRows(3) = iid.topRows(3);
    CHECK(correlation_discrepancy(iid, swapped, layout) < 0.1);
    Eigen::MatrixXd with_const = iid;
    with_const.row(1).setConstant(2.0);
    CHECK(std::isfinite(correlation_discrepancy(with_const, iid, layout)));
    Eigen::MatrixXd shuffled = iid.rowwise().reverse();
    CHECK(correlation_discrepancy(iid, shuffled, layout) == doctest::Approx(0.0).scale(1));
}

TEST_CASE("autocorrelation discrepancy") {
    stoch::Rng r(6);
    const std::size_t T = 25, n = 10000;
    PathLayout layout{T, 1};
    Eigen::MatrixXd w1 = white(T, n, r), w2 = white(T, n, r);
    CHECK(autocorrelation_discrepancy(w1, w1, layout, 10) == 0.0);
    CHECK(autocorrelation_discrepancy(w1, w2, layout, 10) <= 0.02);

    const double phi = 0.8;
    Eigen::MatrixXd ar(T, n);
    for (std::size_t j = 0; j < n; ++j) {
        double x = r.normal();
        for (std::size_t t = 0; t < T; ++t) {
            if (t > 0) x = phi * x + std::sqrt(1 - phi * phi) * r.normal();
            ar(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = x;
        }
    }
    double expect = 0;
    for (int tau = 1; tau <= 5; ++tau) expect += std::pow(phi, tau) / 5;
    CHECK(expect == doctest::Approx(0.537856).epsilon(1e-12));
    CHECK(std::abs(autocorrelation_discrepancy(ar, w1, layout, 5) - expect) < 0.02);
    CHECK_THROWS_AS(autocorrelation_discrepancy(ar, w1, layout, 25), std::invalid_argument);
    CHECK_THROWS_AS(autocorrelation_discrepancy(ar, w1, layout, 0), std::invalid_argument);
}

TEST_CASE("metric report") {
    MetricReport rep("student");
    rep.add("w1", 0.5);
    rep.add("w1", 0.7);
    rep.set_count("nfe_per_sample", 5);
    rep.add_timing("sample", 0.25);
    CHECK(rep.summary("w1").mean == doctest::Approx(0.6));
    CHECK(rep.summary("w1").std == doctest::Approx(std::sqrt(0.02)));
    const auto j = rep.to_json();
    CHECK(j["metrics"]["w1"]["repeats"] == 2);
    CHECK(j["counts"]["nfe_per_sample"] == 5);
    const std::string csv = rep.to_csv();
    CHECK(csv.find("label,metric,repeat,value") == 0);
    CHECK(csv.find("student,w1,1,0.69999") != std::string::npos);
    CHECK(csv.find("student,time:sample,0,0.25") != std::string::npos);
    CHECK_THROWS_AS(rep.add("bad", std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(rep.summary("missing"), std::invalid_argument);

    int calls = 0;
    auto t = time_repeats([&] { ++calls; }, 10);
    CHECK(calls == 10);
    CHECK(t.size() == 10);
    CHECK(nfe_ratio(300, 5) == 60.0);
    CHECK(nfe_ratio(1000, 10) == 100.0);
}
