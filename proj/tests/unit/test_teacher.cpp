#include <cmath>

#include "doctest.h"

#include "sigdeg/diffusion/schedule.hpp"
#include "sigdeg/diffusion/teacher.hpp"
#include "sigdeg/errors.hpp"

using namespace sigdeg;
using namespace sigdeg::diffusion;

namespace {

TeacherModel gaussian_teacher(std::size_t n_fine) {
    ForwardSchedule s;
    // N(0, 1) data keeps every marginal at N(0, 1): score -y, eps_hat = sigma(t) y
    return TeacherModel::from_predictor(s, 1, n_fine, [s, n_fine](const Eigen::MatrixXd& y, std::size_t k) {
        return Eigen::MatrixXd(s.sigma(static_cast<double>(k) / static_cast<double>(n_fine)) * y);
    });
}

nn::NetArch tiny_arch(int d) {
    nn::NetArch a;
    a.d_in = a.d_out = d;
    a.hidden = 32;
    a.time_embed_dim = 16;
    a.n_blocks = 1;
    return a;
}

}  // namespace

TEST_CASE("schedule identities") {
    ForwardSchedule s;
    CHECK(s.mu(0) == 1.0);
    CHECK(s.sigma(0) == 0.0);
    double prev = 2.0;
    for (int i = 0; i <= 10000; ++i) {
        const double t = i / 10000.0;
        CHECK(std::abs(s.mu(t) * s.mu(t) + s.sigma(t) * s.sigma(t) - 1.0) < 1e-12);
        CHECK(s.mu(t) < prev);
        prev = s.mu(t);
    }
    CHECK(s.mu(1.0) == doctest::Approx(std::exp(-5.025)).epsilon(1e-14));
    CHECK(s.drift_coef(0.5) == doctest::Approx(-0.5 * (0.1 + 0.5 * 19.9)));
    CHECK(s.diffusion(1.0) == doctest::Approx(std::sqrt(20.0)));
}

TEST_CASE("perturb") {
    ForwardSchedule s;
    Eigen::MatrixXd x0 = Eigen::MatrixXd::Constant(2, 1, 1.5), eps = Eigen::MatrixXd::Constant(2, 1, -0.7);
    CHECK(perturb(s, x0, 0.0, eps) == x0);
    CHECK(std::abs(s.mu(1.0) * 1.5) < 0.01);
    CHECK((perturb(s, x0, 1.0, eps) - eps).cwiseAbs().maxCoeff() < 0.01);
    CHECK_THROWS_AS(perturb(s, x0, 1.01, eps), std::invalid_argument);
    CHECK_THROWS_AS(perturb(s, x0, -0.1, eps), std::invalid_argument);

    stoch::Rng r(1);
    const int n = 100000;
    Eigen::MatrixXd e(1, n);
    for (int j = 0; j < n; ++j) e(0, j) = r.normal();
    const Eigen::MatrixXd y = perturb(s, Eigen::MatrixXd::Constant(1, n, 0.8), 0.3, e);
    const double m = y.mean();
    const double var = (y.array() - m).square().sum() / (n - 1);
    const double target = s.sigma(0.3) * s.sigma(0.3);
    CHECK(std::abs(var - target) < 3 * target * std::sqrt(2.0 / n));
}

TEST_CASE("dsm loss with a zero network is about d") {
    stoch::Rng r(2);
    nn::ResidualNetParams zero(tiny_arch(3));
    TeacherModel m(ForwardSchedule{}, zero, 300);
    Eigen::MatrixXd x0 = Eigen::MatrixXd::Random(3, 4000);
    auto res = dsm_loss(m, x0, r);
    // chi-square with 3 dof: mean 3, variance 6
    CHECK(std::abs(res.loss - 3.0) < 3 * std::sqrt(6.0 / 4000));
    CHECK_THROWS_AS(dsm_loss(m, Eigen::MatrixXd(3, 0), r), std::invalid_argument);
}

TEST_CASE("dsm gradient matches central differences") {
    stoch::Rng init(3);
    nn::NetArch a = tiny_arch(2);
    a.hidden = 5;
    a.time_embed_dim = 4;
    TeacherModel m(ForwardSchedule{}, nn::init_params(a, init), 20);
    Eigen::MatrixXd x0 = Eigen::MatrixXd::Random(2, 6);
    auto loss_at = [&] {
        stoch::Rng r(4);
        return dsm_loss(m, x0, r);
    };
    const auto g = loss_at().grads;
    double worst = 0;
    for (std::size_t i = 0; i < m.net().size(); ++i) {
        const double keep = m.net().values()[i];
        m.net().values()[i] = keep + 1e-5;
        const double fp = loss_at().loss;
        m.net().values()[i] = keep - 1e-5;
        const double fm = loss_at().loss;
        m.net().values()[i] = keep;
        const double fd = (fp - fm) / 2e-5, an = g.params.values()[i];
        worst = std::max(worst, std::abs(fd - an) / std::max(1e-6, std::abs(fd) + std::abs(an)));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("backward step with zero score and zero noise reverses the drift") {
    nn::ResidualNetParams zero(tiny_arch(1));
    TeacherModel m(ForwardSchedule{}, zero, 300);
    Eigen::MatrixXd y = Eigen::MatrixXd::Constant(1, 2, 0.9);
    const double t = 150.0 / 300, h = 1.0 / 300;
    const Eigen::MatrixXd out = backward_step(m, y, 150, Eigen::MatrixXd::Zero(1, 2));
    CHECK(out(0, 0) == doctest::Approx(0.9 * (1 + 0.5 * m.schedule().beta(t) * h)).epsilon(1e-14));
    const Eigen::MatrixXd same = backward_step(m, y, t, t - h, Eigen::MatrixXd::Zero(1, 2));
    CHECK(same == out);
    CHECK_THROWS_AS(backward_step(m, y, 0.2, 0.3, Eigen::MatrixXd::Zero(1, 2)), std::invalid_argument);
    CHECK_THROWS_AS(backward_step(m, y, std::size_t{0}, Eigen::MatrixXd::Zero(1, 2)), std::invalid_argument);
}

TEST_CASE("exact-score reversal recovers unit variance") {
    auto m = gaussian_teacher(300);
    stoch::Rng r(5);
    const Eigen::MatrixXd y = sample_teacher(m, 10000, r);
    const double mean = y.mean();
    const double var = (y.array() - mean).square().sum() / (y.size() - 1);
    CHECK(std::abs(var - 1.0) < 0.05);
    CHECK(std::abs(mean) < 0.05);
}

TEST_CASE("recorded paths replay bitwise and are seed-deterministic") {
    auto m = gaussian_teacher(40);
    stoch::Rng a(6), b(6);
    auto rec = sample_backward_recorded(m, 7, a);
    auto again = sample_backward_recorded(m, 7, b);
    CHECK(rec.nfe == 40 * 7);
    for (std::size_t k = 40; k >= 1; --k) {
        CHECK(backward_step(m, rec.states[k], k, rec.increments[k - 1]) == rec.states[k - 1]);
        CHECK(again.states[k - 1] == rec.states[k - 1]);
    }
}

TEST_CASE("bank blocks fold the recorded increments") {
    auto m = gaussian_teacher(60);
    stoch::Rng r(7);
    auto bank = sample_backward_bank(m, 5, 12, r, 8);
    stoch::Rng same = r.fork(stoch::stream_id("teacher.bank", r.stream(), 0));
    auto rec = sample_backward_recorded(m, 5, same);
    REQUIRE(bank.states.size() == 6);
    REQUIRE(bank.ps_blocks.size() == 5);
    CHECK(bank.nfe == 300);
    const double h = m.fine_grid().step();
    for (std::size_t blk = 0; blk < 5; ++blk) {
        CHECK(bank.states[blk] == rec.states[blk * 12]);
        for (Eigen::Index p = 0; p < 5; ++p) {
            stoch::BrownianIncrements inc{stoch::make_uniform_grid(0, 1, 60), Eigen::MatrixXd(60, 1)};
            for (std::size_t k = 0; k < 60; ++k) inc.increments(static_cast<Eigen::Index>(k), 0) = rec.increments[k](0, p);
            auto ref = stoch::ps_from_increments(inc, blk * 12, (blk + 1) * 12);
            CHECK(std::abs(bank.ps_blocks[blk].dt - 12 * h) < 1e-14);
            CHECK(std::abs(bank.ps_blocks[blk].dw(0, p) - ref.dw(0)) < 1e-12);
            CHECK(std::abs(bank.ps_blocks[blk].s21(0, p) - ref.s21(0)) < 1e-12);
        }
    }
    CHECK(bank.states[5] == rec.states[60]);
    CHECK_THROWS_AS(sample_backward_bank(m, 5, 7, r), std::invalid_argument);
}

TEST_CASE("teacher training reduces the loss") {
    stoch::Rng init(8);
    TeacherModel m(ForwardSchedule{}, nn::init_params(tiny_arch(1), init), 300);
    stoch::Rng dr(9);
    Eigen::MatrixXd data(1, 2000);
    for (int j = 0; j < 2000; ++j) data(0, j) = (dr.uniform() < 0.5 ? -2.0 : 2.0) + 0.5 * dr.normal();
    TeacherTrainConfig cfg;
    cfg.steps = 300;
    cfg.batch_size = 128;
    cfg.lr = 3e-3;
    cfg.ema_decay = 0.0;
    cfg.log_every = 25;
    auto curve = train_teacher(m, data, cfg, stoch::Rng(10));
    REQUIRE(curve.loss.size() == 12);
    CHECK(curve.loss.back() < curve.loss.front());

    TeacherModel broken(ForwardSchedule{}, nn::init_params(tiny_arch(1), init), 300);
    broken.net().values()[0] = std::nan("");
    CHECK_THROWS_AS(train_teacher(broken, data, cfg, stoch::Rng(10)), TrainingError);
}
