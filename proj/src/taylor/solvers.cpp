#include "sigdeg/taylor/solvers.hpp"

#include <cmath>
#include <stdexcept>

namespace sigdeg::taylor {

SdeSpec make_linear_test_sde(double a, double sigma0, double b) {
    SdeSpec sde;
    sde.dim = 1;
    sde.drift = [a](double, ConstVecRef y, VecRef out) { out = a * y; };
    sde.sigma = [sigma0, b](double t) { return sigma0 * std::exp(b * t); };
    sde.dsigma_dt = [sigma0, b](double t) { return b * sigma0 * std::exp(b * t); };
    sde.drift_jacobian = [a](double, ConstVecRef, Eigen::Ref<Eigen::MatrixXd> out) {
        out.setZero();
        out.diagonal().setConstant(a);
    };
    return sde;
}

namespace {

void check_dim(const SdeSpec& sde, Eigen::Index n, const char* who) {
    if (n != sde.dim) throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

// out = F(s, y, ps); jac is scratch.
void f_local_into(double s, ConstVecRef y, const stoch::PartialSignature& ps, const SdeSpec& sde,
                  VecRef out, Eigen::Ref<Eigen::MatrixXd> jac) {
    sde.drift(s, y, out);
    out *= ps.dt;
    const double sig = sde.sigma(s);
    out += sig * ps.dw;
    out += sde.dsigma_dt(s) * (ps.dt * ps.dw - ps.s21);
    sde.drift_jacobian(s, y, jac);
    out.noalias() += sig * (jac * ps.s21);
}

}  // namespace

Eigen::VectorXd f_local(double s, ConstVecRef y, const stoch::PartialSignature& ps, const SdeSpec& sde) {
    check_dim(sde, y.size(), "f_local");
    check_dim(sde, ps.dw.size(), "f_local");
    check_dim(sde, ps.s21.size(), "f_local");
    Eigen::VectorXd out(sde.dim);
    Eigen::MatrixXd jac(sde.dim, sde.dim);
    f_local_into(s, y, ps, sde, out, jac);
    return out;
}

Trajectory solve_high_order(const SdeSpec& sde, const Eigen::VectorXd& y0, const stoch::TimeGrid& coarse,
                            std::span<const stoch::PartialSignature> ps_blocks) {
    check_dim(sde, y0.size(), "solve_high_order");
    if (ps_blocks.size() != coarse.n_steps())
        throw std::invalid_argument("solve_high_order: need one PS block per coarse interval");
    const auto n = static_cast<Eigen::Index>(coarse.n_steps());
    Trajectory out{coarse, Eigen::MatrixXd(n + 1, sde.dim)};
    out.states.row(0) = y0.transpose();
    Eigen::VectorXd y = y0, inc(sde.dim);
    Eigen::MatrixXd jac(sde.dim, sde.dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& ps = ps_blocks[static_cast<std::size_t>(i)];
        check_dim(sde, ps.dw.size(), "solve_high_order");
        f_local_into(coarse.node(static_cast<std::size_t>(i)), y, ps, sde, inc, jac);
        y += inc;
        out.states.row(i + 1) = y.transpose();
    }
    return out;
}

Trajectory solve_euler(const SdeSpec& sde, const Eigen::VectorXd& y0, const stoch::BrownianIncrements& incs) {
    check_dim(sde, y0.size(), "solve_euler");
    check_dim(sde, incs.increments.cols(), "solve_euler");
    const auto n = static_cast<Eigen::Index>(incs.grid.n_steps());
    const double h = incs.grid.step();
    Trajectory out{incs.grid, Eigen::MatrixXd(n + 1, sde.dim)};
    out.states.row(0) = y0.transpose();
    Eigen::VectorXd y = y0, mu(sde.dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = incs.grid.node(static_cast<std::size_t>(i));
        sde.drift(t, y, mu);
        y += h * mu + sde.sigma(t) * incs.increments.row(i).transpose();
        out.states.row(i + 1) = y.transpose();
    }
    return out;
}

}  // namespace sigdeg::taylor
