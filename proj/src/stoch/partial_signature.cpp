#include "sigdeg/stoch/partial_signature.hpp"

#include <cmath>
#include <stdexcept>

namespace sigdeg::stoch {

Eigen::MatrixXd BrownianIncrements::path() const {
    Eigen::MatrixXd w(increments.rows() + 1, increments.cols());
    w.row(0).setZero();
    for (Eigen::Index i = 0; i < increments.rows(); ++i) w.row(i + 1) = w.row(i) + increments.row(i);
    return w;
}

BrownianIncrements sample_brownian(const TimeGrid& grid, std::size_t d, Rng& rng) {
    if (d == 0) throw std::invalid_argument("sample_brownian: d must be >= 1");
    const double scale = std::sqrt(grid.step());
    Eigen::MatrixXd incs(static_cast<Eigen::Index>(grid.n_steps()), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < incs.rows(); ++i)
        for (Eigen::Index k = 0; k < incs.cols(); ++k) incs(i, k) = scale * rng.normal();
    return {grid, std::move(incs)};
}

PartialSignature ps_chain(const PartialSignature& left, const PartialSignature& right) {
    if (left.dw.size() != right.dw.size())
        throw std::invalid_argument("ps_chain: dimension mismatch");
    PartialSignature out;
    out.dt = left.dt + right.dt;
    out.dw = left.dw + right.dw;
    out.s21 = left.s21 + right.s21 + right.dt * left.dw;
    return out;
}

PartialSignature ps_from_increments(const BrownianIncrements& incs, std::size_t from_index,
                                    std::size_t to_index) {
    if (!(from_index < to_index) || to_index > incs.grid.n_steps())
        throw std::invalid_argument("ps_from_increments: need 0 <= from < to <= n_steps");
    const double h = incs.grid.step();
    PartialSignature acc = PartialSignature::zero(incs.dim());
    for (std::size_t i = from_index; i < to_index; ++i) {
        const Eigen::VectorXd delta = incs.increments.row(static_cast<Eigen::Index>(i)).transpose();
        acc = ps_chain(acc, PartialSignature::linear_step(h, delta));
    }
    return acc;
}

PartialSignature sample_ps_exact(double dt, std::size_t d, Rng& rng) {
    if (!(dt > 0.0)) throw std::invalid_argument("sample_ps_exact: dt must be > 0");
    const double sd_w = std::sqrt(dt);
    const double sd_cond = std::sqrt(dt * dt * dt / 12.0);
    PartialSignature ps = PartialSignature::zero(d);
    ps.dt = dt;
    for (std::size_t k = 0; k < d; ++k) {
        const double w = sd_w * rng.normal();
        ps.dw[static_cast<Eigen::Index>(k)] = w;
        ps.s21[static_cast<Eigen::Index>(k)] = 0.5 * dt * w + sd_cond * rng.normal();
    }
    return ps;
}

PsBatch ps_chain(const PsBatch& left, const PsBatch& right) {
    if (left.dw.rows() != right.dw.rows() || left.dw.cols() != right.dw.cols())
        throw std::invalid_argument("ps_chain: batch shape mismatch");
    PsBatch out;
    out.dt = left.dt + right.dt;
    out.dw = left.dw + right.dw;
    out.s21 = left.s21 + right.s21 + right.dt * left.dw;
    return out;
}

void ps_prepend_step(PsBatch& acc, double h, const Eigen::Ref<const Eigen::MatrixXd>& delta) {
    // chain(step, acc): the cross term is delta * acc.dt
    acc.s21 += (0.5 * h + acc.dt) * delta;
    acc.dw += delta;
    acc.dt += h;
}

PsBatch sample_ps_exact_batch(double dt, Eigen::Index d, Eigen::Index n, Rng& rng) {
    if (!(dt > 0.0)) throw std::invalid_argument("sample_ps_exact: dt must be > 0");
    const double sd_w = std::sqrt(dt);
    const double sd_cond = std::sqrt(dt * dt * dt / 12.0);
    PsBatch ps = PsBatch::zero(d, n);
    ps.dt = dt;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < d; ++k) {
            const double w = sd_w * rng.normal();
            ps.dw(k, j) = w;
            ps.s21(k, j) = 0.5 * dt * w + sd_cond * rng.normal();
        }
    return ps;
}

}  // namespace sigdeg::stoch
