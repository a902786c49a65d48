#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "sigdeg/stoch/rng.hpp"
#include "sigdeg/stoch/time_grid.hpp"

namespace sigdeg::stoch {

/// Brownian increments on a grid: row i is W(t_{i+1}) - W(t_i), one column per dimension.
struct BrownianIncrements {
    TimeGrid grid;
    Eigen::MatrixXd increments;  // n_steps x d

    std::size_t dim() const { return static_cast<std::size_t>(increments.cols()); }
    /// Path values W(t_0..t_n) with W(t_0) = 0, shape (n_steps + 1) x d.
    Eigen::MatrixXd path() const;
};

BrownianIncrements sample_brownian(const TimeGrid& grid, std::size_t d, Rng& rng);

/// PS(W)_{s,t} = (t - s, W_t - W_s, int_s^t (W_u - W_s) du).
struct PartialSignature {
    double dt = 0.0;
    Eigen::VectorXd dw;
    Eigen::VectorXd s21;

    static PartialSignature zero(std::size_t d) {
        return {0.0, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)),
                Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d))};
    }
    /// Signature of a straight segment of width h and increment delta.
    static PartialSignature linear_step(double h, const Eigen::Ref<const Eigen::VectorXd>& delta) {
        return {h, delta, 0.5 * h * delta};
    }
    std::size_t dim() const { return static_cast<std::size_t>(dw.size()); }
};

/// Concatenation of adjacent intervals [s,u] and [u,t]:
/// PS_{s,t} = PS_{s,u} + PS_{u,t} + (0, 0, W_{s,u} (t - u)).
PartialSignature ps_chain(const PartialSignature& left, const PartialSignature& right);

/// PS over fine steps [from_index, to_index) of the piecewise-linear path.
PartialSignature ps_from_increments(const BrownianIncrements& incs, std::size_t from_index,
                                    std::size_t to_index);

/// Exact draw of PS over an interval of length dt: per coordinate
/// dw ~ N(0, dt), s21 | dw ~ N(dt dw / 2, dt^3 / 12).
PartialSignature sample_ps_exact(double dt, std::size_t d, Rng& rng);

/// Partial signatures of many paths over the same interval, one column per path.
struct PsBatch {
    double dt = 0.0;
    Eigen::MatrixXd dw;   // d x n
    Eigen::MatrixXd s21;  // d x n

    static PsBatch zero(Eigen::Index d, Eigen::Index n) {
        return {0.0, Eigen::MatrixXd::Zero(d, n), Eigen::MatrixXd::Zero(d, n)};
    }
    Eigen::Index dim() const { return dw.rows(); }
    Eigen::Index size() const { return dw.cols(); }
    PartialSignature column(Eigen::Index j) const { return {dt, dw.col(j), s21.col(j)}; }
};

PsBatch ps_chain(const PsBatch& left, const PsBatch& right);
/// Prepends one straight fine step of width h with increments delta (d x n) to acc.
void ps_prepend_step(PsBatch& acc, double h, const Eigen::Ref<const Eigen::MatrixXd>& delta);
PsBatch sample_ps_exact_batch(double dt, Eigen::Index d, Eigen::Index n, Rng& rng);

}  // namespace sigdeg::stoch
