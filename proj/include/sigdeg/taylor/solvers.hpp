#pragma once

#include <span>

#include <Eigen/Core>

#include "sigdeg/stoch/partial_signature.hpp"
#include "sigdeg/stoch/time_grid.hpp"
#include "sigdeg/taylor/sde.hpp"

namespace sigdeg::taylor {

struct Trajectory {
    stoch::TimeGrid grid;
    Eigen::MatrixXd states;  // (n_steps + 1) x d, row 0 is the initial condition

    Eigen::VectorXd terminal() const { return states.row(states.rows() - 1).transpose(); }
};

/// Y_{i+1} = Y_i + F(t_i, Y_i, PS_{t_i, t_{i+1}}); one block per coarse interval.
Trajectory solve_high_order(const SdeSpec& sde, const Eigen::VectorXd& y0, const stoch::TimeGrid& coarse,
                            std::span<const stoch::PartialSignature> ps_blocks);

/// Euler-Maruyama: Y_{i+1} = Y_i + mu(t_i, Y_i) h + sigma(t_i) dW_i.
Trajectory solve_euler(const SdeSpec& sde, const Eigen::VectorXd& y0, const stoch::BrownianIncrements& incs);

}  // namespace sigdeg::taylor
