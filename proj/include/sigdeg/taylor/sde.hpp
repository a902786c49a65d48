#pragma once

#include <functional>

#include <Eigen/Core>

#include "sigdeg/stoch/partial_signature.hpp"

namespace sigdeg::taylor {

using VecRef = Eigen::Ref<Eigen::VectorXd>;
using ConstVecRef = Eigen::Ref<const Eigen::VectorXd>;

/// dY = mu(t, Y) dt + sigma(t) o dW with a scalar, time-only volatility.
/// For time-only sigma the Ito and Stratonovich forms coincide.
struct SdeSpec {
    int dim = 1;
    std::function<void(double t, ConstVecRef y, VecRef out)> drift;
    std::function<double(double t)> sigma;
    std::function<double(double t)> dsigma_dt;
    /// d x d Jacobian of the drift in y.
    std::function<void(double t, ConstVecRef y, Eigen::Ref<Eigen::MatrixXd> out)> drift_jacobian;
};

/// dY = a Y dt + sigma0 e^{b t} dW in one dimension.
SdeSpec make_linear_test_sde(double a, double sigma0, double b);

/// Stochastic Taylor increment
/// F = mu s1 + sigma s2 + sigma' (s1 s2 - s21) + (d_y mu) sigma s21.
Eigen::VectorXd f_local(double s, ConstVecRef y, const stoch::PartialSignature& ps, const SdeSpec& sde);

}  // namespace sigdeg::taylor
