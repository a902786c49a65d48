#pragma once

#include <Eigen/Core>

namespace sigdeg::diffusion {

/// Variance-preserving forward process dX = -1/2 beta(t) X dt + sqrt(beta(t)) dW
/// with linear beta(t) = beta_min + t (beta_max - beta_min).
/// Marginal: X_t | X_0 ~ N(mu(t) X_0, sigma(t)^2 I), mu^2 + sigma^2 = 1.
struct ForwardSchedule {
    double beta_min = 0.1;
    double beta_max = 20.0;
    double horizon = 1.0;

    double beta(double t) const { return beta_min + t * (beta_max - beta_min); }
    /// Mean scale exp(-t^2 (beta_max - beta_min) / 4 - t beta_min / 2).
    double mu(double t) const;
    /// Marginal noise scale sqrt(1 - mu^2).
    double sigma(double t) const;
    /// Forward drift coefficient: f(x, t) = drift_coef(t) x.
    double drift_coef(double t) const { return -0.5 * beta(t); }
    /// Forward diffusion coefficient sqrt(beta(t)); time-only.
    double diffusion(double t) const;

    bool operator==(const ForwardSchedule&) const = default;
};

/// mu(t) x0 + sigma(t) eps.
Eigen::MatrixXd perturb(const ForwardSchedule& schedule, const Eigen::MatrixXd& x0, double t,
                        const Eigen::MatrixXd& eps);

}  // namespace sigdeg::diffusion
