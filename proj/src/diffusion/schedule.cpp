#include "sigdeg/diffusion/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace sigdeg::diffusion {

double ForwardSchedule::mu(double t) const {
    return std::exp(-0.25 * t * t * (beta_max - beta_min) - 0.5 * t * beta_min);
}

double ForwardSchedule::sigma(double t) const {
    // 1 - mu^2 = -expm1(2 log mu), accurate near t = 0
    const double log_mu = -0.25 * t * t * (beta_max - beta_min) - 0.5 * t * beta_min;
    return std::sqrt(-std::expm1(2.0 * log_mu));
}

double ForwardSchedule::diffusion(double t) const { return std::sqrt(beta(t)); }

Eigen::MatrixXd perturb(const ForwardSchedule& schedule, const Eigen::MatrixXd& x0, double t,
                        const Eigen::MatrixXd& eps) {
    if (t < 0.0 || t > schedule.horizon) throw std::invalid_argument("perturb: t outside [0, T]");
    if (x0.rows() != eps.rows() || x0.cols() != eps.cols()) throw std::invalid_argument("perturb: shape mismatch");
    return schedule.mu(t) * x0 + schedule.sigma(t) * eps;
}

}  // namespace sigdeg::diffusion
