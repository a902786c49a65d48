#include "sigdeg/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace sigdeg::nn {

AdamState AdamState::for_params(const ResidualNetParams& params, double lr) {
    AdamState s;
    s.lr = lr;
    s.m.assign(params.size(), 0.0);
    s.v.assign(params.size(), 0.0);
    return s;
}

void adam_step(AdamState& state, ResidualNetParams& params, const GradientBundle& grads) {
    const std::size_t n = params.size();
    if (grads.params.size() != n || state.m.size() != n || state.v.size() != n)
        throw std::invalid_argument("adam_step: shape mismatch");
    ++state.step;
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    auto theta = params.values();
    const auto g = grads.params.values();
    for (std::size_t i = 0; i < n; ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g[i] * g[i];
        const double m_hat = state.m[i] / c1;
        const double v_hat = state.v[i] / c2;
        theta[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
}

}  // namespace sigdeg::nn
