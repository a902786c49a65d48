#pragma once

#include <cstdint>
#include <vector>

#include "sigdeg/nn/residual_net.hpp"

namespace sigdeg::nn {

struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t step = 0;
    std::vector<double> m;
    std::vector<double> v;

    static AdamState for_params(const ResidualNetParams& params, double lr);
};

/// One bias-corrected Adam update of params in place.
void adam_step(AdamState& state, ResidualNetParams& params, const GradientBundle& grads);

}  // namespace sigdeg::nn
