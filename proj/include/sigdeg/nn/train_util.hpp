#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "sigdeg/nn/residual_net.hpp"

namespace sigdeg::nn {

/// Learning rate for step `step` of `total`: constant, or cosine decay to min_fraction * base.
inline double scheduled_lr(double base, std::size_t step, std::size_t total, bool cosine,
                           double min_fraction = 0.05) {
    if (!cosine || total == 0) return base;
    const double frac = static_cast<double>(step) / static_cast<double>(total);
    return base * (min_fraction + (1.0 - min_fraction) * 0.5 * (1.0 + std::cos(std::numbers::pi * frac)));
}

/// Exponential moving average of parameters; decay 0 tracks the raw parameters.
class ParamEma {
public:
    ParamEma(const ResidualNetParams& init, double decay) : avg_(init), decay_(decay) {}

    void update(const ResidualNetParams& current) {
        auto a = avg_.values();
        const auto c = current.values();
        const double keep = decay_;
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = keep * a[i] + (1.0 - keep) * c[i];
    }
    const ResidualNetParams& params() const { return avg_; }

private:
    ResidualNetParams avg_;
    double decay_;
};

}  // namespace sigdeg::nn
