#pragma once

#include <cstddef>
#include <stdexcept>

namespace sigdeg::stoch {

/// Uniform partition of [t_start, t_end] into n_steps intervals.
class TimeGrid {
public:
    TimeGrid(double t_start, double t_end, std::size_t n_steps)
        : t_start_(t_start), t_end_(t_end), n_steps_(n_steps) {
        if (n_steps == 0) throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
        if (!(t_end > t_start)) throw std::invalid_argument("TimeGrid: requires t_end > t_start");
    }

    double t_start() const { return t_start_; }
    double t_end() const { return t_end_; }
    std::size_t n_steps() const { return n_steps_; }
    std::size_t n_nodes() const { return n_steps_ + 1; }
    double step() const { return (t_end_ - t_start_) / static_cast<double>(n_steps_); }

    /// Node i; the last node is exactly t_end.
    double node(std::size_t i) const {
        if (i > n_steps_) throw std::invalid_argument("TimeGrid: node index out of range");
        if (i == n_steps_) return t_end_;
        return t_start_ + static_cast<double>(i) * (t_end_ - t_start_) / static_cast<double>(n_steps_);
    }

    bool operator==(const TimeGrid&) const = default;

private:
    double t_start_;
    double t_end_;
    std::size_t n_steps_;
};

inline TimeGrid make_uniform_grid(double t_start, double t_end, std::size_t n_steps) {
    return TimeGrid(t_start, t_end, n_steps);
}

}  // namespace sigdeg::stoch
