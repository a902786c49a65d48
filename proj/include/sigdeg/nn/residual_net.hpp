#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sigdeg/stoch/rng.hpp"

namespace sigdeg::nn {

enum class Activation { silu, identity };

/// Shape of the time-conditioned residual MLP:
///   t_feat = Linear(hidden) . act . Linear(time_embed_dim -> hidden) (sinusoid(t))
///   x_feat = n_blocks residual blocks over Linear(d_in -> hidden)(x)
///   y      = Linear(hidden -> d_out) . act . Linear(hidden) (x_feat + t_feat)
/// Each block maps h to (h + act(Linear(act(Linear(h))))) / sqrt(2).
struct NetArch {
    int d_in = 1;
    int d_out = 1;
    int hidden = 256;
    int time_embed_dim = 128;
    int n_blocks = 3;
    double freq_base = 10000.0;
    Activation activation = Activation::silu;

    bool operator==(const NetArch&) const = default;
};

/// Number of scalar parameters for an architecture.
std::size_t parameter_count(const NetArch& arch);

/// All weights and biases in one contiguous buffer.
///
/// Layer order: time_in, time_out, encoder, then fc1/fc2 for each residual
/// block, then head_in, head_out. Each layer stores its weight matrix
/// (out x in, column-major) followed by its bias vector.
class ResidualNetParams {
public:
    using MatMap = Eigen::Map<Eigen::MatrixXd>;
    using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
    using VecMap = Eigen::Map<Eigen::VectorXd>;
    using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

    explicit ResidualNetParams(const NetArch& arch);

    const NetArch& arch() const { return arch_; }
    std::size_t size() const { return values_.size(); }
    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    std::size_t n_layers() const { return slots_.size(); }
    MatMap weight(std::size_t layer);
    ConstMatMap weight(std::size_t layer) const;
    VecMap bias(std::size_t layer);
    ConstVecMap bias(std::size_t layer) const;

    static constexpr std::size_t kTimeIn = 0;
    static constexpr std::size_t kTimeOut = 1;
    static constexpr std::size_t kEncoder = 2;
    static std::size_t block_fc1(std::size_t block) { return 3 + 2 * block; }
    static std::size_t block_fc2(std::size_t block) { return 4 + 2 * block; }
    std::size_t head_in() const { return 3 + 2 * static_cast<std::size_t>(arch_.n_blocks); }
    std::size_t head_out() const { return head_in() + 1; }

    void set_zero();

private:
    struct Slot {
        std::size_t offset;
        Eigen::Index rows;
        Eigen::Index cols;
    };
    NetArch arch_;
    std::vector<Slot> slots_;
    std::vector<double> values_;
};

/// Gradients mirror the parameter layout; `input` holds d(loss)/dx when requested.
struct GradientBundle {
    ResidualNetParams params;
    Eigen::MatrixXd input;
};

/// Sinusoidal encoding of an integer step: entries (2k, 2k+1) are
/// (sin, cos)(t * base^{-2k/dim}).
Eigen::VectorXd sinusoidal_embed(int t_index, int dim, double base = 10000.0);

/// Weights uniform in +-1/sqrt(fan_in), zero biases.
ResidualNetParams init_params(const NetArch& arch, stoch::Rng& rng);

/// Intermediate activations of a batched forward pass, consumed by backward_batch.
struct ForwardTape {
    Eigen::MatrixXd x;    // d_in x B
    Eigen::MatrixXd emb;  // E x B
    Eigen::MatrixXd time_pre, time_act;
    std::vector<Eigen::MatrixXd> h;  // n_blocks + 1 block inputs/outputs
    std::vector<Eigen::MatrixXd> fc1_pre, fc1_act, fc2_pre, fc2_act;
    Eigen::MatrixXd sum;  // x_feat + t_feat
    Eigen::MatrixXd head_pre, head_act;
    Eigen::MatrixXd out;  // d_out x B
};

/// Batched forward; column j of x is evaluated at time index t_index[j].
Eigen::MatrixXd forward_batch(const ResidualNetParams& params, const Eigen::MatrixXd& x,
                              std::span<const int> t_index);
/// Batched forward with one time index shared by every column.
Eigen::MatrixXd forward_batch(const ResidualNetParams& params, const Eigen::MatrixXd& x, int t_index);

ForwardTape forward_record(const ResidualNetParams& params, const Eigen::MatrixXd& x,
                           std::span<const int> t_index);

/// Gradients of sum_j <upstream_j, out_j> w.r.t. every parameter (and the input if asked).
GradientBundle backward_batch(const ResidualNetParams& params, const ForwardTape& tape,
                              const Eigen::MatrixXd& upstream, bool want_input_grad = false);

Eigen::VectorXd net_forward(const ResidualNetParams& params, const Eigen::VectorXd& x, int t_index);
GradientBundle net_backward(const ResidualNetParams& params, const Eigen::VectorXd& x, int t_index,
                            const Eigen::VectorXd& upstream, bool want_input_grad = false);

}  // namespace sigdeg::nn
