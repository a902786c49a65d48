#include "sigdeg/nn/residual_net.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sigdeg::nn {

namespace {

constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

void check_arch(const NetArch& a) {
    if (a.d_in < 1 || a.d_out < 1 || a.hidden < 1 || a.n_blocks < 0)
        throw std::invalid_argument("NetArch: dimensions must be positive");
    if (a.time_embed_dim < 2 || a.time_embed_dim % 2 != 0)
        throw std::invalid_argument("NetArch: time_embed_dim must be even and >= 2");
}

Eigen::MatrixXd activate(const Eigen::MatrixXd& pre, Activation act) {
    if (act == Activation::identity) return pre;
    return (pre.array() / (1.0 + (-pre.array()).exp())).matrix();
}

// grad_out * act'(pre)
Eigen::MatrixXd activate_backward(const Eigen::MatrixXd& pre, const Eigen::MatrixXd& grad_out, Activation act) {
    if (act == Activation::identity) return grad_out;
    const Eigen::ArrayXXd s = 1.0 / (1.0 + (-pre.array()).exp());
    return (grad_out.array() * s * (1.0 + pre.array() * (1.0 - s))).matrix();
}

Eigen::MatrixXd affine(const ResidualNetParams& p, std::size_t layer, const Eigen::MatrixXd& in) {
    Eigen::MatrixXd out = p.weight(layer) * in;
    out.colwise() += p.bias(layer);
    return out;
}

void accumulate_layer_grad(GradientBundle& g, std::size_t layer, const Eigen::MatrixXd& grad_pre,
                           const Eigen::MatrixXd& in) {
    g.params.weight(layer).noalias() += grad_pre * in.transpose();
    g.params.bias(layer) += grad_pre.rowwise().sum();
}

Eigen::MatrixXd embed_batch(const NetArch& arch, std::span<const int> t_index) {
    Eigen::MatrixXd emb(arch.time_embed_dim, static_cast<Eigen::Index>(t_index.size()));
    for (std::size_t j = 0; j < t_index.size(); ++j)
        emb.col(static_cast<Eigen::Index>(j)) = sinusoidal_embed(t_index[j], arch.time_embed_dim, arch.freq_base);
    return emb;
}

void check_input(const ResidualNetParams& p, const Eigen::MatrixXd& x, std::size_t n_times) {
    if (x.rows() != p.arch().d_in) throw std::invalid_argument("net: input dimension mismatch");
    if (n_times != static_cast<std::size_t>(x.cols()))
        throw std::invalid_argument("net: one time index per input column required");
}

}  // namespace

std::size_t parameter_count(const NetArch& a) {
    check_arch(a);
    const auto h = static_cast<std::size_t>(a.hidden);
    auto layer = [](std::size_t in, std::size_t out) { return in * out + out; };
    return layer(static_cast<std::size_t>(a.time_embed_dim), h) + layer(h, h) +
           layer(static_cast<std::size_t>(a.d_in), h) + 2 * static_cast<std::size_t>(a.n_blocks) * layer(h, h) +
           layer(h, h) + layer(h, static_cast<std::size_t>(a.d_out));
}

ResidualNetParams::ResidualNetParams(const NetArch& arch) : arch_(arch) {
    check_arch(arch);
    const Eigen::Index h = arch.hidden;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes{{h, arch.time_embed_dim}, {h, h}, {h, arch.d_in}};
    for (int b = 0; b < arch.n_blocks; ++b) {
        shapes.emplace_back(h, h);
        shapes.emplace_back(h, h);
    }
    shapes.emplace_back(h, h);
    shapes.emplace_back(arch.d_out, h);
    std::size_t offset = 0;
    for (const auto& [rows, cols] : shapes) {
        slots_.push_back({offset, rows, cols});
        offset += static_cast<std::size_t>(rows * cols + rows);
    }
    values_.assign(offset, 0.0);
}

ResidualNetParams::MatMap ResidualNetParams::weight(std::size_t layer) {
    const Slot& s = slots_.at(layer);
    return MatMap(values_.data() + s.offset, s.rows, s.cols);
}
ResidualNetParams::ConstMatMap ResidualNetParams::weight(std::size_t layer) const {
    const Slot& s = slots_.at(layer);
    return ConstMatMap(values_.data() + s.offset, s.rows, s.cols);
}
ResidualNetParams::VecMap ResidualNetParams::bias(std::size_t layer) {
    const Slot& s = slots_.at(layer);
    return VecMap(values_.data() + s.offset + static_cast<std::size_t>(s.rows * s.cols), s.rows);
}
ResidualNetParams::ConstVecMap ResidualNetParams::bias(std::size_t layer) const {
    const Slot& s = slots_.at(layer);
    return ConstVecMap(values_.data() + s.offset + static_cast<std::size_t>(s.rows * s.cols), s.rows);
}

void ResidualNetParams::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

Eigen::VectorXd sinusoidal_embed(int t_index, int dim, double base) {
    if (dim < 2 || dim % 2 != 0) throw std::invalid_argument("sinusoidal_embed: dim must be even");
    Eigen::VectorXd e(dim);
    const double t = static_cast<double>(t_index);
    for (int k = 0; k < dim / 2; ++k) {
        const double freq = std::pow(base, -2.0 * k / dim);
        e[2 * k] = std::sin(t * freq);
        e[2 * k + 1] = std::cos(t * freq);
    }
    return e;
}

ResidualNetParams init_params(const NetArch& arch, stoch::Rng& rng) {
    ResidualNetParams p(arch);
    for (std::size_t l = 0; l < p.n_layers(); ++l) {
        auto w = p.weight(l);
        const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols()));
        for (Eigen::Index j = 0; j < w.cols(); ++j)
            for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = bound * (2.0 * rng.uniform() - 1.0);
    }
    return p;
}

ForwardTape forward_record(const ResidualNetParams& p, const Eigen::MatrixXd& x, std::span<const int> t_index) {
    check_input(p, x, t_index.size());
    const NetArch& a = p.arch();
    ForwardTape tape;
    tape.x = x;
    tape.emb = embed_batch(a, t_index);
    tape.time_pre = affine(p, ResidualNetParams::kTimeIn, tape.emb);
    tape.time_act = activate(tape.time_pre, a.activation);

    tape.h.push_back(affine(p, ResidualNetParams::kEncoder, x));
    for (int b = 0; b < a.n_blocks; ++b) {
        const auto ub = static_cast<std::size_t>(b);
        tape.fc1_pre.push_back(affine(p, ResidualNetParams::block_fc1(ub), tape.h.back()));
        tape.fc1_act.push_back(activate(tape.fc1_pre.back(), a.activation));
        tape.fc2_pre.push_back(affine(p, ResidualNetParams::block_fc2(ub), tape.fc1_act.back()));
        tape.fc2_act.push_back(activate(tape.fc2_pre.back(), a.activation));
        tape.h.push_back((tape.h.back() + tape.fc2_act.back()) / std::numbers::sqrt2);
    }
    tape.sum = tape.h.back() + affine(p, ResidualNetParams::kTimeOut, tape.time_act);
    tape.head_pre = affine(p, p.head_in(), tape.sum);
    tape.head_act = activate(tape.head_pre, a.activation);
    tape.out = affine(p, p.head_out(), tape.head_act);
    return tape;
}

Eigen::MatrixXd forward_batch(const ResidualNetParams& p, const Eigen::MatrixXd& x, std::span<const int> t_index) {
    return forward_record(p, x, t_index).out;
}

Eigen::MatrixXd forward_batch(const ResidualNetParams& p, const Eigen::MatrixXd& x, int t_index) {
    if (x.rows() != p.arch().d_in) throw std::invalid_argument("net: input dimension mismatch");
    const NetArch& a = p.arch();
    const Eigen::VectorXd emb = sinusoidal_embed(t_index, a.time_embed_dim, a.freq_base);
    Eigen::VectorXd t_pre = p.weight(ResidualNetParams::kTimeIn) * emb + p.bias(ResidualNetParams::kTimeIn);
    const Eigen::VectorXd t_feat = p.weight(ResidualNetParams::kTimeOut) * activate(t_pre, a.activation) +
                                   p.bias(ResidualNetParams::kTimeOut);

    Eigen::MatrixXd h = affine(p, ResidualNetParams::kEncoder, x);
    for (int b = 0; b < a.n_blocks; ++b) {
        const auto ub = static_cast<std::size_t>(b);
        const Eigen::MatrixXd inner =
            activate(affine(p, ResidualNetParams::block_fc1(ub), h), a.activation);
        h = (h + activate(affine(p, ResidualNetParams::block_fc2(ub), inner), a.activation)) / std::numbers::sqrt2;
    }
    h.colwise() += t_feat;
    return affine(p, p.head_out(), activate(affine(p, p.head_in(), h), a.activation));
}

GradientBundle backward_batch(const ResidualNetParams& p, const ForwardTape& tape, const Eigen::MatrixXd& upstream,
                              bool want_input_grad) {
    const NetArch& a = p.arch();
    if (upstream.rows() != a.d_out || upstream.cols() != tape.out.cols())
        throw std::invalid_argument("net backward: upstream shape mismatch");
    GradientBundle g{ResidualNetParams(a), Eigen::MatrixXd()};

    accumulate_layer_grad(g, p.head_out(), upstream, tape.head_act);
    const Eigen::MatrixXd d_head = activate_backward(tape.head_pre, p.weight(p.head_out()).transpose() * upstream,
                                                     a.activation);
    accumulate_layer_grad(g, p.head_in(), d_head, tape.sum);
    const Eigen::MatrixXd d_sum = p.weight(p.head_in()).transpose() * d_head;

    // time branch
    accumulate_layer_grad(g, ResidualNetParams::kTimeOut, d_sum, tape.time_act);
    const Eigen::MatrixXd d_time =
        activate_backward(tape.time_pre, p.weight(ResidualNetParams::kTimeOut).transpose() * d_sum, a.activation);
    accumulate_layer_grad(g, ResidualNetParams::kTimeIn, d_time, tape.emb);

    // residual encoder
    Eigen::MatrixXd d_h = d_sum;
    for (int b = a.n_blocks - 1; b >= 0; --b) {
        const auto ub = static_cast<std::size_t>(b);
        d_h *= kInvSqrt2;
        const Eigen::MatrixXd d_fc2 = activate_backward(tape.fc2_pre[ub], d_h, a.activation);
        accumulate_layer_grad(g, ResidualNetParams::block_fc2(ub), d_fc2, tape.fc1_act[ub]);
        const Eigen::MatrixXd d_fc1 = activate_backward(
            tape.fc1_pre[ub], p.weight(ResidualNetParams::block_fc2(ub)).transpose() * d_fc2, a.activation);
        accumulate_layer_grad(g, ResidualNetParams::block_fc1(ub), d_fc1, tape.h[ub]);
        d_h.noalias() += p.weight(ResidualNetParams::block_fc1(ub)).transpose() * d_fc1;
    }
    accumulate_layer_grad(g, ResidualNetParams::kEncoder, d_h, tape.x);
    if (want_input_grad) g.input = p.weight(ResidualNetParams::kEncoder).transpose() * d_h;
    return g;
}

Eigen::VectorXd net_forward(const ResidualNetParams& params, const Eigen::VectorXd& x, int t_index) {
    return forward_batch(params, Eigen::MatrixXd(x), t_index).col(0);
}

GradientBundle net_backward(const ResidualNetParams& params, const Eigen::VectorXd& x, int t_index,
                            const Eigen::VectorXd& upstream, bool want_input_grad) {
    const int t[1] = {t_index};
    const ForwardTape tape = forward_record(params, Eigen::MatrixXd(x), t);
    return backward_batch(params, tape, Eigen::MatrixXd(upstream), want_input_grad);
}

}  // namespace sigdeg::nn
