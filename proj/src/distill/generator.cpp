#include "sigdeg/distill/generator.hpp"

#include <cmath>
#include <stdexcept>

#include "sigdeg/errors.hpp"
#include "sigdeg/nn/param_io.hpp"

namespace sigdeg::distill {

SigDegGenerator::SigDegGenerator(nn::ResidualNetParams net, std::size_t n_coarse, double horizon, bool standardize_ps)
    : net_(std::move(net)), grid_(0.0, horizon, n_coarse), dim_(net_.arch().d_out), standardize_ps_(standardize_ps) {
    if (net_.arch().d_in != 3 * net_.arch().d_out)
        throw std::invalid_argument("SigDegGenerator: network must map 3d inputs to d outputs");
}

nn::NetArch SigDegGenerator::arch_for(int d, nn::NetArch base) {
    if (d < 1) throw std::invalid_argument("SigDegGenerator: d must be >= 1");
    base.d_in = 3 * d;
    base.d_out = d;
    return base;
}

Eigen::MatrixXd SigDegGenerator::features(const Eigen::MatrixXd& z, const stoch::PsBatch& ps) const {
    if (z.rows() != dim_ || ps.dim() != dim_ || ps.size() != z.cols())
        throw std::invalid_argument("SigDegGenerator: state / block shape mismatch");
    const double h = grid_.step();
    if (std::abs(ps.dt - h) > 1e-9 * h) throw std::invalid_argument("SigDegGenerator: block length differs from coarse step");
    const double a = standardize_ps_ ? 1.0 / std::sqrt(h) : 1.0;
    const double b = standardize_ps_ ? 1.0 / std::sqrt(h * h * h / 3.0) : 1.0;
    Eigen::MatrixXd x(3 * dim_, z.cols());
    x.topRows(dim_) = z;
    x.middleRows(dim_, dim_) = a * ps.dw;
    x.bottomRows(dim_) = b * ps.s21;
    return x;
}

Eigen::MatrixXd SigDegGenerator::step(const Eigen::MatrixXd& z, std::size_t i, const stoch::PsBatch& ps) const {
    if (i == 0 || i > n_coarse()) throw std::invalid_argument("SigDegGenerator: coarse index out of range");
    return z + nn::forward_batch(net_, features(z, ps), static_cast<int>(i));
}

std::vector<Eigen::MatrixXd> rollout_q(const SigDegGenerator& gen, const Eigen::MatrixXd& z_start, std::size_t j,
                                       std::span<const stoch::PsBatch> blocks) {
    if (blocks.empty() || blocks.size() > j || j > gen.n_coarse())
        throw std::invalid_argument("rollout_q: need 1 <= q <= j <= N_c blocks");
    std::vector<Eigen::MatrixXd> out;
    out.reserve(blocks.size());
    Eigen::MatrixXd z = z_start;
    for (std::size_t m = 0; m < blocks.size(); ++m) {
        z = gen.step(z, j - m, blocks[m]);
        out.push_back(z);
    }
    return out;
}

PairBatch concat_pairs(std::span<const PairBatch> parts) {
    if (parts.empty()) throw std::invalid_argument("concat_pairs: nothing to concatenate");
    const std::size_t q = parts[0].q();
    const Eigen::Index d = parts[0].start.rows();
    Eigen::Index total = 0;
    for (const auto& p : parts) {
        if (p.q() != q || p.start.rows() != d) throw std::invalid_argument("concat_pairs: inconsistent parts");
        total += static_cast<Eigen::Index>(p.size());
    }
    PairBatch out;
    out.start.resize(d, total);
    out.blocks.assign(q, stoch::PsBatch::zero(d, total));
    out.targets.assign(q, Eigen::MatrixXd(d, total));
    Eigen::Index c = 0;
    for (const auto& p : parts) {
        const auto n = static_cast<Eigen::Index>(p.size());
        out.start.middleCols(c, n) = p.start;
        out.j.insert(out.j.end(), p.j.begin(), p.j.end());
        for (std::size_t m = 0; m < q; ++m) {
            out.blocks[m].dt = p.blocks[m].dt;
            out.blocks[m].dw.middleCols(c, n) = p.blocks[m].dw;
            out.blocks[m].s21.middleCols(c, n) = p.blocks[m].s21;
            out.targets[m].middleCols(c, n) = p.targets[m];
        }
        c += n;
    }
    return out;
}

LossResult local_loss(const SigDegGenerator& gen, const PairBatch& pairs, bool want_grads) {
    const std::size_t q = pairs.q();
    const auto nb = static_cast<Eigen::Index>(pairs.size());
    const Eigen::Index d = gen.dim();
    if (nb == 0 || q == 0) throw std::invalid_argument("local_loss: empty batch");
    if (pairs.targets.size() != q || pairs.start.cols() != nb || pairs.start.rows() != d)
        throw std::invalid_argument("local_loss: malformed pair batch");
    for (int j : pairs.j)
        if (j < static_cast<int>(q) || j > static_cast<int>(gen.n_coarse()))
            throw std::invalid_argument("local_loss: start index outside [q, N_c]");

    const double scale = 1.0 / (static_cast<double>(nb) * static_cast<double>(q) * static_cast<double>(d));
    std::vector<nn::ForwardTape> tapes;
    std::vector<Eigen::MatrixXd> resid;
    tapes.reserve(q);
    Eigen::MatrixXd z = pairs.start;
    std::vector<int> idx(pairs.j);
    double loss = 0.0;
    for (std::size_t m = 0; m < q; ++m) {
        tapes.push_back(nn::forward_record(gen.net(), gen.features(z, pairs.blocks[m]), idx));
        z += tapes.back().out;
        resid.push_back(z - pairs.targets[m]);
        loss += resid.back().squaredNorm();
        for (int& i : idx) --i;
    }
    LossResult res{loss * scale, nn::GradientBundle{nn::ResidualNetParams(gen.net().arch()), {}}};
    if (!want_grads) return res;

    auto total = res.grads.params.values();
    Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(d, nb);
    for (std::size_t m = q; m-- > 0;) {
        dz += 2.0 * scale * resid[m];
        nn::GradientBundle g = nn::backward_batch(gen.net(), tapes[m], dz, m > 0);
        const auto gv = g.params.values();
        for (std::size_t i = 0; i < gv.size(); ++i) total[i] += gv[i];
        if (m > 0) dz += g.input.topRows(d);
    }
    return res;
}

InferenceResult sample_inference(const SigDegGenerator& gen, std::size_t n_samples, stoch::Rng& rng) {
    if (n_samples == 0) throw std::invalid_argument("sample_inference: n_samples must be >= 1");
    const std::size_t nc = gen.n_coarse();
    const Eigen::Index d = gen.dim();
    const auto n = static_cast<Eigen::Index>(n_samples);
    InferenceResult out;
    out.states.resize(nc + 1);
    Eigen::MatrixXd z(d, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < d; ++i) z(i, j) = rng.normal();
    out.states[nc] = z;
    for (std::size_t i = nc; i >= 1; --i) {
        const stoch::PsBatch ps = stoch::sample_ps_exact_batch(gen.coarse_grid().step(), d, n, rng);
        out.states[i - 1] = gen.step(out.states[i], i, ps);
        out.nfe += n_samples;
    }
    return out;
}

nlohmann::json generator_header(const SigDegGenerator& gen) {
    return {{"kind", "sigdeg_generator"},
            {"n_coarse", gen.n_coarse()},
            {"horizon", gen.coarse_grid().t_end()},
            {"standardize_ps", gen.standardize_ps()},
            {"dim", gen.dim()}};
}

void save_generator(const std::filesystem::path& path, const SigDegGenerator& gen, std::uint64_t seed,
                    nlohmann::json extra) {
    if (!extra.is_object()) throw std::invalid_argument("save_generator: extra must be a JSON object");
    extra["generator"] = generator_header(gen);
    nn::save_params(path, gen.net(), seed, extra);
}

SigDegGenerator load_generator(const std::filesystem::path& path) {
    nn::LoadedParams lp = nn::load_params(path);
    if (!lp.extra.contains("generator")) throw IoError("load_generator: " + path.string() + " is not a generator checkpoint");
    const auto& h = lp.extra["generator"];
    return SigDegGenerator(std::move(lp.params), h.at("n_coarse").get<std::size_t>(), h.at("horizon").get<double>(),
                           h.at("standardize_ps").get<bool>());
}

}  // namespace sigdeg::distill
