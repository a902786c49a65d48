#include "sigdeg/distill/training.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sigdeg/errors.hpp"
#include "sigdeg/nn/adam.hpp"
#include "sigdeg/nn/train_util.hpp"

namespace sigdeg::distill {

namespace {

std::size_t uniform_index(stoch::Rng& rng, std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)));
}

struct WeightedLoss {
    double sum = 0.0;
    double weight = 0.0;
};

double evaluate(const SigDegGenerator& gen, const std::vector<PairBatch>& chunks) {
    WeightedLoss acc;
    for (const auto& c : chunks) {
        const double w = static_cast<double>(c.size());
        acc.sum += w * local_loss(gen, c, false).loss;
        acc.weight += w;
    }
    return acc.sum / acc.weight;
}

// Chunks of at most `chunk` pairs, every validation path at every admissible start node.
std::vector<PairBatch> bank_validation(const diffusion::TrajectoryBank& bank, std::size_t first, std::size_t last,
                                       std::size_t n_coarse, std::size_t q, std::size_t chunk = 2048) {
    std::vector<std::size_t> paths, js;
    for (std::size_t p = first; p < last; ++p)
        for (std::size_t j = q; j <= n_coarse; ++j) {
            paths.push_back(p);
            js.push_back(j);
        }
    std::vector<PairBatch> out;
    for (std::size_t s = 0; s < paths.size(); s += chunk) {
        const std::size_t n = std::min(chunk, paths.size() - s);
        out.push_back(pairs_from_bank(bank, std::span(paths).subspan(s, n), std::span(js).subspan(s, n), n_coarse, q));
    }
    return out;
}

PairBatch kernel_batch(const diffusion::TeacherModel& teacher, const Eigen::MatrixXd& pool, std::size_t n,
                       std::size_t n_coarse, std::size_t q, stoch::Rng& rng) {
    const std::size_t n_j = n_coarse - q + 1;
    std::vector<std::vector<Eigen::Index>> groups(n_j);
    for (std::size_t b = 0; b < n; ++b)
        groups[uniform_index(rng, n_j)].push_back(static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(pool.cols()))));
    std::vector<PairBatch> parts;
    for (std::size_t g = 0; g < n_j; ++g) {
        if (groups[g].empty()) continue;
        Eigen::MatrixXd x0(pool.rows(), static_cast<Eigen::Index>(groups[g].size()));
        for (std::size_t c = 0; c < groups[g].size(); ++c) x0.col(static_cast<Eigen::Index>(c)) = pool.col(groups[g][c]);
        parts.push_back(build_training_pair(teacher, x0, q + g, n_coarse, q, rng));
    }
    return concat_pairs(parts);
}

}  // namespace

PairSource pair_source_from_string(const std::string& s) {
    if (s == "bank") return PairSource::bank;
    if (s == "forward_kernel") return PairSource::forward_kernel;
    throw std::invalid_argument("unknown pair source '" + s + "' (expected bank or forward_kernel)");
}

std::string to_string(PairSource s) { return s == PairSource::bank ? "bank" : "forward_kernel"; }

void DistillConfig::validate() const {
    if (n_coarse < 1 || ratio < 1) throw std::invalid_argument("DistillConfig: n_coarse and ratio must be >= 1");
    if (q < 1 || q > n_coarse) throw std::invalid_argument("DistillConfig: q must lie in [1, n_coarse]");
    if (batch_size < 1 || epochs < 1 || steps_per_epoch < 1)
        throw std::invalid_argument("DistillConfig: batch_size, epochs and steps_per_epoch must be >= 1");
    if (!(lr > 0.0)) throw std::invalid_argument("DistillConfig: lr must be positive");
    if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw std::invalid_argument("DistillConfig: val_fraction must be in (0, 1)");
}

PairBatch build_training_pair(const diffusion::TeacherModel& teacher, const Eigen::MatrixXd& x0, std::size_t j,
                              std::size_t n_coarse, std::size_t q, stoch::Rng& rng) {
    const std::size_t n_fine = teacher.n_fine();
    if (n_coarse == 0 || n_fine % n_coarse != 0) throw std::invalid_argument("build_training_pair: N_c must divide N_f");
    if (q == 0 || j < q || j > n_coarse) throw std::invalid_argument("build_training_pair: requires 1 <= q <= j <= N_c");
    if (x0.rows() != teacher.dim() || x0.cols() == 0) throw std::invalid_argument("build_training_pair: bad x0 shape");
    const std::size_t r = n_fine / n_coarse;
    const Eigen::Index d = x0.rows(), n = x0.cols();
    const double h = teacher.fine_grid().step();
    const double sq = std::sqrt(h);
    const auto& sched = teacher.schedule();
    const double tj = teacher.fine_grid().node(j * r);

    Eigen::MatrixXd y(d, n);
    for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index i = 0; i < d; ++i) y(i, c) = sched.mu(tj) * x0(i, c) + sched.sigma(tj) * rng.normal();

    PairBatch out;
    out.start = y;
    out.j.assign(static_cast<std::size_t>(n), static_cast<int>(j));
    Eigen::MatrixXd dw(d, n);
    for (std::size_t m = 0; m < q; ++m) {
        stoch::PsBatch acc = stoch::PsBatch::zero(d, n);
        for (std::size_t k = (j - m) * r; k > (j - m - 1) * r; --k) {
            for (Eigen::Index c = 0; c < n; ++c)
                for (Eigen::Index i = 0; i < d; ++i) dw(i, c) = sq * rng.normal();
            y = diffusion::backward_step(teacher, y, k, dw);
            stoch::ps_prepend_step(acc, h, dw);
        }
        out.blocks.push_back(std::move(acc));
        out.targets.push_back(y);
    }
    return out;
}

PairBatch pairs_from_bank(const diffusion::TrajectoryBank& bank, std::span<const std::size_t> paths,
                          std::span<const std::size_t> j, std::size_t n_coarse, std::size_t q) {
    if (paths.size() != j.size() || paths.empty()) throw std::invalid_argument("pairs_from_bank: need one start per path");
    const std::size_t n_blocks = bank.ps_blocks.size();
    if (n_coarse == 0 || n_blocks % n_coarse != 0)
        throw std::invalid_argument("pairs_from_bank: student grid is not a coarsening of the bank grid");
    const std::size_t f = n_blocks / n_coarse;
    const Eigen::Index d = bank.states[0].rows();
    const auto n = static_cast<Eigen::Index>(paths.size());

    PairBatch out;
    out.start.resize(d, n);
    out.j.resize(paths.size());
    out.blocks.assign(q, stoch::PsBatch::zero(d, n));
    out.targets.assign(q, Eigen::MatrixXd(d, n));
    for (std::size_t m = 0; m < q; ++m) out.blocks[m].dt = static_cast<double>(f) * bank.ps_blocks[0].dt;

    for (Eigen::Index c = 0; c < n; ++c) {
        const std::size_t p = paths[static_cast<std::size_t>(c)];
        const std::size_t jj = j[static_cast<std::size_t>(c)];
        if (p >= bank.n_paths()) throw std::invalid_argument("pairs_from_bank: path index out of range");
        if (jj < q || jj > n_coarse) throw std::invalid_argument("pairs_from_bank: requires q <= j <= N_c");
        const auto pc = static_cast<Eigen::Index>(p);
        out.start.col(c) = bank.states[jj * f].col(pc);
        out.j[static_cast<std::size_t>(c)] = static_cast<int>(jj);
        for (std::size_t m = 0; m < q; ++m) {
            const std::size_t lo = (jj - m - 1) * f;
            auto& blk = out.blocks[m];
            for (std::size_t b = lo; b < lo + f; ++b) {
                const auto& src = bank.ps_blocks[b];
                blk.s21.col(c) += src.s21.col(pc) + src.dt * blk.dw.col(c);
                blk.dw.col(c) += src.dw.col(pc);
            }
            out.targets[m].col(c) = bank.states[lo].col(pc);
        }
    }
    return out;
}

DistillResult train_distill(const diffusion::TeacherModel& teacher, const DistillConfig& cfg,
                            const Eigen::MatrixXd& train_x0, const stoch::Rng& rng,
                            const diffusion::TrajectoryBank* bank) {
    cfg.validate();
    if (cfg.n_coarse * cfg.ratio != teacher.n_fine())
        throw std::invalid_argument("train_distill: n_coarse * ratio must equal the teacher's fine steps");
    const int d = teacher.dim();

    stoch::Rng init_rng = rng.fork(stoch::stream_id("distill.init", rng.stream()));
    SigDegGenerator gen(nn::init_params(SigDegGenerator::arch_for(d, cfg.arch), init_rng), cfg.n_coarse,
                        teacher.schedule().horizon, cfg.standardize_ps);

    diffusion::TrajectoryBank own;
    std::vector<PairBatch> val;
    std::size_t n_train = 0;
    Eigen::MatrixXd pool;
    if (cfg.pair_source == PairSource::bank) {
        if (!bank) {
            stoch::Rng brng = rng.fork(stoch::stream_id("distill.bank", rng.stream()));
            own = diffusion::sample_backward_bank(teacher, cfg.bank_paths, cfg.ratio, brng);
            bank = &own;
        }
        const std::size_t np = bank->n_paths();
        const std::size_t n_val = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.val_fraction * np)));
        if (np <= n_val) throw std::invalid_argument("train_distill: bank too small for a validation split");
        n_train = np - n_val;
        val = bank_validation(*bank, n_train, np, cfg.n_coarse, cfg.q);
    } else {
        if (train_x0.rows() != d || train_x0.cols() < 2) throw std::invalid_argument("train_distill: bad training data");
        const auto n_all = static_cast<std::size_t>(train_x0.cols());
        const std::size_t n_val = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(cfg.val_fraction * n_all)), 1, n_all - 1);
        pool = train_x0.leftCols(static_cast<Eigen::Index>(n_all - n_val));
        const Eigen::MatrixXd val_pool = train_x0.rightCols(static_cast<Eigen::Index>(n_val));
        stoch::Rng vrng = rng.fork(stoch::stream_id("distill.val", rng.stream()));
        for (std::size_t s = 0; s < cfg.val_pairs; s += 2048)
            val.push_back(kernel_batch(teacher, val_pool, std::min<std::size_t>(2048, cfg.val_pairs - s), cfg.n_coarse, cfg.q, vrng));
    }

    DistillResult res{gen, {}, {}, evaluate(gen, val), 0};
    double best = res.initial_val_loss;
    nn::ResidualNetParams best_params = gen.net();
    nn::AdamState adam = nn::AdamState::for_params(gen.net(), cfg.lr);
    const std::size_t total = cfg.epochs * cfg.steps_per_epoch;
    std::vector<std::size_t> paths(cfg.batch_size), js(cfg.batch_size);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        double sum = 0.0;
        for (std::size_t s = 0; s < cfg.steps_per_epoch; ++s) {
            const std::size_t step = epoch * cfg.steps_per_epoch + s;
            stoch::Rng srng = rng.fork(stoch::stream_id("distill.batch", rng.stream(), step));
            PairBatch batch;
            if (cfg.pair_source == PairSource::bank) {
                for (std::size_t b = 0; b < cfg.batch_size; ++b) {
                    paths[b] = uniform_index(srng, n_train);
                    js[b] = cfg.q + uniform_index(srng, cfg.n_coarse - cfg.q + 1);
                }
                batch = pairs_from_bank(*bank, paths, js, cfg.n_coarse, cfg.q);
            } else {
                batch = kernel_batch(teacher, pool, cfg.batch_size, cfg.n_coarse, cfg.q, srng);
            }
            LossResult lr = local_loss(gen, batch);
            if (!std::isfinite(lr.loss))
                throw TrainingError("train_distill: non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                                    std::to_string(s) + " (try a smaller learning rate)");
            adam.lr = nn::scheduled_lr(cfg.lr, step, total, cfg.cosine);
            nn::adam_step(adam, gen.net(), lr.grads);
            sum += lr.loss;
        }
        res.train_loss.push_back(sum / static_cast<double>(cfg.steps_per_epoch));
        const double v = evaluate(gen, val);
        if (!std::isfinite(v)) throw TrainingError("train_distill: non-finite validation loss at epoch " + std::to_string(epoch));
        res.val_loss.push_back(v);
        if (v < best) {
            best = v;
            best_params = gen.net();
            res.best_epoch = epoch + 1;
        }
    }
    gen.net() = best_params;
    res.generator = gen;
    return res;
}

}  // namespace sigdeg::distill
