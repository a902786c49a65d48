#include "sigdeg/diffusion/teacher.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sigdeg/errors.hpp"
#include "sigdeg/nn/adam.hpp"
#include "sigdeg/nn/train_util.hpp"

namespace sigdeg::diffusion {

namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, double scale, stoch::Rng& rng) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = scale * rng.normal();
    return m;
}

}  // namespace

TeacherModel::TeacherModel(ForwardSchedule schedule, nn::ResidualNetParams score_net, std::size_t n_fine)
    : schedule_(schedule),
      net_(std::move(score_net)),
      fine_grid_(0.0, schedule.horizon, n_fine),
      dim_(net_->arch().d_out) {
    if (net_->arch().d_in != net_->arch().d_out)
        throw std::invalid_argument("TeacherModel: score net must map R^d to R^d");
}

TeacherModel TeacherModel::from_predictor(ForwardSchedule schedule, int dim, std::size_t n_fine, EpsPredictor eps) {
    nn::NetArch arch;
    arch.d_in = arch.d_out = dim;
    arch.hidden = 2;
    arch.time_embed_dim = 2;
    arch.n_blocks = 0;
    TeacherModel m(schedule, nn::ResidualNetParams(arch), n_fine);
    m.net_.reset();
    m.override_ = std::move(eps);
    return m;
}

Eigen::MatrixXd TeacherModel::predict_eps(const Eigen::MatrixXd& y, std::size_t k) const {
    if (y.rows() != dim_) throw std::invalid_argument("TeacherModel: state dimension mismatch");
    if (override_) return override_(y, k);
    return nn::forward_batch(*net_, y, static_cast<int>(k));
}

DsmResult dsm_loss(const TeacherModel& model, const Eigen::MatrixXd& batch_x0, stoch::Rng& rng) {
    if (!model.has_net()) throw std::invalid_argument("dsm_loss: teacher has no network");
    const Eigen::Index d = batch_x0.rows();
    const Eigen::Index b = batch_x0.cols();
    if (b == 0) throw std::invalid_argument("dsm_loss: empty batch");
    if (d != model.dim()) throw std::invalid_argument("dsm_loss: data dimension mismatch");

    const auto& sched = model.schedule();
    const auto& grid = model.fine_grid();
    const std::size_t n_fine = model.n_fine();

    std::vector<int> steps(static_cast<std::size_t>(b));
    Eigen::MatrixXd eps(d, b);
    Eigen::MatrixXd y(d, b);
    for (Eigen::Index j = 0; j < b; ++j) {
        const std::size_t k = 1 + std::min<std::size_t>(n_fine - 1, static_cast<std::size_t>(rng.uniform() * n_fine));
        steps[static_cast<std::size_t>(j)] = static_cast<int>(k);
        const double t = grid.node(k);
        for (Eigen::Index i = 0; i < d; ++i) eps(i, j) = rng.normal();
        y.col(j) = sched.mu(t) * batch_x0.col(j) + sched.sigma(t) * eps.col(j);
    }

    const nn::ForwardTape tape = nn::forward_record(model.net(), y, steps);
    const Eigen::MatrixXd diff = tape.out - eps;
    DsmResult res{diff.squaredNorm() / static_cast<double>(b), nn::GradientBundle{nn::ResidualNetParams(model.net().arch()), {}}};
    res.grads = nn::backward_batch(model.net(), tape, (2.0 / static_cast<double>(b)) * diff);
    return res;
}

Eigen::MatrixXd backward_step(const TeacherModel& model, const Eigen::MatrixXd& y, std::size_t k_hi,
                              const Eigen::MatrixXd& dw) {
    if (k_hi == 0 || k_hi > model.n_fine()) throw std::invalid_argument("backward_step: node index out of range");
    if (dw.rows() != y.rows() || dw.cols() != y.cols()) throw std::invalid_argument("backward_step: noise shape mismatch");
    const auto& sched = model.schedule();
    const double t = model.fine_grid().node(k_hi);
    const double h = model.fine_grid().step();
    const double beta = sched.beta(t);
    const Eigen::MatrixXd eps_hat = model.predict_eps(y, k_hi);
    // f - g^2 score = drift_coef y + beta eps_hat / sigma
    return y - (sched.drift_coef(t) * y + (beta / sched.sigma(t)) * eps_hat) * h + std::sqrt(beta) * dw;
}

Eigen::MatrixXd backward_step(const TeacherModel& model, const Eigen::MatrixXd& y, double t_hi, double t_lo,
                              const Eigen::MatrixXd& dw) {
    if (!(t_hi > t_lo)) throw std::invalid_argument("backward_step: requires t_hi > t_lo");
    const auto& grid = model.fine_grid();
    const double h = grid.step();
    const double pos = (t_hi - grid.t_start()) / h;
    const auto k = static_cast<std::size_t>(std::llround(pos));
    if (std::abs(pos - static_cast<double>(k)) > 1e-9 || std::abs((t_hi - t_lo) - h) > 1e-9 * std::max(1.0, h))
        throw std::invalid_argument("backward_step: times must be adjacent fine-grid nodes");
    return backward_step(model, y, k, dw);
}

RecordedPaths sample_backward_recorded(const TeacherModel& model, std::size_t n_paths, stoch::Rng& rng) {
    if (n_paths == 0) throw std::invalid_argument("sample_backward_recorded: n_paths must be >= 1");
    const std::size_t n = model.n_fine();
    const auto d = static_cast<Eigen::Index>(model.dim());
    const auto np = static_cast<Eigen::Index>(n_paths);
    const double sq = std::sqrt(model.fine_grid().step());

    RecordedPaths out;
    out.states.resize(n + 1);
    out.increments.resize(n);
    out.states[n] = gaussian(d, np, 1.0, rng);
    for (std::size_t k = n; k >= 1; --k) {
        out.increments[k - 1] = gaussian(d, np, sq, rng);
        out.states[k - 1] = backward_step(model, out.states[k], k, out.increments[k - 1]);
    }
    out.nfe = static_cast<std::uint64_t>(n) * n_paths;
    return out;
}

Eigen::MatrixXd sample_teacher(const TeacherModel& model, std::size_t n_paths, stoch::Rng& rng, std::uint64_t* nfe) {
    if (n_paths == 0) throw std::invalid_argument("sample_teacher: n_paths must be >= 1");
    const std::size_t n = model.n_fine();
    const auto d = static_cast<Eigen::Index>(model.dim());
    const auto np = static_cast<Eigen::Index>(n_paths);
    const double sq = std::sqrt(model.fine_grid().step());
    Eigen::MatrixXd y = gaussian(d, np, 1.0, rng);
    for (std::size_t k = n; k >= 1; --k) y = backward_step(model, y, k, gaussian(d, np, sq, rng));
    if (nfe) *nfe += static_cast<std::uint64_t>(n) * n_paths;
    return y;
}

TrajectoryBank sample_backward_bank(const TeacherModel& model, std::size_t n_paths, std::size_t stride,
                                    stoch::Rng& rng, std::size_t chunk) {
    const std::size_t n = model.n_fine();
    if (stride == 0 || n % stride != 0) throw std::invalid_argument("sample_backward_bank: stride must divide N_f");
    if (n_paths == 0 || chunk == 0) throw std::invalid_argument("sample_backward_bank: empty request");
    const auto d = static_cast<Eigen::Index>(model.dim());
    const std::size_t n_blocks = n / stride;
    const double h = model.fine_grid().step();
    const double sq = std::sqrt(h);

    TrajectoryBank bank;
    bank.stride = stride;
    bank.n_fine = n;
    bank.states.assign(n_blocks + 1, Eigen::MatrixXd(d, static_cast<Eigen::Index>(n_paths)));
    bank.ps_blocks.assign(n_blocks, stoch::PsBatch::zero(d, static_cast<Eigen::Index>(n_paths)));

    for (std::size_t c0 = 0, ci = 0; c0 < n_paths; c0 += chunk, ++ci) {
        const auto nc = static_cast<Eigen::Index>(std::min(chunk, n_paths - c0));
        const auto col0 = static_cast<Eigen::Index>(c0);
        stoch::Rng crng = rng.fork(stoch::stream_id("teacher.bank", rng.stream(), ci));
        Eigen::MatrixXd y = gaussian(d, nc, 1.0, crng);
        bank.states[n_blocks].middleCols(col0, nc) = y;
        for (std::size_t m = n_blocks; m >= 1; --m) {
            stoch::PsBatch acc = stoch::PsBatch::zero(d, nc);
            for (std::size_t k = m * stride; k > (m - 1) * stride; --k) {
                const Eigen::MatrixXd dw = gaussian(d, nc, sq, crng);
                y = backward_step(model, y, k, dw);
                stoch::ps_prepend_step(acc, h, dw);
            }
            bank.states[m - 1].middleCols(col0, nc) = y;
            auto& blk = bank.ps_blocks[m - 1];
            blk.dt = acc.dt;
            blk.dw.middleCols(col0, nc) = acc.dw;
            blk.s21.middleCols(col0, nc) = acc.s21;
        }
    }
    bank.nfe = static_cast<std::uint64_t>(n) * n_paths;
    return bank;
}

TrainCurve train_teacher(TeacherModel& model, const Eigen::MatrixXd& train, const TeacherTrainConfig& cfg,
                         const stoch::Rng& rng) {
    if (!model.has_net()) throw std::invalid_argument("train_teacher: teacher has no network");
    if (train.cols() == 0 || train.rows() != model.dim()) throw std::invalid_argument("train_teacher: bad training data");
    if (cfg.batch_size == 0) throw std::invalid_argument("train_teacher: batch_size must be >= 1");

    nn::AdamState adam = nn::AdamState::for_params(model.net(), cfg.lr);
    nn::ParamEma ema(model.net(), cfg.ema_decay);
    const auto n = static_cast<std::size_t>(train.cols());
    const auto bs = static_cast<Eigen::Index>(cfg.batch_size);

    TrainCurve curve;
    double window = 0.0;
    std::size_t in_window = 0;
    Eigen::MatrixXd batch(train.rows(), bs);
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        stoch::Rng srng = rng.fork(stoch::stream_id("teacher.batch", rng.stream(), step));
        for (Eigen::Index j = 0; j < bs; ++j)
            batch.col(j) = train.col(static_cast<Eigen::Index>(std::min(n - 1, static_cast<std::size_t>(srng.uniform() * n))));
        DsmResult r = dsm_loss(model, batch, srng);
        if (!std::isfinite(r.loss))
            throw TrainingError("train_teacher: non-finite loss at step " + std::to_string(step));
        adam.lr = nn::scheduled_lr(cfg.lr, step, cfg.steps, cfg.cosine);
        nn::adam_step(adam, model.net(), r.grads);
        if (cfg.ema_decay > 0.0) ema.update(model.net());
        window += r.loss;
        ++in_window;
        if (in_window == std::max<std::size_t>(1, cfg.log_every) || step + 1 == cfg.steps) {
            curve.step.push_back(step + 1);
            curve.loss.push_back(window / static_cast<double>(in_window));
            window = 0.0;
            in_window = 0;
        }
    }
    if (cfg.ema_decay > 0.0) model.net() = ema.params();
    return curve;
}

}  // namespace sigdeg::diffusion
