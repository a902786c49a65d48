#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "sigdeg/diffusion/schedule.hpp"
#include "sigdeg/nn/residual_net.hpp"
#include "sigdeg/stoch/partial_signature.hpp"
#include "sigdeg/stoch/rng.hpp"
#include "sigdeg/stoch/time_grid.hpp"

namespace sigdeg::diffusion {

/// Noise predictor eps_hat(y, k) for fine node k (time k * T / N_f); columns are samples.
using EpsPredictor = std::function<Eigen::MatrixXd(const Eigen::MatrixXd& y, std::size_t k)>;

/// Score-based teacher on a fine grid of N_f steps over [0, T].
/// The network predicts eps; the score is -eps_hat / sigma(t).
class TeacherModel {
public:
    TeacherModel(ForwardSchedule schedule, nn::ResidualNetParams score_net, std::size_t n_fine);

    /// Teacher driven by a closed-form noise predictor instead of a network.
    static TeacherModel from_predictor(ForwardSchedule schedule, int dim, std::size_t n_fine, EpsPredictor eps);

    const ForwardSchedule& schedule() const { return schedule_; }
    const stoch::TimeGrid& fine_grid() const { return fine_grid_; }
    std::size_t n_fine() const { return fine_grid_.n_steps(); }
    int dim() const { return dim_; }
    bool has_net() const { return net_.has_value(); }
    const nn::ResidualNetParams& net() const { return *net_; }
    nn::ResidualNetParams& net() { return *net_; }

    Eigen::MatrixXd predict_eps(const Eigen::MatrixXd& y, std::size_t k) const;

private:
    ForwardSchedule schedule_;
    std::optional<nn::ResidualNetParams> net_;
    EpsPredictor override_;
    stoch::TimeGrid fine_grid_;
    int dim_;
};

struct DsmResult {
    double loss = 0.0;
    nn::GradientBundle grads;
};

/// Denoising score matching in eps form: mean over the batch of ||eps_hat - eps||^2.
/// Node k is drawn uniformly from {1..N_f}, so sigma(t) >= sigma(T / N_f) > 0.
DsmResult dsm_loss(const TeacherModel& model, const Eigen::MatrixXd& batch_x0, stoch::Rng& rng);

/// Reverse Euler-Maruyama step from fine node k_hi to k_hi - 1, coefficients at t_hi:
/// y' = y - (f(y, t_hi) - g(t_hi)^2 score) h + g(t_hi) dW, with g = sqrt(beta).
Eigen::MatrixXd backward_step(const TeacherModel& model, const Eigen::MatrixXd& y, std::size_t k_hi,
                              const Eigen::MatrixXd& dw);
/// Time-valued form; t_hi must be a fine node and t_lo the node below it.
Eigen::MatrixXd backward_step(const TeacherModel& model, const Eigen::MatrixXd& y, double t_hi, double t_lo,
                              const Eigen::MatrixXd& dw);

/// Full backward sampling with every fine state and driving increment kept.
/// states[k] is the d x n batch at fine node k; increments[k] drives node k+1 -> k
/// and is the forward-time increment W(t_{k+1}) - W(t_k).
struct RecordedPaths {
    std::vector<Eigen::MatrixXd> states;
    std::vector<Eigen::MatrixXd> increments;
    std::uint64_t nfe = 0;
};

RecordedPaths sample_backward_recorded(const TeacherModel& model, std::size_t n_paths, stoch::Rng& rng);

/// Teacher samples at t = 0 only (no recording).
Eigen::MatrixXd sample_teacher(const TeacherModel& model, std::size_t n_paths, stoch::Rng& rng,
                               std::uint64_t* nfe = nullptr);

/// Backward paths compressed to every `stride`-th fine node: states at those
/// nodes plus the partial signature of the driving noise over each stride block.
struct TrajectoryBank {
    std::size_t stride = 1;
    std::size_t n_fine = 1;
    std::vector<Eigen::MatrixXd> states;     // n_fine / stride + 1 entries, d x n
    std::vector<stoch::PsBatch> ps_blocks;   // n_fine / stride entries
    std::uint64_t nfe = 0;

    std::size_t n_paths() const { return states.empty() ? 0 : static_cast<std::size_t>(states[0].cols()); }
};

TrajectoryBank sample_backward_bank(const TeacherModel& model, std::size_t n_paths, std::size_t stride,
                                    stoch::Rng& rng, std::size_t chunk = 512);

struct TeacherTrainConfig {
    std::size_t steps = 2000;
    std::size_t batch_size = 256;
    double lr = 1e-3;
    bool cosine = true;
    double ema_decay = 0.999;
    std::size_t log_every = 50;
};

struct TrainCurve {
    std::vector<std::size_t> step;
    std::vector<double> loss;
};

/// Adam on dsm_loss over minibatches of `train` (d x N). The model's net is
/// replaced by the EMA weights when ema_decay > 0. Throws TrainingError on
/// a non-finite loss.
TrainCurve train_teacher(TeacherModel& model, const Eigen::MatrixXd& train, const TeacherTrainConfig& cfg,
                         const stoch::Rng& rng);

}  // namespace sigdeg::diffusion
