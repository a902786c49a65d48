#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sigdeg/diffusion/teacher.hpp"
#include "sigdeg/distill/generator.hpp"
#include "sigdeg/nn/residual_net.hpp"
#include "sigdeg/stoch/rng.hpp"

namespace sigdeg::distill {

enum class PairSource {
    bank,            ///< coarse windows cut from full teacher trajectories started at N(0, I)
    forward_kernel,  ///< Y_{t_j} from the forward kernel, then q r teacher steps
};

PairSource pair_source_from_string(const std::string& s);
std::string to_string(PairSource s);

struct DistillConfig {
    std::size_t n_coarse = 5;
    std::size_t ratio = 60;
    std::size_t q = 1;
    std::size_t batch_size = 256;
    double lr = 1e-3;
    bool cosine = true;
    std::size_t epochs = 20;
    std::size_t steps_per_epoch = 100;
    bool standardize_ps = true;
    PairSource pair_source = PairSource::bank;
    std::size_t bank_paths = 4000;   ///< used when no bank is supplied
    double val_fraction = 0.1;       ///< share of bank paths (or data) held out for checkpoint selection
    std::size_t val_pairs = 1024;    ///< validation pairs in forward_kernel mode
    nn::NetArch arch;                ///< hidden sizes; d_in and d_out are derived

    void validate() const;
};

/// Forward-kernel pairs: for every column, Y_{t_j} = mu(t_j) x0 + sigma(t_j) eps,
/// then q r teacher steps with recorded noise; one block per coarse step.
PairBatch build_training_pair(const diffusion::TeacherModel& teacher, const Eigen::MatrixXd& x0, std::size_t j,
                              std::size_t n_coarse, std::size_t q, stoch::Rng& rng);

/// Pairs for the given bank paths and coarse start nodes; the student grid
/// must be a coarsening of the bank grid.
PairBatch pairs_from_bank(const diffusion::TrajectoryBank& bank, std::span<const std::size_t> paths,
                          std::span<const std::size_t> j, std::size_t n_coarse, std::size_t q);

struct DistillResult {
    SigDegGenerator generator;
    std::vector<double> train_loss;  ///< mean minibatch loss per epoch
    std::vector<double> val_loss;    ///< validation loss after each epoch
    double initial_val_loss = 0.0;
    std::size_t best_epoch = 0;
};

/// Adam on local_loss for a fixed epoch budget, keeping the weights with the
/// lowest validation loss. Pairs come from `bank` when given, from a bank
/// sampled here otherwise, or from the forward kernel on `train_x0`.
/// Throws TrainingError on a non-finite loss.
DistillResult train_distill(const diffusion::TeacherModel& teacher, const DistillConfig& cfg,
                            const Eigen::MatrixXd& train_x0, const stoch::Rng& rng,
                            const diffusion::TrajectoryBank* bank = nullptr);

}  // namespace sigdeg::distill
