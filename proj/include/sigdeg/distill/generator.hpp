#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "sigdeg/nn/residual_net.hpp"
#include "sigdeg/stoch/partial_signature.hpp"
#include "sigdeg/stoch/rng.hpp"
#include "sigdeg/stoch/time_grid.hpp"

namespace sigdeg::distill {

/// Coarse-grid student Z_{i-1} = Z_i + N(Z_i, i, PS over [t_{i-1}, t_i]).
///
/// The network input is (Z, dw, s21) stacked into 3d rows; the coarse node
/// index i goes through the time embedding. With standardize_ps the blocks
/// enter as dw / sqrt(dt) and s21 / sqrt(dt^3 / 3).
class SigDegGenerator {
public:
    SigDegGenerator(nn::ResidualNetParams net, std::size_t n_coarse, double horizon = 1.0, bool standardize_ps = true);

    /// Architecture with d_in = 3d and d_out = d derived from `base`.
    static nn::NetArch arch_for(int d, nn::NetArch base = {});

    int dim() const { return dim_; }
    std::size_t n_coarse() const { return grid_.n_steps(); }
    const stoch::TimeGrid& coarse_grid() const { return grid_; }
    bool standardize_ps() const { return standardize_ps_; }
    const nn::ResidualNetParams& net() const { return net_; }
    nn::ResidualNetParams& net() { return net_; }

    /// Stacked network input for states z (d x n) and one block per column.
    Eigen::MatrixXd features(const Eigen::MatrixXd& z, const stoch::PsBatch& ps) const;
    /// One recurrence step from coarse node i to i - 1 for every column.
    Eigen::MatrixXd step(const Eigen::MatrixXd& z, std::size_t i, const stoch::PsBatch& ps) const;

private:
    nn::ResidualNetParams net_;
    stoch::TimeGrid grid_;
    int dim_;
    bool standardize_ps_;
};

/// q recurrence steps from coarse node j. blocks[m] covers [t_{j-m-1}, t_{j-m}]
/// (time-descending). Returns the states at t_{j-1}, ..., t_{j-q}.
std::vector<Eigen::MatrixXd> rollout_q(const SigDegGenerator& gen, const Eigen::MatrixXd& z_start, std::size_t j,
                                       std::span<const stoch::PsBatch> blocks);

/// Supervision for one minibatch. Column b starts at coarse node j[b];
/// blocks[m] and targets[m] refer to node j[b] - m - 1 of that column.
struct PairBatch {
    Eigen::MatrixXd start;                 // d x B
    std::vector<int> j;                    // B coarse indices
    std::vector<stoch::PsBatch> blocks;    // q entries, d x B each
    std::vector<Eigen::MatrixXd> targets;  // q entries, d x B each

    std::size_t size() const { return j.size(); }
    std::size_t q() const { return blocks.size(); }
};

/// Concatenates batches with equal q along columns.
PairBatch concat_pairs(std::span<const PairBatch> parts);

struct LossResult {
    double loss = 0.0;
    nn::GradientBundle grads;
};

/// Mean squared error per coordinate between the q rolled-out states and
/// the teacher targets, averaged over the batch and the q steps; gradients
/// flow back through the unrolled chain.
LossResult local_loss(const SigDegGenerator& gen, const PairBatch& pairs, bool want_grads = true);

struct InferenceResult {
    std::vector<Eigen::MatrixXd> states;  // coarse node i -> d x n; states[0] is Z_0
    std::uint64_t nfe = 0;
};

/// Z_{N_c} ~ N(0, I), exact partial-signature draws per coarse interval, N_c network calls per sample.
InferenceResult sample_inference(const SigDegGenerator& gen, std::size_t n_samples, stoch::Rng& rng);

nlohmann::json generator_header(const SigDegGenerator& gen);
void save_generator(const std::filesystem::path& path, const SigDegGenerator& gen, std::uint64_t seed,
                    nlohmann::json extra = nlohmann::json::object());
SigDegGenerator load_generator(const std::filesystem::path& path);

}  // namespace sigdeg::distill
