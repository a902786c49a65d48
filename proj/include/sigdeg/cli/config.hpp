#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "sigdeg/data/datasets.hpp"
#include "sigdeg/data/rbergomi.hpp"
#include "sigdeg/diffusion/schedule.hpp"
#include "sigdeg/diffusion/teacher.hpp"
#include "sigdeg/distill/training.hpp"
#include "sigdeg/nn/residual_net.hpp"
#include "sigdeg/taylor/strong_order.hpp"

namespace sigdeg::cli {

enum class Dataset { mixture_1d, rbergomi, test_sde };

Dataset dataset_from_string(const std::string& s);
std::string to_string(Dataset d);

struct TeacherSection {
    std::size_t n_fine = 300;
    diffusion::ForwardSchedule schedule;
    nn::NetArch arch;  ///< d_in / d_out follow the data
    diffusion::TeacherTrainConfig train;
};

struct DistillRun {
    std::size_t n_coarse = 5;
    std::size_t q = 1;
    std::size_t epochs = 0;  ///< 0: distill.epochs

    std::string name() const { return "nc" + std::to_string(n_coarse) + "_q" + std::to_string(q); }
};

struct DistillSection {
    std::vector<DistillRun> runs{{5, 1}};
    distill::DistillConfig base;  ///< n_coarse, q and ratio are set per run
};

struct EvalSection {
    std::size_t repeats = 10;
    std::size_t n_samples = 0;  ///< 0: size of the test split
    std::size_t bins = 50;
    std::size_t max_lag = 10;
    bool evaluate_teacher = true;
};

struct ConvergenceSection {
    double a = -1.0;
    double sigma0 = 0.5;
    double b = 0.5;
    taylor::StrongOrderOptions options;
};

struct ExperimentConfig {
    Dataset dataset = Dataset::mixture_1d;
    std::uint64_t seed = 1;
    std::filesystem::path out_dir = "runs/default";
    data::MixtureSpec mixture;
    data::RBergomiSpec rbergomi;
    TeacherSection teacher;
    DistillSection distill;
    EvalSection eval;
    ConvergenceSection convergence;

    /// Every key, as parsed, for manifests.
    nlohmann::json snapshot;

    /// Throws ConfigError when sections are inconsistent (e.g. N_c does not divide N_f).
    void validate() const;
};

/// Reads a YAML experiment file, applies "section.key=value" overrides (values
/// parsed as YAML). Unknown keys are
/// rejected with ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
ExperimentConfig parse_config(const std::string& yaml_text, const std::vector<std::string>& overrides = {});

}  // namespace sigdeg::cli
