#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sigdeg/cli/config.hpp"
#include "sigdeg/data/datasets.hpp"
#include "sigdeg/diffusion/teacher.hpp"
#include "sigdeg/distill/generator.hpp"
#include "sigdeg/metrics/report.hpp"

namespace sigdeg::cli {

/// Artifact locations under the run directory.
struct RunPaths {
    std::filesystem::path root;

    std::filesystem::path data_dir() const { return root / "data"; }
    std::filesystem::path split(const std::string& name) const { return data_dir() / (name + ".bin"); }
    std::filesystem::path teacher_dir() const { return root / "teacher"; }
    std::filesystem::path teacher() const { return teacher_dir() / "teacher.bin"; }
    std::filesystem::path student_dir(const DistillRun& run) const { return root / "distill" / run.name(); }
    std::filesystem::path student(const DistillRun& run) const { return student_dir(run) / "student.bin"; }
    std::filesystem::path samples_dir() const { return root / "samples"; }
    std::filesystem::path eval_dir() const { return root / "eval"; }
    std::filesystem::path convergence_dir() const { return root / "convergence"; }
};

/// Stored splits in data space together with the standardizer the models use.
struct DataSplits {
    Eigen::MatrixXd train, val, test;
    data::Standardizer standardizer;
};

DataSplits load_splits(const RunPaths& paths);

void save_teacher(const std::filesystem::path& path, const diffusion::TeacherModel& teacher,
                  const data::Standardizer& standardizer, std::uint64_t seed);
struct LoadedTeacher {
    diffusion::TeacherModel model;
    data::Standardizer standardizer;
};
LoadedTeacher load_teacher(const std::filesystem::path& path);

/// Metric suite for one dataset. Both inputs are in data space, columns are samples.
/// 1dn: w1, variance_score, mass_negative. rbergomi: marginal_hist, correlation,
/// autocorrelation and w1, all on standardized coordinates.
void add_metrics(metrics::MetricReport& report, Dataset dataset, const Eigen::MatrixXd& real,
                 const Eigen::MatrixXd& gen, const data::Standardizer& standardizer, const EvalSection& eval,
                 const data::RBergomiSpec& rbergomi);

/// Draws n samples in data space from a named model ("teacher" or a run name)
/// and adds the network evaluations spent to `nfe`.
struct Sampler {
    std::string name;
    std::function<Eigen::MatrixXd(std::size_t n, stoch::Rng& rng, std::uint64_t& nfe)> draw;
};

Sampler teacher_sampler(const LoadedTeacher& teacher);
Sampler student_sampler(const std::string& name, const distill::SigDegGenerator& gen,
                        const data::Standardizer& standardizer);

// Stages. Each writes its artifacts plus manifest.json under the run directory
// and returns a short summary. Missing upstream artifacts raise ConfigError.
nlohmann::json cmd_gen_data(const ExperimentConfig& cfg);
nlohmann::json cmd_train_teacher(const ExperimentConfig& cfg);
nlohmann::json cmd_distill(const ExperimentConfig& cfg);
/// Empty `model` samples from every available checkpoint.
nlohmann::json cmd_sample(const ExperimentConfig& cfg, const std::string& model = {}, std::size_t n = 0);
nlohmann::json cmd_evaluate(const ExperimentConfig& cfg);
nlohmann::json cmd_convergence(const ExperimentConfig& cfg);

}  // namespace sigdeg::cli
