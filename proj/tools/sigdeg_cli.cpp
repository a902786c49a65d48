#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sigdeg/cli/config.hpp"
#include "sigdeg/cli/pipeline.hpp"
#include "sigdeg/errors.hpp"

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kNumeric = 3 };

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sig-DEG experiment pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::string seed;
    std::string out_dir;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "experiment YAML file")->required();
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--out", out_dir, "override the output directory");
    app.add_option("--override", overrides, "set a config key, e.g. teacher.lr=5e-4")->take_all();

    std::string model;
    std::size_t n_samples = 0;
    app.add_subcommand("gen-data", "sample the dataset and write train/val/test splits");
    app.add_subcommand("train-teacher", "fit the score network on the training split");
    app.add_subcommand("distill", "train one student per configured (n_coarse, q) run");
    auto* sample = app.add_subcommand("sample", "draw samples from the teacher and students");
    sample->add_option("--model", model, "teacher or a run name such as nc10_q1 (default: all)");
    sample->add_option("--n", n_samples, "number of samples (default: eval.n_samples or test size)");
    app.add_subcommand("evaluate", "metric report for the teacher and every student");
    app.add_subcommand("convergence", "strong-order study on the linear test SDE");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfig;
    }

    try {
        if (!seed.empty()) overrides.push_back("seed=" + seed);
        if (!out_dir.empty()) overrides.push_back("out_dir=\"" + out_dir + "\"");
        const sigdeg::cli::ExperimentConfig cfg = sigdeg::cli::load_config(config_path, overrides);
        const std::string cmd = app.get_subcommands().front()->get_name();
        nlohmann::json summary;
        if (cmd == "gen-data") summary = sigdeg::cli::cmd_gen_data(cfg);
        else if (cmd == "train-teacher") summary = sigdeg::cli::cmd_train_teacher(cfg);
        else if (cmd == "distill") summary = sigdeg::cli::cmd_distill(cfg);
        else if (cmd == "sample") summary = sigdeg::cli::cmd_sample(cfg, model, n_samples);
        else if (cmd == "evaluate") summary = sigdeg::cli::cmd_evaluate(cfg);
        else summary = sigdeg::cli::cmd_convergence(cfg);
        std::cout << summary.dump(2) << "\n";
        return kOk;
    } catch (const sigdeg::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfig;
    } catch (const sigdeg::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return kNumeric;
    } catch (const sigdeg::TrainingError& e) {
        std::fprintf(stderr, "training failed: %s\n", e.what());
        return kNumeric;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kOther;
    }
}
