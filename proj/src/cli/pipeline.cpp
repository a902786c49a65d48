#include "sigdeg/cli/pipeline.hpp"

#include <chrono>
#include <map>
#include <optional>
#include <numeric>
#include <sstream>

#include "sigdeg/cli/manifest.hpp"
#include "sigdeg/data/matrix_file.hpp"
#include "sigdeg/data/rbergomi.hpp"
#include "sigdeg/distill/training.hpp"
#include "sigdeg/errors.hpp"
#include "sigdeg/io.hpp"
#include "sigdeg/metrics/metrics.hpp"
#include "sigdeg/nn/param_io.hpp"
#include "sigdeg/taylor/strong_order.hpp"

namespace sigdeg::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kSplitNames[] = {"train", "val", "test"};

fs::path standardizer_path(const RunPaths& p) { return p.data_dir() / "standardizer.json"; }

void require(const fs::path& file, const std::string& stage) {
    if (!fs::exists(file)) throw ConfigError("missing " + file.string() + "; run '" + stage + "' first");
}

Manifest new_manifest(const ExperimentConfig& cfg, const std::string& stage) {
    Manifest m;
    m.stage = stage;
    m.seed = cfg.seed;
    m.config = cfg.snapshot;
    return m;
}

stoch::Rng stream(const ExperimentConfig& cfg, std::string_view purpose, std::uint64_t a = 0, std::uint64_t b = 0) {
    return stoch::Rng(cfg.seed, stoch::stream_id(purpose, a, b));
}

void write_loss_csv(const fs::path& path, const std::string& header,
                    const std::vector<std::vector<double>>& columns, const std::vector<std::size_t>& index) {
    std::ostringstream out;
    out.precision(17);
    out << header << "\n";
    for (std::size_t i = 0; i < index.size(); ++i) {
        out << index[i];
        for (const auto& c : columns) out << "," << c[i];
        out << "\n";
    }
    io::write_text(path, out.str());
}

std::size_t lcm_of_runs(const std::vector<DistillRun>& runs) {
    std::size_t l = 1;
    for (const auto& r : runs) l = std::lcm(l, r.n_coarse);
    return l;
}

std::vector<double> row_values(const Eigen::MatrixXd& m, Eigen::Index r) {
    std::vector<double> v(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) v[static_cast<std::size_t>(c)] = m(r, c);
    return v;
}

distill::DistillConfig run_config(const ExperimentConfig& cfg, const DistillRun& run) {
    distill::DistillConfig dc = cfg.distill.base;
    dc.n_coarse = run.n_coarse;
    dc.q = run.q;
    dc.ratio = cfg.teacher.n_fine / run.n_coarse;
    if (run.epochs) dc.epochs = run.epochs;
    return dc;
}

void reject_test_sde(const ExperimentConfig& cfg, const std::string& stage) {
    if (cfg.dataset == Dataset::test_sde)
        throw ConfigError(stage + ": dataset test-sde only supports the convergence stage");
}

}  // namespace

DataSplits load_splits(const RunPaths& paths) {
    DataSplits s;
    for (const char* name : kSplitNames) require(paths.split(name), "gen-data");
    require(standardizer_path(paths), "gen-data");
    s.train = data::load_matrix(paths.split("train")).matrix;
    s.val = data::load_matrix(paths.split("val")).matrix;
    s.test = data::load_matrix(paths.split("test")).matrix;
    s.standardizer = data::Standardizer::from_json(json::parse(io::read_text(standardizer_path(paths))));
    return s;
}

void save_teacher(const fs::path& path, const diffusion::TeacherModel& teacher, const data::Standardizer& standardizer,
                  std::uint64_t seed) {
    const auto& sch = teacher.schedule();
    json extra;
    extra["teacher"] = {{"n_fine", teacher.n_fine()},
                        {"schedule",
                         {{"kind", "vp-linear"},
                          {"beta_min", sch.beta_min},
                          {"beta_max", sch.beta_max},
                          {"horizon", sch.horizon}}},
                        {"parameterization", "eps"}};
    extra["standardizer"] = standardizer.to_json();
    nn::save_params(path, teacher.net(), seed, extra);
}

LoadedTeacher load_teacher(const fs::path& path) {
    nn::LoadedParams lp = nn::load_params(path);
    if (!lp.extra.contains("teacher")) throw IoError(path.string() + " is not a teacher checkpoint");
    try {
        const json& t = lp.extra.at("teacher");
        diffusion::ForwardSchedule sch;
        sch.beta_min = t.at("schedule").at("beta_min").get<double>();
        sch.beta_max = t.at("schedule").at("beta_max").get<double>();
        sch.horizon = t.at("schedule").at("horizon").get<double>();
        const auto n_fine = t.at("n_fine").get<std::size_t>();
        return {diffusion::TeacherModel(sch, std::move(lp.params), n_fine),
                data::Standardizer::from_json(lp.extra.at("standardizer"))};
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": malformed teacher header: " + e.what());
    }
}

void add_metrics(metrics::MetricReport& report, Dataset dataset, const Eigen::MatrixXd& real,
                 const Eigen::MatrixXd& gen, const data::Standardizer& standardizer, const EvalSection& eval,
                 const data::RBergomiSpec& rbergomi) {
    if (real.rows() != gen.rows()) throw std::invalid_argument("add_metrics: dimension mismatch");
    if (dataset == Dataset::mixture_1d) {
        report.add("w1", metrics::wasserstein1_mean(real, gen));
        const auto r = row_values(real, 0);
        const auto g = row_values(gen, 0);
        report.add("variance_score", metrics::variance_score(r, g));
        report.add("mass_negative", static_cast<double>((gen.row(0).array() < 0.0).count()) /
                                        static_cast<double>(gen.cols()));
        return;
    }
    if (dataset == Dataset::rbergomi) {
        const Eigen::MatrixXd zr = standardizer.apply(real);
        const Eigen::MatrixXd zg = standardizer.apply(gen);
        const metrics::PathLayout layout{rbergomi.n_obs, 2};
        report.add("marginal_hist", metrics::marginal_hist_loss(zr, zg, eval.bins));
        report.add("correlation", metrics::correlation_discrepancy(zr, zg, layout));
        report.add("autocorrelation",
                   metrics::autocorrelation_discrepancy(zr, zg, layout, std::min(eval.max_lag, rbergomi.n_obs - 1)));
        report.add("w1", metrics::wasserstein1_mean(zr, zg));
        return;
    }
    throw std::invalid_argument("add_metrics: no metric suite for this dataset");
}

Sampler teacher_sampler(const LoadedTeacher& teacher) {
    return {"teacher", [&teacher](std::size_t n, stoch::Rng& rng, std::uint64_t& nfe) {
                return Eigen::MatrixXd(teacher.standardizer.invert(diffusion::sample_teacher(teacher.model, n, rng, &nfe)));
            }};
}

Sampler student_sampler(const std::string& name, const distill::SigDegGenerator& gen,
                        const data::Standardizer& standardizer) {
    return {name, [&gen, &standardizer](std::size_t n, stoch::Rng& rng, std::uint64_t& nfe) {
                distill::InferenceResult res = distill::sample_inference(gen, n, rng);
                nfe += res.nfe;
                return Eigen::MatrixXd(standardizer.invert(res.states[0]));
            }};
}

json cmd_gen_data(const ExperimentConfig& cfg) {
    reject_test_sde(cfg, "gen-data");
    const RunPaths p{cfg.out_dir};
    Eigen::MatrixXd all;
    std::array<double, 3> fractions{};
    if (cfg.dataset == Dataset::mixture_1d) {
        stoch::Rng rng = stream(cfg, "data.mixture");
        all = data::sample_mixture(cfg.mixture, cfg.mixture.n_total, rng);
        fractions = cfg.mixture.fractions;
    } else {
        stoch::Rng rng = stream(cfg, "data.rbergomi");
        all = data::rbergomi_hybrid(cfg.rbergomi, cfg.rbergomi.n_paths, rng);
        fractions = cfg.rbergomi.fractions;
    }
    stoch::Rng split_rng = stream(cfg, "data.split");
    const data::Split split = data::split_dataset(static_cast<std::size_t>(all.cols()), fractions, split_rng);
    const Eigen::MatrixXd train = data::take_columns(all, split.train);
    const data::Standardizer standardizer = cfg.dataset == Dataset::rbergomi ? data::Standardizer::fit(train)
                                                                             : data::Standardizer::identity(all.rows());

    const json channels = cfg.dataset == Dataset::rbergomi ? json{"log_price", "log_variance"} : json{"x"};
    Manifest m = new_manifest(cfg, "gen-data");
    const std::vector<std::size_t>* idx[] = {&split.train, &split.val, &split.test};
    json counts;
    for (std::size_t i = 0; i < 3; ++i) {
        const json meta = {{"dataset", to_string(cfg.dataset)},
                           {"split", kSplitNames[i]},
                           {"seed", cfg.seed},
                           {"channels", channels},
                           {"standardizer", standardizer.to_json()}};
        data::save_matrix(p.split(kSplitNames[i]), i == 0 ? train : data::take_columns(all, *idx[i]), meta);
        m.add_output(p.root, p.split(kSplitNames[i]));
        counts[kSplitNames[i]] = idx[i]->size();
    }
    io::write_text(standardizer_path(p), standardizer.to_json().dump(2) + "\n");
    m.add_output(p.root, standardizer_path(p));
    m.info = {{"dim", all.rows()}, {"counts", counts}};
    m.write(p.data_dir() / "manifest.json");
    return m.info;
}

json cmd_train_teacher(const ExperimentConfig& cfg) {
    reject_test_sde(cfg, "train-teacher");
    const RunPaths p{cfg.out_dir};
    const DataSplits s = load_splits(p);
    nn::NetArch arch = cfg.teacher.arch;
    arch.d_in = arch.d_out = static_cast<int>(s.train.rows());
    stoch::Rng init_rng = stream(cfg, "teacher.init");
    diffusion::TeacherModel model(cfg.teacher.schedule, nn::init_params(arch, init_rng), cfg.teacher.n_fine);

    const diffusion::TrainCurve curve =
        diffusion::train_teacher(model, s.standardizer.apply(s.train), cfg.teacher.train, stream(cfg, "teacher.train"));
    stoch::Rng val_rng = stream(cfg, "teacher.val");
    const double val_loss = diffusion::dsm_loss(model, s.standardizer.apply(s.val), val_rng).loss;

    save_teacher(p.teacher(), model, s.standardizer, cfg.seed);
    const fs::path curve_path = p.teacher_dir() / "loss_curve.csv";
    write_loss_csv(curve_path, "step,loss", {curve.loss}, curve.step);

    Manifest m = new_manifest(cfg, "train-teacher");
    m.add_upstream(p.root, p.split("train"));
    m.add_upstream(p.root, standardizer_path(p));
    m.add_output(p.root, p.teacher());
    m.add_output(p.root, curve_path);
    m.info = {{"n_params", model.net().size()},
              {"initial_loss", curve.loss.front()},
              {"final_loss", curve.loss.back()},
              {"val_dsm_loss", val_loss}};
    m.write(p.teacher_dir() / "manifest.json");
    return m.info;
}

json cmd_distill(const ExperimentConfig& cfg) {
    reject_test_sde(cfg, "distill");
    const RunPaths p{cfg.out_dir};
    require(p.teacher(), "train-teacher");
    const LoadedTeacher t = load_teacher(p.teacher());
    if (t.model.n_fine() != cfg.teacher.n_fine)
        throw ConfigError("teacher checkpoint has " + std::to_string(t.model.n_fine()) +
                          " fine steps but teacher.n_fine is " + std::to_string(cfg.teacher.n_fine));
    const DataSplits s = load_splits(p);
    const Eigen::MatrixXd train_std = s.standardizer.apply(s.train);
    const std::string teacher_hash = io::file_hash(p.teacher());
    const auto& sch = t.model.schedule();
    const std::string schedule_hash = io::hex64(io::fnv1a64(
        json{{"beta_min", sch.beta_min}, {"beta_max", sch.beta_max}, {"horizon", sch.horizon}}.dump()));

    std::optional<diffusion::TrajectoryBank> bank;
    if (cfg.distill.base.pair_source == distill::PairSource::bank) {
        const std::size_t stride = cfg.teacher.n_fine / lcm_of_runs(cfg.distill.runs);
        if (stride == 0 || cfg.teacher.n_fine % lcm_of_runs(cfg.distill.runs) != 0)
            throw ConfigError("distill: the lcm of all n_coarse values must divide teacher.n_fine");
        stoch::Rng bank_rng = stream(cfg, "distill.bank");
        bank = diffusion::sample_backward_bank(t.model, cfg.distill.base.bank_paths, stride, bank_rng);
    }

    json summary = json::object();
    for (const auto& run : cfg.distill.runs) {
        const distill::DistillConfig dc = run_config(cfg, run);
        distill::DistillResult res = distill::train_distill(t.model, dc, train_std, stream(cfg, "distill.run", run.n_coarse, run.q),
                                                            bank ? &*bank : nullptr);
        const fs::path dir = p.student_dir(run);
        distill::save_generator(p.student(run), res.generator, cfg.seed,
                                {{"teacher_hash", teacher_hash},
                                 {"schedule_hash", schedule_hash},
                                 {"ratio", dc.ratio},
                                 {"q", run.q},
                                 {"standardizer", t.standardizer.to_json()}});
        std::vector<std::size_t> epochs(res.train_loss.size());
        std::iota(epochs.begin(), epochs.end(), std::size_t{1});
        write_loss_csv(dir / "loss_curve.csv", "epoch,train_loss,val_loss", {res.train_loss, res.val_loss}, epochs);

        Manifest m = new_manifest(cfg, "distill");
        m.add_upstream(p.root, p.teacher());
        m.add_upstream(p.root, p.split("train"));
        m.add_output(p.root, p.student(run));
        m.add_output(p.root, dir / "loss_curve.csv");
        m.info = {{"run", run.name()},
                  {"n_coarse", run.n_coarse},
                  {"q", run.q},
                  {"epochs", dc.epochs},
                  {"ratio", dc.ratio},
                  {"pair_source", distill::to_string(dc.pair_source)},
                  {"teacher_hash", teacher_hash},
                  {"initial_val_loss", res.initial_val_loss},
                  {"best_val_loss", res.best_epoch == 0 ? res.initial_val_loss : res.val_loss.at(res.best_epoch - 1)},
                  {"best_epoch", res.best_epoch}};
        if (bank) m.info["bank_paths"] = bank->n_paths();
        m.write(dir / "manifest.json");
        summary[run.name()] = m.info;
    }
    return summary;
}

json cmd_sample(const ExperimentConfig& cfg, const std::string& model, std::size_t n) {
    reject_test_sde(cfg, "sample");
    const RunPaths p{cfg.out_dir};
    require(p.teacher(), "train-teacher");
    const LoadedTeacher t = load_teacher(p.teacher());
    const DataSplits s = load_splits(p);
    if (n == 0) n = cfg.eval.n_samples ? cfg.eval.n_samples : static_cast<std::size_t>(s.test.cols());

    std::vector<distill::SigDegGenerator> gens;
    std::vector<std::string> names;
    for (const auto& run : cfg.distill.runs) {
        if (!model.empty() && model != run.name()) continue;
        require(p.student(run), "distill");
        gens.push_back(distill::load_generator(p.student(run)));
        names.push_back(run.name());
    }
    std::vector<Sampler> samplers;
    if (model.empty() || model == "teacher") samplers.push_back(teacher_sampler(t));
    for (std::size_t i = 0; i < gens.size(); ++i) samplers.push_back(student_sampler(names[i], gens[i], s.standardizer));
    if (samplers.empty()) throw ConfigError("sample: unknown model '" + model + "'");

    Manifest m = new_manifest(cfg, "sample");
    m.add_upstream(p.root, p.teacher());
    for (const auto& run : cfg.distill.runs)
        if (fs::exists(p.student(run))) m.add_upstream(p.root, p.student(run));
    json summary = json::object();
    for (const auto& smp : samplers) {
        stoch::Rng rng = stream(cfg, "sample." + smp.name);
        std::uint64_t nfe = 0;
        const Eigen::MatrixXd x = smp.draw(n, rng, nfe);
        const fs::path out = p.samples_dir() / (smp.name + ".bin");
        data::save_matrix(out, x, {{"model", smp.name}, {"nfe_per_sample", nfe / n}});
        m.add_output(p.root, out);
        summary[smp.name] = {{"n", n}, {"nfe_per_sample", nfe / n}};
    }
    m.info = summary;
    m.write(p.samples_dir() / "manifest.json");
    return summary;
}

json cmd_evaluate(const ExperimentConfig& cfg) {
    reject_test_sde(cfg, "evaluate");
    const RunPaths p{cfg.out_dir};
    require(p.teacher(), "train-teacher");
    for (const auto& run : cfg.distill.runs) require(p.student(run), "distill");
    const LoadedTeacher t = load_teacher(p.teacher());
    const DataSplits s = load_splits(p);
    const std::size_t n = cfg.eval.n_samples ? cfg.eval.n_samples : static_cast<std::size_t>(s.test.cols());

    std::vector<distill::SigDegGenerator> gens;
    for (const auto& run : cfg.distill.runs) gens.push_back(distill::load_generator(p.student(run)));
    std::vector<Sampler> samplers;
    if (cfg.eval.evaluate_teacher) samplers.push_back(teacher_sampler(t));
    for (std::size_t i = 0; i < gens.size(); ++i)
        samplers.push_back(student_sampler(cfg.distill.runs[i].name(), gens[i], s.standardizer));

    json reports = json::array();
    std::string csv;
    std::map<std::string, std::pair<std::uint64_t, double>> cost;  // nfe per sample, mean seconds
    for (std::size_t mi = 0; mi < samplers.size(); ++mi) {
        const Sampler& smp = samplers[mi];
        metrics::MetricReport report(smp.name);
        std::uint64_t nfe = 0;
        for (std::size_t r = 0; r < cfg.eval.repeats; ++r) {
            stoch::Rng rng = stream(cfg, "eval.sample", mi, r);
            const auto t0 = std::chrono::steady_clock::now();
            const Eigen::MatrixXd gen = smp.draw(n, rng, nfe);
            report.add_timing("sample", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            add_metrics(report, cfg.dataset, s.test, gen, s.standardizer, cfg.eval, cfg.rbergomi);
        }
        const std::uint64_t per_sample = nfe / (n * cfg.eval.repeats);
        report.set_count("nfe_per_sample", per_sample);
        report.set_count("n_samples", n);
        cost[smp.name] = {per_sample, report.timing("sample").mean};
        reports.push_back(report.to_json());
        csv += report.to_csv(mi == 0);
    }

    json comparisons = json::object();
    if (cost.count("teacher"))
        for (const auto& [name, c] : cost) {
            if (name == "teacher") continue;
            comparisons[name] = {{"nfe_ratio", metrics::nfe_ratio(cost["teacher"].first, c.first)},
                                 {"speedup", cost["teacher"].second / c.second}};
        }

    const json out = {{"dataset", to_string(cfg.dataset)},
                      {"n_samples", n},
                      {"n_real", s.test.cols()},
                      {"repeats", cfg.eval.repeats},
                      {"reports", reports},
                      {"comparisons", comparisons}};
    io::write_text(p.eval_dir() / "report.json", out.dump(2) + "\n");
    io::write_text(p.eval_dir() / "report.csv", csv);

    Manifest m = new_manifest(cfg, "evaluate");
    m.add_upstream(p.root, p.split("test"));
    m.add_upstream(p.root, p.teacher());
    for (const auto& run : cfg.distill.runs) m.add_upstream(p.root, p.student(run));
    m.add_output(p.root, p.eval_dir() / "report.json");
    m.add_output(p.root, p.eval_dir() / "report.csv");
    m.write(p.eval_dir() / "manifest.json");
    return out;
}

json cmd_convergence(const ExperimentConfig& cfg) {
    const RunPaths p{cfg.out_dir};
    const auto& c = cfg.convergence;
    const taylor::SdeSpec sde = taylor::make_linear_test_sde(c.a, c.sigma0, c.b);
    const auto results = taylor::estimate_strong_orders(sde, c.options, stream(cfg, "convergence"));

    std::ostringstream csv;
    csv.precision(17);
    csv << "scheme,resolution,step_size,mean_abs_error,std_error\n";
    json slopes = json::object();
    for (const auto& r : results) {
        for (std::size_t i = 0; i < r.step_sizes.size(); ++i)
            csv << taylor::scheme_name(r.scheme) << "," << c.options.resolutions[i] << "," << r.step_sizes[i] << ","
                << r.mean_abs_error[i] << "," << r.std_error[i] << "\n";
        slopes[taylor::scheme_name(r.scheme)] = r.slope;
    }
    const fs::path csv_path = p.convergence_dir() / "order.csv";
    io::write_text(csv_path, csv.str());
    const json summary = {{"slopes", slopes}, {"n_paths", c.options.n_paths}, {"reference_steps", c.options.reference_steps}};
    io::write_text(p.convergence_dir() / "order.json", summary.dump(2) + "\n");

    Manifest m = new_manifest(cfg, "convergence");
    m.add_output(p.root, csv_path);
    m.add_output(p.root, p.convergence_dir() / "order.json");
    m.info = summary;
    m.write(p.convergence_dir() / "manifest.json");
    return summary;
}

}  // namespace sigdeg::cli
