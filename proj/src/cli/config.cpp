#include "sigdeg/cli/config.hpp"

#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "sigdeg/errors.hpp"
#include "sigdeg/io.hpp"

namespace sigdeg::cli {

using nlohmann::json;

namespace {

json scalar_to_json(const YAML::Node& node) {
    if (node.Tag() == "!") return node.Scalar();
    const std::string& s = node.Scalar();
    if (s == "true" || s == "True" || s == "TRUE") return true;
    if (s == "false" || s == "False" || s == "FALSE") return false;
    if (s == "~" || s == "null") return nullptr;
    std::int64_t i = 0;
    if (YAML::convert<std::int64_t>::decode(node, i)) return i;
    double d = 0.0;
    if (YAML::convert<double>::decode(node, d)) return d;
    return s;
}

json yaml_to_json(const YAML::Node& node) {
    switch (node.Type()) {
        case YAML::NodeType::Null:
        case YAML::NodeType::Undefined:
            return nullptr;
        case YAML::NodeType::Scalar:
            return scalar_to_json(node);
        case YAML::NodeType::Sequence: {
            json arr = json::array();
            for (const auto& item : node) arr.push_back(yaml_to_json(item));
            return arr;
        }
        case YAML::NodeType::Map: {
            json obj = json::object();
            for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
            return obj;
        }
    }
    return nullptr;
}

json parse_yaml(const std::string& text, const std::string& what) {
    try {
        return yaml_to_json(YAML::Load(text));
    } catch (const YAML::Exception& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

void apply_override(json& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must be KEY=VALUE: " + assignment);
    const std::string key = assignment.substr(0, eq);
    const json value = parse_yaml(assignment.substr(eq + 1), "override " + key);
    json* node = &root;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("malformed override key: " + key);
        if (!node->is_object()) throw ConfigError("override " + key + ": parent is not a section");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

// Reads keys out of one section and rejects the ones nobody asked for.
class Section {
public:
    Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_null() && !node_.is_object()) throw ConfigError(path_ + " must be a section");
    }
    ~Section() noexcept(false) {
        if (std::uncaught_exceptions() > 0 || node_.is_null()) return;
        for (const auto& [k, v] : node_.items())
            if (!used_.count(k)) throw ConfigError("unknown key " + where(k));
    }
    Section(const Section&) = delete;
    Section& operator=(const Section&) = delete;

    bool has(const std::string& key) const { return node_.is_object() && node_.contains(key); }

    template <class T>
    void read(const std::string& key, T& out) {
        used_.insert(key);
        if (!has(key) || node_.at(key).is_null()) return;
        try {
            out = node_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError("bad value for " + where(key) + ": " + node_.at(key).dump());
        }
    }

    void read_size(const std::string& key, std::size_t& out) {
        used_.insert(key);
        if (!has(key)) return;
        const json& v = node_.at(key);
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
            throw ConfigError(where(key) + " must be a non-negative integer, got " + v.dump());
        out = v.get<std::size_t>();
    }

    void read_int(const std::string& key, int& out) {
        std::size_t v = static_cast<std::size_t>(out);
        read_size(key, v);
        out = static_cast<int>(v);
    }

    void read_double(const std::string& key, double& out) {
        used_.insert(key);
        if (!has(key)) return;
        const json& v = node_.at(key);
        if (!v.is_number()) throw ConfigError(where(key) + " must be a number, got " + v.dump());
        out = v.get<double>();
    }

    const json& child(const std::string& key) {
        used_.insert(key);
        static const json null_node;
        return has(key) ? node_.at(key) : null_node;
    }

    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> used_;
};

void read_fractions(Section& s, std::array<double, 3>& out) {
    const json& node = s.child("fractions");
    if (node.is_null()) return;
    if (!node.is_array() || node.size() != 3) throw ConfigError(s.where("fractions") + " must list 3 numbers");
    for (std::size_t i = 0; i < 3; ++i) {
        if (!node[i].is_number()) throw ConfigError(s.where("fractions") + " must list 3 numbers");
        out[i] = node[i].get<double>();
    }
}

void read_arch(const json& node, const std::string& path, nn::NetArch& arch) {
    Section s(node, path);
    s.read_int("hidden", arch.hidden);
    s.read_int("time_embed_dim", arch.time_embed_dim);
    s.read_int("n_blocks", arch.n_blocks);
    s.read_double("freq_base", arch.freq_base);
}

void read_mixture(const json& node, data::MixtureSpec& m) {
    Section s(node, "data.mixture");
    s.read("means", m.means);
    s.read_double("stddev", m.stddev);
    s.read("weights", m.weights);
    s.read_size("n_total", m.n_total);
    read_fractions(s, m.fractions);
}

void read_rbergomi(const json& node, data::RBergomiSpec& r) {
    Section s(node, "data.rbergomi");
    s.read_double("xi", r.xi);
    s.read_double("eta", r.eta);
    s.read_double("rho", r.rho);
    s.read_double("a", r.a);
    s.read_double("horizon", r.horizon);
    s.read_double("s0", r.s0);
    s.read_size("n_obs", r.n_obs);
    s.read_size("steps_per_obs", r.steps_per_obs);
    s.read_size("n_paths", r.n_paths);
    read_fractions(s, r.fractions);
}

void read_teacher(const json& node, TeacherSection& t) {
    Section s(node, "teacher");
    s.read_size("n_fine", t.n_fine);
    s.read_double("beta_min", t.schedule.beta_min);
    s.read_double("beta_max", t.schedule.beta_max);
    s.read_double("horizon", t.schedule.horizon);
    read_arch(s.child("arch"), "teacher.arch", t.arch);
    s.read_size("steps", t.train.steps);
    s.read_size("batch_size", t.train.batch_size);
    s.read_double("lr", t.train.lr);
    s.read("cosine", t.train.cosine);
    s.read_double("ema_decay", t.train.ema_decay);
    s.read_size("log_every", t.train.log_every);
}

void read_distill(const json& node, DistillSection& d) {
    Section s(node, "distill");
    const json& runs = s.child("runs");
    if (!runs.is_null()) {
        if (!runs.is_array() || runs.empty()) throw ConfigError("distill.runs must be a non-empty list");
        d.runs.clear();
        for (std::size_t i = 0; i < runs.size(); ++i) {
            DistillRun run;
            Section r(runs[i], "distill.runs[" + std::to_string(i) + "]");
            r.read_size("n_coarse", run.n_coarse);
            r.read_size("q", run.q);
            r.read_size("epochs", run.epochs);
            d.runs.push_back(run);
        }
    }
    auto& b = d.base;
    s.read_size("batch_size", b.batch_size);
    s.read_double("lr", b.lr);
    s.read("cosine", b.cosine);
    s.read_size("epochs", b.epochs);
    s.read_size("steps_per_epoch", b.steps_per_epoch);
    s.read("standardize_ps", b.standardize_ps);
    std::string source = distill::to_string(b.pair_source);
    s.read("pair_source", source);
    try {
        b.pair_source = distill::pair_source_from_string(source);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("distill.pair_source: ") + e.what());
    }
    s.read_size("bank_paths", b.bank_paths);
    s.read_double("val_fraction", b.val_fraction);
    s.read_size("val_pairs", b.val_pairs);
    read_arch(s.child("arch"), "distill.arch", b.arch);
}

void read_eval(const json& node, EvalSection& e) {
    Section s(node, "eval");
    s.read_size("repeats", e.repeats);
    s.read_size("n_samples", e.n_samples);
    s.read_size("bins", e.bins);
    s.read_size("max_lag", e.max_lag);
    s.read("evaluate_teacher", e.evaluate_teacher);
}

void read_convergence(const json& node, ConvergenceSection& c) {
    Section s(node, "convergence");
    s.read_double("a", c.a);
    s.read_double("sigma0", c.sigma0);
    s.read_double("b", c.b);
    s.read("resolutions", c.options.resolutions);
    s.read_size("n_paths", c.options.n_paths);
    s.read_size("reference_steps", c.options.reference_steps);
    s.read_double("t_end", c.options.t_end);
    double y0 = c.options.y0[0];
    s.read_double("y0", y0);
    c.options.y0 = Eigen::VectorXd::Constant(1, y0);
}

}  // namespace

Dataset dataset_from_string(const std::string& s) {
    if (s == "1dn") return Dataset::mixture_1d;
    if (s == "rbergomi") return Dataset::rbergomi;
    if (s == "test-sde") return Dataset::test_sde;
    throw ConfigError("unknown dataset '" + s + "' (expected 1dn, rbergomi or test-sde)");
}

std::string to_string(Dataset d) {
    switch (d) {
        case Dataset::mixture_1d: return "1dn";
        case Dataset::rbergomi: return "rbergomi";
        case Dataset::test_sde: return "test-sde";
    }
    return "?";
}

void ExperimentConfig::validate() const {
    auto wrap = [](auto&& fn, const std::string& what) {
        try {
            fn();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(what + ": " + e.what());
        }
    };
    if (dataset == Dataset::mixture_1d) wrap([&] { mixture.validate(); }, "data.mixture");
    if (dataset == Dataset::rbergomi) wrap([&] { rbergomi.validate(); }, "data.rbergomi");
    if (dataset == Dataset::test_sde) {
        if (convergence.options.resolutions.size() < 3) throw ConfigError("convergence.resolutions needs >= 3 entries");
        for (auto r : convergence.options.resolutions)
            if (r == 0 || convergence.options.reference_steps % r != 0)
                throw ConfigError("convergence.reference_steps must be a multiple of every resolution");
        if (convergence.options.n_paths == 0) throw ConfigError("convergence.n_paths must be positive");
        return;
    }
    if (teacher.n_fine == 0) throw ConfigError("teacher.n_fine must be positive");
    if (teacher.schedule.beta_min <= 0.0 || teacher.schedule.beta_max < teacher.schedule.beta_min ||
        teacher.schedule.horizon <= 0.0)
        throw ConfigError("teacher: need 0 < beta_min <= beta_max and horizon > 0");
    if (teacher.train.steps == 0 || teacher.train.batch_size == 0 || !(teacher.train.lr > 0.0))
        throw ConfigError("teacher: steps, batch_size and lr must be positive");
    if (teacher.train.ema_decay < 0.0 || teacher.train.ema_decay >= 1.0)
        throw ConfigError("teacher.ema_decay must lie in [0, 1)");
    for (const auto& run : distill.runs) {
        if (run.n_coarse == 0 || teacher.n_fine % run.n_coarse != 0)
            throw ConfigError("distill run " + run.name() + ": n_coarse must divide teacher.n_fine (" +
                              std::to_string(teacher.n_fine) + ")");
        distill::DistillConfig cfg = distill.base;
        cfg.n_coarse = run.n_coarse;
        cfg.q = run.q;
        cfg.ratio = teacher.n_fine / run.n_coarse;
        if (run.epochs) cfg.epochs = run.epochs;
        wrap([&] { cfg.validate(); }, "distill run " + run.name());
    }
    if (eval.repeats == 0 || eval.bins == 0) throw ConfigError("eval.repeats and eval.bins must be positive");
}

ExperimentConfig parse_config(const std::string& yaml_text, const std::vector<std::string>& overrides) {
    json root = parse_yaml(yaml_text, "config");
    if (root.is_null()) root = json::object();
    if (!root.is_object()) throw ConfigError("config must be a mapping of sections");
    for (const auto& o : overrides) apply_override(root, o);

    ExperimentConfig cfg;
    {
        Section top(root, "");
        std::string dataset = "1dn";
        top.read("dataset", dataset);
        cfg.dataset = dataset_from_string(dataset);
        top.read("seed", cfg.seed);
        std::string out = cfg.out_dir.string();
        top.read("out_dir", out);
        cfg.out_dir = out;
        {
            Section data(top.child("data"), "data");
            read_mixture(data.child("mixture"), cfg.mixture);
            read_rbergomi(data.child("rbergomi"), cfg.rbergomi);
        }
        read_teacher(top.child("teacher"), cfg.teacher);
        read_distill(top.child("distill"), cfg.distill);
        read_eval(top.child("eval"), cfg.eval);
        read_convergence(top.child("convergence"), cfg.convergence);
    }
    cfg.snapshot = root;
    cfg.snapshot["dataset"] = to_string(cfg.dataset);
    cfg.snapshot["seed"] = cfg.seed;
    cfg.snapshot["out_dir"] = cfg.out_dir.string();
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::string text;
    try {
        text = io::read_text(path);
    } catch (const IoError& e) {
        throw ConfigError(std::string("cannot read config: ") + e.what());
    }
    return parse_config(text, overrides);
}

}  // namespace sigdeg::cli
