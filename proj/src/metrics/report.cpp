#include "sigdeg/metrics/report.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sigdeg::metrics {

Summary summarize(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("summarize: no values");
    Summary s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

void MetricReport::add(const std::string& metric, double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("MetricReport: non-finite value for " + metric);
    values_[metric].push_back(value);
}

Summary MetricReport::summary(const std::string& metric) const {
    auto it = values_.find(metric);
    if (it == values_.end()) throw std::invalid_argument("MetricReport: no metric named " + metric);
    return summarize(it->second);
}

void MetricReport::add_timing(const std::string& name, double seconds) {
    if (!std::isfinite(seconds) || seconds < 0.0) throw std::invalid_argument("MetricReport: bad timing for " + name);
    timings_[name].push_back(seconds);
}

Summary MetricReport::timing(const std::string& name) const {
    auto it = timings_.find(name);
    if (it == timings_.end()) throw std::invalid_argument("MetricReport: no timing named " + name);
    return summarize(it->second);
}

nlohmann::json MetricReport::to_json() const {
    nlohmann::json j;
    j["label"] = label_;
    j["metrics"] = nlohmann::json::object();
    for (const auto& [name, vals] : values_) {
        const Summary s = summarize(vals);
        j["metrics"][name] = {{"mean", s.mean}, {"std", s.std}, {"repeats", vals.size()}, {"values", vals}};
    }
    j["counts"] = counts_;
    j["timings"] = nlohmann::json::object();
    for (const auto& [name, vals] : timings_) {
        const Summary s = summarize(vals);
        j["timings"][name] = {{"mean_seconds", s.mean}, {"std_seconds", s.std}, {"repeats", vals.size()}, {"values", vals}};
    }
    return j;
}

std::string MetricReport::to_csv(bool with_header) const {
    std::ostringstream os;
    os.precision(17);
    if (with_header) os << "label,metric,repeat,value\n";
    for (const auto& [name, vals] : values_)
        for (std::size_t i = 0; i < vals.size(); ++i) os << label_ << ',' << name << ',' << i << ',' << vals[i] << '\n';
    for (const auto& [name, vals] : timings_)
        for (std::size_t i = 0; i < vals.size(); ++i) os << label_ << ",time:" << name << ',' << i << ',' << vals[i] << '\n';
    for (const auto& [name, v] : counts_) os << label_ << ",count:" << name << ",0," << v << '\n';
    return os.str();
}

std::vector<double> time_repeats(const std::function<void()>& fn, std::size_t repeats) {
    std::vector<double> out;
    out.reserve(repeats);
    for (std::size_t r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        out.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return out;
}

double nfe_ratio(std::uint64_t baseline_nfe, std::uint64_t candidate_nfe) {
    if (candidate_nfe == 0) throw std::invalid_argument("nfe_ratio: candidate NFE is zero");
    return static_cast<double>(baseline_nfe) / static_cast<double>(candidate_nfe);
}

}  // namespace sigdeg::metrics
