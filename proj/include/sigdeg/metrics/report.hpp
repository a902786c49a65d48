#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace sigdeg::metrics {

struct Summary {
    double mean = 0.0;
    double std = 0.0;  ///< sample standard deviation; 0 for one repeat
};

Summary summarize(const std::vector<double>& values);

/// Metric values per evaluation repeat plus cost figures for one sampler.
class MetricReport {
public:
    explicit MetricReport(std::string label = {}) : label_(std::move(label)) {}

    const std::string& label() const { return label_; }

    /// Appends one repeat's value; throws std::invalid_argument on a non-finite value.
    void add(const std::string& metric, double value);
    const std::map<std::string, std::vector<double>>& values() const { return values_; }
    Summary summary(const std::string& metric) const;
    bool has(const std::string& metric) const { return values_.count(metric) != 0; }

    void set_count(const std::string& name, std::uint64_t value) { counts_[name] = value; }
    const std::map<std::string, std::uint64_t>& counts() const { return counts_; }

    /// Wall-clock seconds of one timed repeat.
    void add_timing(const std::string& name, double seconds);
    Summary timing(const std::string& name) const;

    nlohmann::json to_json() const;
    /// Header "label,metric,repeat,value"; timings appear as metric "time:<name>".
    std::string to_csv(bool with_header = true) const;

private:
    std::string label_;
    std::map<std::string, std::vector<double>> values_;
    std::map<std::string, std::uint64_t> counts_;
    std::map<std::string, std::vector<double>> timings_;
};

/// Runs `fn` `repeats` times and returns the wall-clock seconds of each run.
std::vector<double> time_repeats(const std::function<void()>& fn, std::size_t repeats);

/// NFE of a baseline sampler divided by that of a candidate (both per sample).
double nfe_ratio(std::uint64_t baseline_nfe, std::uint64_t candidate_nfe);

}  // namespace sigdeg::metrics
