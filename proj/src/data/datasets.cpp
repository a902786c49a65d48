#include "sigdeg/data/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sigdeg::data {

void MixtureSpec::validate() const {
    if (means.empty() || means.size() != weights.size())
        throw std::invalid_argument("MixtureSpec: means and weights must be nonempty and of equal length");
    if (!(stddev > 0.0)) throw std::invalid_argument("MixtureSpec: stddev must be positive");
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("MixtureSpec: negative weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("MixtureSpec: weights must sum to 1");
}

Eigen::MatrixXd sample_mixture(const MixtureSpec& spec, std::size_t n, stoch::Rng& rng) {
    spec.validate();
    if (n == 0) throw std::invalid_argument("sample_mixture: n must be >= 1");
    Eigen::MatrixXd x(1, static_cast<Eigen::Index>(n));
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double u = rng.uniform();
        std::size_t c = 0;
        double cum = spec.weights[0];
        while (u > cum && c + 1 < spec.weights.size()) cum += spec.weights[++c];
        x(0, j) = spec.means[c] + spec.stddev * rng.normal();
    }
    return x;
}

Split split_dataset(std::size_t n, const std::array<double, 3>& fractions, stoch::Rng& rng) {
    double total = 0.0;
    for (double f : fractions) {
        if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("split_dataset: fractions must lie in [0, 1]");
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("split_dataset: fractions must sum to 1");
    const auto n_val = static_cast<std::size_t>(std::llround(fractions[1] * static_cast<double>(n)));
    const auto n_test = static_cast<std::size_t>(std::llround(fractions[2] * static_cast<double>(n)));
    if (n_val + n_test > n) throw std::invalid_argument("split_dataset: fractions exceed the data size");

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        const auto k = std::min(i - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(i)));
        std::swap(perm[i - 1], perm[k]);
    }
    Split s;
    const std::size_t n_train = n - n_val - n_test;
    s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.val.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
    return s;
}

Eigen::MatrixXd take_columns(const Eigen::MatrixXd& data, std::span<const std::size_t> idx) {
    Eigen::MatrixXd out(data.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) {
        if (idx[j] >= static_cast<std::size_t>(data.cols())) throw std::invalid_argument("take_columns: index out of range");
        out.col(static_cast<Eigen::Index>(j)) = data.col(static_cast<Eigen::Index>(idx[j]));
    }
    return out;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& data) {
    if (data.cols() < 2) throw std::invalid_argument("Standardizer: need at least two samples");
    Standardizer s;
    s.mean = data.rowwise().mean();
    s.scale = ((data.colwise() - s.mean).array().square().rowwise().sum() / static_cast<double>(data.cols() - 1)).sqrt();
    for (Eigen::Index i = 0; i < s.scale.size(); ++i)
        if (!(s.scale[i] > 0.0)) s.scale[i] = 1.0;
    return s;
}

Standardizer Standardizer::identity(Eigen::Index d) {
    return {Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d)};
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
    if (x.rows() != mean.size()) throw std::invalid_argument("Standardizer: dimension mismatch");
    return ((x.colwise() - mean).array().colwise() / scale.array()).matrix();
}

Eigen::MatrixXd Standardizer::invert(const Eigen::MatrixXd& z) const {
    if (z.rows() != mean.size()) throw std::invalid_argument("Standardizer: dimension mismatch");
    return ((z.array().colwise() * scale.array()).matrix().colwise() + mean);
}

nlohmann::json Standardizer::to_json() const {
    return {{"mean", std::vector<double>(mean.data(), mean.data() + mean.size())},
            {"scale", std::vector<double>(scale.data(), scale.data() + scale.size())}};
}

Standardizer Standardizer::from_json(const nlohmann::json& j) {
    const auto m = j.at("mean").get<std::vector<double>>();
    const auto s = j.at("scale").get<std::vector<double>>();
    if (m.size() != s.size()) throw std::invalid_argument("Standardizer: mean/scale length mismatch");
    Standardizer out;
    out.mean = Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
    out.scale = Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
    return out;
}

}  // namespace sigdeg::data
