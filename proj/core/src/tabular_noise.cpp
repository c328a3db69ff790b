#include "judgecal/tabular_noise.hpp"

#include <algorithm>
#include <cmath>

#include "judgecal/errors.hpp"
#include "judgecal/text.hpp"

namespace judgecal {

namespace {

double parse_feature(const Row& row, std::size_t column, const std::string& name) {
    const auto& cell = row[column];
    if (!cell) throw SchemaError("feature \"" + name + "\" is missing in a row selected for perturbation");
    const auto v = parse_number(*cell);
    if (!v) throw SchemaError("feature \"" + name + "\" holds non-numeric value \"" + *cell + "\"");
    if (!std::isfinite(*v)) throw NonFiniteValue("feature \"" + name + "\" is not finite");
    return *v;
}

} // namespace

std::string noise_kind_name(NoiseKind k) {
    return k == NoiseKind::uncorrelated ? "uncorrelated" : "correlated";
}

void SnrSchedule::validate() const {
    if (levels_db.empty()) throw ConfigError("SNR schedule must be non-empty");
    for (double v : levels_db)
        if (!std::isfinite(v)) throw NonFiniteValue("SNR schedule contains a non-finite level");
    for (std::size_t i = 1; i < levels_db.size(); ++i)
        if (!(levels_db[i] < levels_db[i - 1]))
            throw ConfigError("SNR schedule must be strictly decreasing (mild to strong noise)");
}

double snr_to_alpha(double snr_db) {
    if (!std::isfinite(snr_db)) throw NonFiniteValue("SNR value is not finite");
    return std::pow(10.0, -snr_db / 10.0);
}

SignalStats estimate_signal_stats(const Table& table,
                                  const std::vector<std::size_t>& train_rows,
                                  const std::vector<FeatureDescriptor>& selected) {
    if (train_rows.size() < 2)
        throw InsufficientRows("covariance estimation needs at least 2 rows, got " +
                               std::to_string(train_rows.size()));
    if (selected.empty()) throw NoNumericFeatures("no features selected for noise estimation");
    for (const auto& d : selected)
        if (d.kind != FeatureKind::numeric)
            throw ConfigError("feature \"" + d.name + "\" is not numeric");

    const std::size_t d = selected.size();
    const std::size_t n = train_rows.size();
    SignalStats stats;
    stats.n_rows_used = n;
    std::vector<std::vector<double>> cols(d, std::vector<double>(n));
    for (std::size_t j = 0; j < d; ++j) {
        stats.feature_names.push_back(selected[j].name);
        stats.feature_columns.push_back(selected[j].column);
        for (std::size_t i = 0; i < n; ++i)
            cols[j][i] = parse_feature(table.rows[train_rows[i]], selected[j].column, selected[j].name);
    }

    std::vector<double> means(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        for (double v : cols[j]) means[j] += v;
        means[j] /= static_cast<double>(n);
    }

    stats.covariance = Matrix(d, d);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a; b < d; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                acc += (cols[a][i] - means[a]) * (cols[b][i] - means[b]);
            const double c = acc / static_cast<double>(n - 1);
            if (!std::isfinite(c)) throw NonFiniteValue("covariance overflow between \"" + stats.feature_names[a] +
                                                        "\" and \"" + stats.feature_names[b] + "\"");
            stats.covariance(a, b) = c;
            stats.covariance(b, a) = c;
        }
    }

    stats.variances.resize(d);
    for (std::size_t j = 0; j < d; ++j) stats.variances[j] = stats.covariance(j, j);

    stats.correlation = Matrix(d, d);
    for (std::size_t a = 0; a < d; ++a) {
        stats.correlation(a, a) = 1.0;
        for (std::size_t b = a + 1; b < d; ++b) {
            double r = 0.0;
            if (stats.variances[a] > 0.0 && stats.variances[b] > 0.0) {
                r = stats.covariance(a, b) / std::sqrt(stats.variances[a] * stats.variances[b]);
                r = std::clamp(r, -1.0, 1.0);
            }
            stats.correlation(a, b) = r;
            stats.correlation(b, a) = r;
        }
    }
    return stats;
}

GaussianNoiseSampler::GaussianNoiseSampler(const SignalStats& stats, NoiseKind kind) : kind_(kind) {
    const std::size_t d = stats.variances.size();
    std_devs_.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        if (stats.variances[j] < 0.0) throw NonFiniteValue("negative variance in signal statistics");
        std_devs_[j] = std::sqrt(stats.variances[j]);
        if (stats.variances[j] > 0.0) active_.push_back(j);
    }
    if (kind_ == NoiseKind::uncorrelated || active_.empty()) return;

    const std::size_t m = active_.size();
    Matrix sigma(m, m);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
            sigma(a, b) = stats.covariance(active_[a], active_[b]);

    // Estimated covariances can be singular (collinear features); retry with
    // a growing diagonal jitter before giving up.
    if (auto l = cholesky(sigma)) {
        chol_active_ = *l;
        return;
    }
    double jitter = 1e-10 * sigma.trace() / static_cast<double>(m);
    for (int attempt = 0; attempt < 5; ++attempt) {
        Matrix bumped = sigma;
        for (std::size_t i = 0; i < m; ++i) bumped(i, i) += jitter;
        if (auto l = cholesky(bumped)) {
            chol_active_ = *l;
            return;
        }
        jitter *= 10.0;
    }
    throw FactorizationFailure("signal covariance is not factorizable even with diagonal jitter");
}

std::vector<double> GaussianNoiseSampler::sample(double alpha, RngStream& rng) const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("noise scale alpha must be finite and >= 0");
    const std::size_t d = std_devs_.size();
    std::vector<double> eps(d, 0.0);
    if (alpha == 0.0) return eps;
    const double root_alpha = std::sqrt(alpha);
    if (kind_ == NoiseKind::uncorrelated) {
        for (std::size_t j = 0; j < d; ++j) eps[j] = root_alpha * std_devs_[j] * rng.normal();
        return eps;
    }
    const std::size_t m = active_.size();
    std::vector<double> z(m);
    for (std::size_t i = 0; i < m; ++i) z[i] = rng.normal();
    for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k <= i; ++k) acc += chol_active_(i, k) * z[k];
        eps[active_[i]] = root_alpha * acc;
    }
    return eps;
}

std::vector<double> sample_noise(const SignalStats& stats,
                                 NoiseKind kind,
                                 double alpha,
                                 RngStream& rng) {
    return GaussianNoiseSampler(stats, kind).sample(alpha, rng);
}

Row perturb_row(const Row& row,
                const SignalStats& stats,
                const GaussianNoiseSampler& sampler,
                double alpha,
                RngStream& rng) {
    Row out = row;
    if (alpha == 0.0) return out;
    const auto eps = sampler.sample(alpha, rng);
    for (std::size_t j = 0; j < stats.feature_columns.size(); ++j) {
        if (stats.variances[j] == 0.0) continue; // constant feature, cell kept verbatim
        const double x = parse_feature(row, stats.feature_columns[j], stats.feature_names[j]);
        out[stats.feature_columns[j]] = format_double(x + eps[j]);
    }
    return out;
}

Row perturb_row(const Row& row,
                const SignalStats& stats,
                NoiseKind kind,
                double alpha,
                RngStream& rng) {
    return perturb_row(row, stats, GaussianNoiseSampler(stats, kind), alpha, rng);
}

void to_json(nlohmann::json& j, const SignalStats& s) {
    auto matrix_rows = [](const Matrix& m) {
        std::vector<std::vector<double>> rows(m.rows(), std::vector<double>(m.cols()));
        for (std::size_t r = 0; r < m.rows(); ++r)
            for (std::size_t c = 0; c < m.cols(); ++c) rows[r][c] = m(r, c);
        return rows;
    };
    j = nlohmann::json{{"feature_names", s.feature_names},
                       {"variances", s.variances},
                       {"correlation", matrix_rows(s.correlation)},
                       {"covariance", matrix_rows(s.covariance)},
                       {"n_rows_used", s.n_rows_used}};
}

} // namespace judgecal
