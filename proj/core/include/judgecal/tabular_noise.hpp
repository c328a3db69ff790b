#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "judgecal/dataset.hpp"
#include "judgecal/matrix.hpp"
#include "judgecal/rng.hpp"

namespace judgecal {

enum class NoiseKind { uncorrelated, correlated };

std::string noise_kind_name(NoiseKind k);

// Clean-signal statistics estimated once per dataset on the training rows.
struct SignalStats {
    std::vector<std::string> feature_names;
    std::vector<std::size_t> feature_columns; // positions within Table rows
    std::vector<double> variances;            // sample variances, divisor n-1
    Matrix correlation;                       // unit diagonal; zero rows for constant features
    Matrix covariance;
    std::size_t n_rows_used = 0;
};

// Ordered mild-to-strong schedule: strictly decreasing dB values.
// Intensity n_k = snr_max_db - levels_db[k] is the regressor of the trend fit.
struct SnrSchedule {
    std::vector<double> levels_db;

    double snr_max_db() const { return levels_db.front(); }
    double intensity(std::size_t k) const { return snr_max_db() - levels_db[k]; }
    std::size_t size() const { return levels_db.size(); }
    void validate() const;

    static SnrSchedule defaults() { return SnrSchedule{{20.0, 10.0, 5.0, 0.0, -5.0, -10.0}}; }
};

// Noise power relative to the clean signal: alpha = 10^(-snr_db/10).
double snr_to_alpha(double snr_db);

SignalStats estimate_signal_stats(const Table& table,
                                  const std::vector<std::size_t>& train_rows,
                                  const std::vector<FeatureDescriptor>& selected);

// Draws zero-mean Gaussian noise with covariance alpha * diag(variances)
// (uncorrelated) or alpha * covariance (correlated). The Cholesky factor is
// precomputed over the positive-variance features; constant features always
// receive exactly zero noise.
class GaussianNoiseSampler {
public:
    GaussianNoiseSampler(const SignalStats& stats, NoiseKind kind);

    // One noise vector, index-aligned with stats.feature_names.
    std::vector<double> sample(double alpha, RngStream& rng) const;

    NoiseKind kind() const { return kind_; }

private:
    NoiseKind kind_;
    std::vector<double> std_devs_;
    std::vector<std::size_t> active_; // features with positive variance
    Matrix chol_active_;              // correlated kind only
};

std::vector<double> sample_noise(const SignalStats& stats,
                                 NoiseKind kind,
                                 double alpha,
                                 RngStream& rng);

// x' = x + eps on the selected numeric features; every other cell, the label
// included, is copied bit-identically. alpha = 0 returns the row unchanged
// without consuming randomness.
Row perturb_row(const Row& row,
                const SignalStats& stats,
                const GaussianNoiseSampler& sampler,
                double alpha,
                RngStream& rng);

Row perturb_row(const Row& row,
                const SignalStats& stats,
                NoiseKind kind,
                double alpha,
                RngStream& rng);

void to_json(nlohmann::json& j, const SignalStats& s);

} // namespace judgecal
