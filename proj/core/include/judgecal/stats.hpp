#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace judgecal {

// Least-squares fit of y = beta0 + beta1 * x.
struct OlsFit {
    double beta0 = 0.0;
    double beta1 = 0.0;
    double se_beta1 = 0.0;
    double t_stat = 0.0;
    double p_one_sided = 0.5;
    int df = 0; // n_obs - 2
    int n_obs = 0;
    double residual_variance = 0.0;
};

enum class Decision { sensitive, insensitive };

std::string decision_name(Decision d);

struct SlopeTestResult {
    OlsFit fit;
    double alpha_level = 0.05;
    double t_crit = 0.0;
    Decision decision = Decision::insensitive;
};

// One row of a two-group summary table: medians of a per-run metric for
// each group plus a bootstrap CI on the median difference.
struct GroupComparisonRow {
    std::string metric;
    double median_sensitive = 0.0;
    double median_insensitive = 0.0;
    double ratio = 0.0;        // median_sensitive / median_insensitive
    double delta_median = 0.0; // median_sensitive - median_insensitive
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct GroupComparison {
    std::vector<GroupComparisonRow> rows;
    std::size_t n_sensitive = 0;
    std::size_t n_insensitive = 0;
    int n_resamples = 10000;
};

struct BootstrapCi {
    double delta_median = 0.0; // median(A) - median(B) on the original samples
    double ci_low = 0.0;
    double ci_high = 0.0;
    int n_resamples = 0;
};

struct Dispersion {
    double std_dev = 0.0;
    double iqr = 0.0;
    double range = 0.0;
    double median = 0.0;
    bool single_value = false; // std_dev is 0 by convention, not measured
};

// Right-continuous empirical CDF: fraction of values <= x.
struct Ecdf {
    std::vector<std::pair<double, double>> points; // (value, cumulative fraction)
    double eval(double x) const;
};

// Fits y = beta0 + beta1 * x and computes the one-sided lower-tail p-value
// for beta1. Requires >= 3 observations and >= 2 distinct x values.
// A perfect fit (zero residuals) with nonzero slope yields t = +-inf and
// p in {0, 1}; a constant y yields beta1 = 0, t = 0, p = 0.5.
OlsFit ols_fit(const std::vector<std::pair<double, double>>& observations);

// Rejects H0: beta1 >= 0 in favor of H1: beta1 < 0 when t < t_crit(alpha, df).
SlopeTestResult slope_test(const OlsFit& fit, double alpha_level);

// Lower-tail CDF of Student's t with df degrees of freedom, computed through
// the regularized incomplete beta function.
double student_t_cdf(double t, int df);

// Inverse of student_t_cdf by monotone bisection; |cdf(result) - p| <= 1e-10.
double student_t_quantile(double p, int df);

// Linear-interpolation quantile between closest ranks (R type 7).
// `sorted` must be ascending and non-empty; p in [0, 1].
double quantile_type7(const std::vector<double>& sorted, double p);

double median(std::vector<double> values);

// Percentile CI for median(A) - median(B) from independent resamples of each
// group with replacement. Deterministic for a fixed seed.
BootstrapCi bootstrap_median_diff(const std::vector<double>& group_a,
                                  const std::vector<double>& group_b,
                                  int n_resamples,
                                  std::uint64_t seed);

Dispersion dispersion(const std::vector<double>& values);

Ecdf ecdf(const std::vector<double>& values);

void to_json(nlohmann::json& j, const OlsFit& f);
void to_json(nlohmann::json& j, const SlopeTestResult& r);
void to_json(nlohmann::json& j, const GroupComparisonRow& r);
void to_json(nlohmann::json& j, const GroupComparison& g);
void from_json(const nlohmann::json& j, OlsFit& f);
void from_json(const nlohmann::json& j, SlopeTestResult& r);

// Replaces non-finite values with the largest finite double of the same sign
// so results survive JSON round-trips.
double json_safe(double v);

} // namespace judgecal
