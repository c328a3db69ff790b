#include "judgecal/stats.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>

#include "judgecal/errors.hpp"
#include "judgecal/rng.hpp"

namespace judgecal {

namespace {

// Continued-fraction evaluation for the incomplete beta function
// (modified Lentz's method).
double betacf(double a, double b, double x) {
    constexpr int max_iter = 300;
    constexpr double eps = 3e-16;
    constexpr double fpmin = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

// Regularized incomplete beta function I_x(a, b).
double ibeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(ln_bt);
    // Continued fraction converges fastest on the side of the mean.
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double sorted_median(const std::vector<double>& sorted) {
    return quantile_type7(sorted, 0.5);
}

} // namespace

std::string decision_name(Decision d) {
    return d == Decision::sensitive ? "sensitive" : "insensitive";
}

double Ecdf::eval(double x) const {
    double frac = 0.0;
    for (const auto& [value, cum] : points) {
        if (value > x) break;
        frac = cum;
    }
    return frac;
}

OlsFit ols_fit(const std::vector<std::pair<double, double>>& observations) {
    const std::size_t n = observations.size();
    if (n < 3) throw InsufficientData("ols_fit requires at least 3 observations, got " + std::to_string(n));
    for (const auto& [x, y] : observations) {
        if (!std::isfinite(x) || !std::isfinite(y))
            throw NonFiniteValue("ols_fit observation is not finite");
    }

    double mean_x = 0.0, mean_y = 0.0;
    for (const auto& [x, y] : observations) {
        mean_x += x;
        mean_y += y;
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);

    double s_xx = 0.0, s_xy = 0.0;
    for (const auto& [x, y] : observations) {
        s_xx += (x - mean_x) * (x - mean_x);
        s_xy += (x - mean_x) * (y - mean_y);
    }
    if (s_xx == 0.0) throw DegenerateDesign("ols_fit requires at least 2 distinct x values");

    OlsFit fit;
    fit.n_obs = static_cast<int>(n);
    fit.df = fit.n_obs - 2;
    fit.beta1 = s_xy / s_xx;
    fit.beta0 = mean_y - fit.beta1 * mean_x;

    double ss_res = 0.0;
    for (const auto& [x, y] : observations) {
        const double r = y - (fit.beta0 + fit.beta1 * x);
        ss_res += r * r;
    }
    fit.residual_variance = ss_res / static_cast<double>(fit.df);
    fit.se_beta1 = std::sqrt(fit.residual_variance / s_xx);

    if (fit.se_beta1 == 0.0) {
        // Zero residuals: the t-statistic degenerates. A flat response stays
        // at the null center; an exact nonzero slope is treated as infinitely
        // strong evidence in its direction.
        if (fit.beta1 == 0.0) {
            fit.t_stat = 0.0;
            fit.p_one_sided = 0.5;
        } else if (fit.beta1 < 0.0) {
            fit.t_stat = -std::numeric_limits<double>::infinity();
            fit.p_one_sided = 0.0;
        } else {
            fit.t_stat = std::numeric_limits<double>::infinity();
            fit.p_one_sided = 1.0;
        }
        return fit;
    }

    fit.t_stat = fit.beta1 / fit.se_beta1;
    fit.p_one_sided = student_t_cdf(fit.t_stat, fit.df);
    return fit;
}

SlopeTestResult slope_test(const OlsFit& fit, double alpha_level) {
    if (!(alpha_level > 0.0 && alpha_level < 1.0))
        throw InvalidProbability("alpha_level must lie in (0, 1)");
    SlopeTestResult result;
    result.fit = fit;
    result.alpha_level = alpha_level;
    result.t_crit = student_t_quantile(alpha_level, fit.df);
    result.decision = fit.t_stat < result.t_crit ? Decision::sensitive : Decision::insensitive;
    return result;
}

double student_t_cdf(double t, int df) {
    if (df < 1) throw InvalidDf("student_t_cdf requires df >= 1, got " + std::to_string(df));
    if (std::isnan(t)) throw NonFiniteValue("student_t_cdf received NaN");
    if (std::isinf(t)) return t < 0.0 ? 0.0 : 1.0;
    const double v = static_cast<double>(df);
    const double x = v / (v + t * t);
    const double tail = 0.5 * ibeta(0.5 * v, 0.5, x);
    return t <= 0.0 ? tail : 1.0 - tail;
}

double student_t_quantile(double p, int df) {
    if (df < 1) throw InvalidDf("student_t_quantile requires df >= 1, got " + std::to_string(df));
    if (!(p > 0.0 && p < 1.0))
        throw InvalidProbability("student_t_quantile requires p in (0, 1)");
    if (p == 0.5) return 0.0;
    // Symmetry: solve on the lower tail only.
    if (p > 0.5) return -student_t_quantile(1.0 - p, df);

    double lo = -1.0;
    double hi = 0.0;
    while (student_t_cdf(lo, df) > p) {
        hi = lo;
        lo *= 2.0;
        if (lo < -1e300) break;
    }
    // Bisection; the CDF is strictly increasing so this converges linearly.
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double c = student_t_cdf(mid, df);
        if (std::fabs(c - p) <= 1e-10 && (hi - lo) <= 1e-12 * (1.0 + std::fabs(mid))) return mid;
        if (c < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double quantile_type7(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw EmptyGroup("quantile of empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidProbability("quantile requires p in [0, 1]");
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = p * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, n - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double median(std::vector<double> values) {
    if (values.empty()) throw EmptyGroup("median of empty sample");
    std::sort(values.begin(), values.end());
    return sorted_median(values);
}

BootstrapCi bootstrap_median_diff(const std::vector<double>& group_a,
                                  const std::vector<double>& group_b,
                                  int n_resamples,
                                  std::uint64_t seed) {
    if (group_a.empty() || group_b.empty())
        throw EmptyGroup("bootstrap_median_diff requires two non-empty groups");
    if (n_resamples < 1) throw InsufficientData("bootstrap_median_diff requires n_resamples >= 1");

    BootstrapCi out;
    out.n_resamples = n_resamples;
    {
        std::vector<double> a = group_a;
        std::vector<double> b = group_b;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        out.delta_median = sorted_median(a) - sorted_median(b);
    }

    RngStream rng(seed);
    std::vector<double> diffs;
    diffs.reserve(static_cast<std::size_t>(n_resamples));
    std::vector<double> resample_a(group_a.size());
    std::vector<double> resample_b(group_b.size());
    for (int i = 0; i < n_resamples; ++i) {
        for (auto& v : resample_a) v = group_a[rng.uniform_below(group_a.size())];
        for (auto& v : resample_b) v = group_b[rng.uniform_below(group_b.size())];
        std::sort(resample_a.begin(), resample_a.end());
        std::sort(resample_b.begin(), resample_b.end());
        diffs.push_back(sorted_median(resample_a) - sorted_median(resample_b));
    }
    std::sort(diffs.begin(), diffs.end());
    out.ci_low = quantile_type7(diffs, 0.025);
    out.ci_high = quantile_type7(diffs, 0.975);
    return out;
}

Dispersion dispersion(const std::vector<double>& values) {
    if (values.empty()) throw EmptyGroup("dispersion of empty sample");
    Dispersion d;
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    d.median = sorted_median(sorted);
    d.range = sorted.back() - sorted.front();
    d.iqr = quantile_type7(sorted, 0.75) - quantile_type7(sorted, 0.25);
    const std::size_t n = sorted.size();
    if (n == 1) {
        d.single_value = true;
        d.std_dev = 0.0;
        return d;
    }
    double mean = 0.0;
    for (double v : sorted) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : sorted) ss += (v - mean) * (v - mean);
    d.std_dev = std::sqrt(ss / static_cast<double>(n - 1));
    return d;
}

Ecdf ecdf(const std::vector<double>& values) {
    if (values.empty()) throw EmptyGroup("ecdf of empty sample");
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    Ecdf f;
    const double n = static_cast<double>(sorted.size());
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        f.points.emplace_back(sorted[i], static_cast<double>(j + 1) / n);
        i = j + 1;
    }
    return f;
}

double json_safe(double v) {
    if (std::isfinite(v)) return v;
    return std::copysign(DBL_MAX, v);
}

void to_json(nlohmann::json& j, const OlsFit& f) {
    j = nlohmann::json{{"beta0", json_safe(f.beta0)},
                       {"beta1", json_safe(f.beta1)},
                       {"se_beta1", json_safe(f.se_beta1)},
                       {"t_stat", json_safe(f.t_stat)},
                       {"p_one_sided", f.p_one_sided},
                       {"df", f.df},
                       {"n_obs", f.n_obs},
                       {"residual_variance", json_safe(f.residual_variance)}};
}

void from_json(const nlohmann::json& j, OlsFit& f) {
    j.at("beta0").get_to(f.beta0);
    j.at("beta1").get_to(f.beta1);
    j.at("se_beta1").get_to(f.se_beta1);
    j.at("t_stat").get_to(f.t_stat);
    j.at("p_one_sided").get_to(f.p_one_sided);
    j.at("df").get_to(f.df);
    j.at("n_obs").get_to(f.n_obs);
    j.at("residual_variance").get_to(f.residual_variance);
}

void to_json(nlohmann::json& j, const SlopeTestResult& r) {
    j = nlohmann::json{{"fit", r.fit},
                       {"alpha_level", r.alpha_level},
                       {"t_crit", r.t_crit},
                       {"decision", decision_name(r.decision)}};
}

void from_json(const nlohmann::json& j, SlopeTestResult& r) {
    j.at("fit").get_to(r.fit);
    j.at("alpha_level").get_to(r.alpha_level);
    j.at("t_crit").get_to(r.t_crit);
    const auto name = j.at("decision").get<std::string>();
    if (name == "sensitive")
        r.decision = Decision::sensitive;
    else if (name == "insensitive")
        r.decision = Decision::insensitive;
    else
        throw ParseError("unknown decision: " + name);
}

void to_json(nlohmann::json& j, const GroupComparisonRow& r) {
    j = nlohmann::json{{"metric", r.metric},
                       {"median_sensitive", r.median_sensitive},
                       {"median_insensitive", r.median_insensitive},
                       {"ratio", json_safe(r.ratio)},
                       {"delta_median", r.delta_median},
                       {"ci_low", r.ci_low},
                       {"ci_high", r.ci_high}};
}

void to_json(nlohmann::json& j, const GroupComparison& g) {
    j = nlohmann::json{{"rows", g.rows},
                       {"n_sensitive", g.n_sensitive},
                       {"n_insensitive", g.n_insensitive},
                       {"n_resamples", g.n_resamples}};
}

} // namespace judgecal
