// Microbenchmarks for the numeric hot paths: noise sampling, token
// corruption, trend fitting, t quantiles, bootstrap resampling, and one
// in-memory end-to-end calibration run.

#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include <judgecal/lexical_noise.hpp>
#include <judgecal/matrix.hpp>
#include <judgecal/protocol.hpp>
#include <judgecal/rng.hpp>
#include <judgecal/stats.hpp>
#include <judgecal/tabular_noise.hpp>

namespace fs = std::filesystem;
using namespace judgecal;

namespace {

// AR(1)-style covariance over n features: corr(i,j) = 0.5^|i-j|.
SignalStats synthetic_stats(std::size_t n_features) {
    SignalStats stats;
    stats.n_rows_used = 1000;
    Matrix correlation(n_features, n_features);
    Matrix covariance(n_features, n_features);
    for (std::size_t i = 0; i < n_features; ++i) {
        stats.feature_names.push_back("f" + std::to_string(i));
        stats.feature_columns.push_back(i);
        stats.variances.push_back(1.0 + static_cast<double>(i));
    }
    for (std::size_t i = 0; i < n_features; ++i)
        for (std::size_t j = 0; j < n_features; ++j) {
            const double r = std::pow(0.5, std::fabs(static_cast<double>(i) -
                                                     static_cast<double>(j)));
            correlation(i, j) = r;
            covariance(i, j) = r * std::sqrt(stats.variances[i] * stats.variances[j]);
        }
    stats.correlation = correlation;
    stats.covariance = covariance;
    return stats;
}

void bm_noise_sample_correlated(benchmark::State& state) {
    const SignalStats stats = synthetic_stats(static_cast<std::size_t>(state.range(0)));
    const GaussianNoiseSampler sampler(stats, NoiseKind::correlated);
    RngStream rng(1);
    for (auto _ : state) benchmark::DoNotOptimize(sampler.sample(1.0, rng));
}

void bm_noise_sample_uncorrelated(benchmark::State& state) {
    const SignalStats stats = synthetic_stats(static_cast<std::size_t>(state.range(0)));
    const GaussianNoiseSampler sampler(stats, NoiseKind::uncorrelated);
    RngStream rng(1);
    for (auto _ : state) benchmark::DoNotOptimize(sampler.sample(1.0, rng));
}

void bm_corrupt_text(benchmark::State& state) {
    std::ostringstream text;
    for (int i = 0; i < 40; ++i) text << (i ? " " : "") << "token" << i;
    const std::string sentence = text.str();
    const CorruptionConfig config;
    RngStream rng(2);
    for (auto _ : state) benchmark::DoNotOptimize(corrupt_text(sentence, 0.5, config, rng));
}

void bm_ols_fit(benchmark::State& state) {
    RngStream rng(3);
    std::vector<std::pair<double, double>> pts;
    for (int k = 0; k < 6; ++k)
        for (int r = 0; r < 5; ++r)
            pts.emplace_back(5.0 * k, 0.9 - 0.01 * k + 0.02 * rng.normal());
    for (auto _ : state) benchmark::DoNotOptimize(ols_fit(pts));
}

void bm_student_t_quantile(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(student_t_quantile(0.01, 28));
}

void bm_bootstrap_median_diff(benchmark::State& state) {
    RngStream rng(4);
    std::vector<double> a(100), b(100);
    for (auto& v : a) v = rng.normal();
    for (auto& v : b) v = rng.normal();
    const int resamples = static_cast<int>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(bootstrap_median_diff(a, b, resamples, seed++));
}

// One full in-memory calibration: 6 levels x 5 reps on a small two-cluster
// tabular dataset with a scripted judge.
void bm_calibration_run(benchmark::State& state) {
    static const std::string manifest_path = [] {
        const fs::path dir = fs::temp_directory_path() / "judgecal_bench";
        fs::create_directories(dir);
        RngStream rng(5);
        std::ostringstream csv;
        csv << "f1,f2,label\n";
        for (int i = 0; i < 120; ++i) {
            const double cx = (i % 2) ? 6.0 : 0.0;
            char buf[80];
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%s\n", cx + rng.normal(), rng.normal(),
                          (i % 2) ? "b" : "a");
            csv << buf;
        }
        std::ofstream(dir / "data.csv") << csv.str();
        const nlohmann::json manifest{{"dataset_id", "bench"},
                                      {"path", (dir / "data.csv").string()},
                                      {"format", "csv"},
                                      {"task_kind", "classification"},
                                      {"label_field", "label"}};
        std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
        return (dir / "manifest.json").string();
    }();

    RunConfig config;
    config.manifest_path = manifest_path;
    config.noise.kind = "uncorrelated";
    config.judge = parse_judge_spec("sim:scripted:base=0.9,slope=-0.008,jitter=0.01");
    std::uint64_t seed = 0;
    for (auto _ : state) {
        config.master_seed = seed++;
        benchmark::DoNotOptimize(run_calibration(config));
    }
}

} // namespace

BENCHMARK(bm_noise_sample_correlated)->Arg(4)->Arg(10);
BENCHMARK(bm_noise_sample_uncorrelated)->Arg(4)->Arg(10);
BENCHMARK(bm_corrupt_text);
BENCHMARK(bm_ols_fit);
BENCHMARK(bm_student_t_quantile);
BENCHMARK(bm_bootstrap_median_diff)->Arg(1000)->Arg(10000);
BENCHMARK(bm_calibration_run)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
