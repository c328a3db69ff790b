#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "judgecal/judge.hpp"
#include "judgecal/lexical_noise.hpp"
#include "judgecal/metrics.hpp"
#include "judgecal/stats.hpp"
#include "judgecal/tabular_noise.hpp"

namespace judgecal {

struct NoiseConfig {
    // "uncorrelated", "correlated", "lexical", or "both" (= uncorrelated +
    // correlated in one run, matching the combined-verdict rule).
    std::string kind = "uncorrelated";
    SnrSchedule snr_schedule = SnrSchedule::defaults();
    SeveritySchedule severity_schedule = SeveritySchedule::defaults();
    CorruptionConfig corruption;
};

struct RunConfig {
    std::string manifest_path; // stored absolute so resumes work from any cwd
    NoiseConfig noise;
    int repetitions = 5;
    int n_context = 20;
    int feature_cap = 10;
    int batch_size = 0; // 0 picks the default: 500 tabular rows, 50 text examples
    JudgeSpec judge;
    double alpha_level = 0.05;
    std::uint64_t master_seed = 0;
    std::string output_dir; // empty runs entirely in memory
    int min_rows = 30;
    int clean_trials = 1; // zero-noise baseline repetitions (5 for group studies)
    std::string perturb_split = "test"; // which split receives noise: "test" or "train"
    std::size_t char_budget = 100000;
    int max_in_flight = 4; // concurrent cells, remote judges only

    void validate() const;
};

// JSON (field-per-field) or key=value lines; either form normalizes to the
// same canonical JSON before hashing.
RunConfig load_run_config(const std::string& path);
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json canonical_config_json(const RunConfig& config);
std::string config_hash(const RunConfig& config); // 16 hex chars

struct TrialRecord {
    std::string dataset_id;
    std::string noise_kind; // "clean", "uncorrelated", "correlated", "lexical"
    int level_index = -1;   // -1 for the clean baseline
    double severity = 0.0;  // dB (tabular), alpha (lexical), 0 for clean
    double intensity = 0.0; // regressor n_k
    int rep = 0;
    MetricReport metrics;
    std::string started_at;
    std::string finished_at;
    std::uint64_t rng_seed = 0;
    std::string judge_fingerprint;
};

struct CalibrationVerdict {
    std::string dataset_id;
    std::string run_id;
    std::string config_hash;
    std::map<std::string, SlopeTestResult> per_kind;
    Decision combined = Decision::insensitive; // sensitive when any kind rejects H0
    std::size_t n_trials = 0;        // noise trials present
    std::size_t expected_trials = 0; // K * R summed over kinds
};

struct RunOutcome {
    CalibrationVerdict verdict;
    std::vector<TrialRecord> trials; // clean trials first, then kind/level/rep order
    std::string run_dir;             // empty for in-memory runs
};

// Seed for the (dataset, noise kind, level, rep) cell; the noise and judge
// streams derive from it with the labels "noise" and "judge".
std::uint64_t cell_seed(std::uint64_t master_seed,
                        const std::string& dataset_id,
                        const std::string& noise_kind,
                        int level_index,
                        int rep);

// Zero-noise evaluation over the configured split, persisted as clean
// TrialRecords when an output dir is set. Returns the first repetition's
// metrics.
MetricReport run_baseline(const RunConfig& config);

// Full protocol: clean baseline trials, every (kind, level, rep) cell, the
// per-kind trend fits and the combined verdict. With an output dir the run
// is persisted (config.json, trials.jsonl, verdict.json, transcripts/) and
// existing completed cells are skipped, so interrupted runs continue where
// they stopped. Throws PartialRun when fewer than 80% of the expected noise
// trials completed.
RunOutcome run_calibration(const RunConfig& config);

// Continues the run stored in `run_dir` using its persisted config.
// Throws ConfigMismatch when config.json no longer matches its stored hash.
RunOutcome resume(const std::string& run_dir);

struct GroupComparisonData {
    GroupComparison table;
    // Per-dataset medians of the primary metric over clean trials, the ECDF
    // inputs of the group study.
    std::vector<double> sensitive_primary;
    std::vector<double> insensitive_primary;
};

// Clean-baseline group study: per-dataset median/std/IQR/range of the primary
// metric, compared across the two groups with bootstrap CIs on the median
// differences. Every run needs at least 2 clean trials.
GroupComparisonData compare_groups(const std::vector<std::string>& sensitive_dirs,
                                   const std::vector<std::string>& insensitive_dirs,
                                   int n_resamples,
                                   std::uint64_t seed);

// Persisted-run readers used by the reporting layer.
std::vector<TrialRecord> load_trials(const std::string& run_dir);
CalibrationVerdict load_verdict(const std::string& run_dir);

void to_json(nlohmann::json& j, const NoiseConfig& c);
void from_json(const nlohmann::json& j, NoiseConfig& c);
void to_json(nlohmann::json& j, const RunConfig& c);
void to_json(nlohmann::json& j, const TrialRecord& t);
void from_json(const nlohmann::json& j, TrialRecord& t);
void to_json(nlohmann::json& j, const CalibrationVerdict& v);
void from_json(const nlohmann::json& j, CalibrationVerdict& v);

} // namespace judgecal
