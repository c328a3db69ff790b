#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "judgecal/errors.hpp"
#include "judgecal/report.hpp"
#include "judgecal/text.hpp"

namespace {

void print_verdict(const judgecal::CalibrationVerdict& verdict) {
    std::cout << "run " << verdict.run_id << ": dataset " << verdict.dataset_id << " is "
              << judgecal::decision_name(verdict.combined) << " (" << verdict.n_trials << "/"
              << verdict.expected_trials << " noise trials)\n";
    for (const auto& [kind, result] : verdict.per_kind) {
        const std::string p = judgecal::format_p(result.fit.p_one_sided);
        std::cout << "  " << kind << ": beta1=" << judgecal::format_beta(result.fit.beta1) << ", "
                  << (p[0] == '<' ? "p" + p : "p=" + p) << ", "
                  << (result.decision == judgecal::Decision::sensitive ? "Reject H0"
                                                                       : "Fail to reject")
                  << "\n";
    }
}

int cmd_run_impl(const judgecal::RunConfig& config) {
    const auto outcome = judgecal::run_calibration(config);
    print_verdict(outcome.verdict);
    if (!outcome.run_dir.empty())
        std::cout << "verdict written to " << outcome.run_dir << "/verdict.json\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Noise-response calibration for LLM judges"};
    app.require_subcommand(1);

    // run ------------------------------------------------------------------
    auto* run = app.add_subcommand("run", "Execute the calibration protocol on one dataset");
    std::string config_path, dataset, noise_kind, schedule, judge_text, out_dir, resume_dir;
    std::string perturb_split;
    int reps = -1, n_context = -1, feature_cap = -1, batch_size = -1, clean_trials = -1,
        min_rows = -1;
    double alpha = -1.0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    run->add_option("--config", config_path, "Config file (JSON or key=value lines)");
    run->add_option("--dataset", dataset, "Dataset manifest path");
    run->add_option("--noise", noise_kind, "uncorrelated | correlated | lexical | both");
    run->add_option("--schedule", schedule, "Comma-separated levels (dB, or severities for lexical)");
    run->add_option("--reps", reps, "Repetitions per level");
    run->add_option("--judge", judge_text, "Judge spec, e.g. sim:scripted:base=0.9,slope=-0.1");
    run->add_option("--alpha", alpha, "Significance level of the slope test");
    run->add_option("--seed", seed, "Master seed")->each([&](const std::string&) { seed_set = true; });
    run->add_option("--out", out_dir, "Run directory (omit to run in memory)");
    run->add_option("--resume", resume_dir, "Continue a persisted run (ignores other flags)");
    run->add_option("--n-context", n_context, "Few-shot examples in the prompt");
    run->add_option("--feature-cap", feature_cap, "Max numeric features used");
    run->add_option("--batch-size", batch_size, "Evaluation rows per judge call");
    run->add_option("--clean-trials", clean_trials, "Zero-noise baseline repetitions");
    run->add_option("--min-rows", min_rows, "Eligibility row minimum");
    run->add_option("--perturb-split", perturb_split, "Split receiving noise: test | train");

    // analyze --------------------------------------------------------------
    auto* analyze = app.add_subcommand("analyze", "Write slope/curve/comparison CSVs from runs");
    std::vector<std::string> analyze_dirs;
    std::string analyze_out = "analysis";
    std::string ci_mode = "within-run";
    analyze->add_option("run_dirs", analyze_dirs, "Run directories");
    analyze->add_option("--out", analyze_out, "Output directory for the CSV files");
    analyze->add_option("--ci", ci_mode, "Curve CIs: within-run | across-datasets")
        ->check(CLI::IsMember({"within-run", "across-datasets"}));

    // report ---------------------------------------------------------------
    auto* report = app.add_subcommand("report", "Print per-dataset verdicts and sensitive fractions");
    std::vector<std::string> report_dirs;
    report->add_option("run_dirs", report_dirs, "Run directories");

    // compare-groups -------------------------------------------------------
    auto* compare = app.add_subcommand("compare-groups",
                                       "Clean-baseline group study between run groups");
    std::vector<std::string> sensitive_dirs, insensitive_dirs;
    std::string compare_out;
    int resamples = 10000;
    std::uint64_t compare_seed = 0;
    compare->add_option("--sensitive", sensitive_dirs, "Run directories of the sensitive group");
    compare->add_option("--insensitive", insensitive_dirs, "Run directories of the insensitive group");
    compare->add_option("--resamples", resamples, "Bootstrap resamples");
    compare->add_option("--seed", compare_seed, "Bootstrap seed");
    compare->add_option("--out", compare_out, "Directory for group_comparison.csv and ecdf.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e); // prints the diagnostic
        return 1;
    }

    try {
        if (run->parsed()) {
            if (!resume_dir.empty()) {
                const auto outcome = judgecal::resume(resume_dir);
                print_verdict(outcome.verdict);
                std::cout << "verdict written to " << outcome.run_dir << "/verdict.json\n";
                return 0;
            }
            judgecal::RunConfig config;
            if (!config_path.empty()) config = judgecal::load_run_config(config_path);
            if (!dataset.empty()) config.manifest_path = dataset;
            if (!noise_kind.empty()) config.noise.kind = noise_kind;
            if (!schedule.empty()) {
                std::vector<double> levels;
                for (const auto& part : judgecal::split(schedule, ',')) {
                    const auto v = judgecal::parse_number(part);
                    if (!v) throw judgecal::ConfigError("bad --schedule entry \"" + part + "\"");
                    levels.push_back(*v);
                }
                if (config.noise.kind == "lexical")
                    config.noise.severity_schedule.levels = levels;
                else
                    config.noise.snr_schedule.levels_db = levels;
            }
            if (!judge_text.empty()) config.judge = judgecal::parse_judge_spec(judge_text);
            if (reps >= 0) config.repetitions = reps;
            if (alpha >= 0.0) config.alpha_level = alpha;
            if (seed_set) config.master_seed = seed;
            if (!out_dir.empty()) config.output_dir = out_dir;
            if (n_context >= 0) config.n_context = n_context;
            if (feature_cap >= 0) config.feature_cap = feature_cap;
            if (batch_size >= 0) config.batch_size = batch_size;
            if (clean_trials >= 0) config.clean_trials = clean_trials;
            if (min_rows >= 0) config.min_rows = min_rows;
            if (!perturb_split.empty()) config.perturb_split = perturb_split;
            return cmd_run_impl(config);
        }
        if (analyze->parsed()) {
            if (analyze_dirs.empty()) {
                std::cerr << analyze->help();
                return 1;
            }
            const auto mode = ci_mode == "across-datasets" ? judgecal::CiMode::across_datasets
                                                           : judgecal::CiMode::within_run;
            const auto artifacts = judgecal::analyze(analyze_dirs, analyze_out, mode);
            std::cout << "wrote slope_table.csv, curves.csv, group_comparison.csv, ecdf.csv to "
                      << analyze_out << "\n";
            if (!artifacts.group_comparison_written)
                std::cout << "note: group comparison needs runs with both verdicts and >= 2 "
                             "clean trials each; wrote headers only\n";
            return 0;
        }
        if (report->parsed()) {
            if (report_dirs.empty()) {
                std::cerr << report->help();
                return 1;
            }
            std::cout << judgecal::render_report(report_dirs);
            return 0;
        }
        if (compare->parsed()) {
            if (sensitive_dirs.empty() || insensitive_dirs.empty()) {
                std::cerr << compare->help();
                return 1;
            }
            const auto data =
                judgecal::compare_groups(sensitive_dirs, insensitive_dirs, resamples, compare_seed);
            std::cout << judgecal::render_group_table(data.table);
            if (!compare_out.empty()) {
                std::filesystem::create_directories(compare_out);
                judgecal::write_group_comparison_csv(
                    data.table, (std::filesystem::path(compare_out) / "group_comparison.csv").string());
                judgecal::write_ecdf_csv(
                    data.sensitive_primary, data.insensitive_primary,
                    (std::filesystem::path(compare_out) / "ecdf.csv").string());
                std::cout << "wrote group_comparison.csv and ecdf.csv to " << compare_out << "\n";
            }
            return 0;
        }
    } catch (const judgecal::PartialRun& e) {
        std::cerr << "error: partial run: " << e.what() << "\n";
        return 2;
    } catch (const judgecal::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
