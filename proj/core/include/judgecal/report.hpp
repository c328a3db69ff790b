#pragma once

#include <string>
#include <vector>

#include "judgecal/protocol.hpp"

namespace judgecal {

// One line of slope_table.csv. Values come from the stored verdict, never
// from a refit, so the table cannot drift from verdict.json.
struct SlopeTableRow {
    std::string dataset_id;
    std::string noise_kind;
    double beta1 = 0.0;
    double p_one_sided = 0.5;
    Decision decision = Decision::insensitive;
};

std::string format_beta(double beta1);                    // 4 decimals, "-0.2100"
std::string format_p(double p);                           // floored: "<1e-10" below 1e-10
std::string format_fraction(std::size_t num, std::size_t den); // "49/138 (35.5%)"

enum class CiMode { within_run, across_datasets };

struct CurvePoint {
    std::string dataset_id; // "all" when aggregating across datasets
    std::string noise_kind;
    int level_index = 0;
    double severity = 0.0;
    double intensity = 0.0;
    std::size_t n = 0; // reps (within-run) or datasets (across)
    double mean = 0.0;
    double ci_low = 0.0; // mean +- t_{0.975, n-1} * sd / sqrt(n); degenerate at n < 2
    double ci_high = 0.0;
};

struct AnalysisArtifacts {
    std::vector<SlopeTableRow> slope_table;
    std::vector<CurvePoint> curves;
    bool group_comparison_written = false; // both verdict groups present and comparable
};

// Reads persisted runs only and writes slope_table.csv, curves.csv,
// group_comparison.csv and ecdf.csv into out_dir. The comparison files group
// runs by their stored verdicts; they stay header-only when either group is
// empty or lacks the 2 clean trials the group study needs.
AnalysisArtifacts analyze(const std::vector<std::string>& run_dirs,
                          const std::string& out_dir,
                          CiMode ci_mode = CiMode::within_run);

// Per-dataset verdict summary plus sensitive-fraction lines, split by task
// kind when both kinds are present.
std::string render_report(const std::vector<std::string>& run_dirs);

// Group-comparison table as aligned text (for stdout). The CSV twin is
// written by write_group_comparison_csv.
std::string render_group_table(const GroupComparison& table);

void write_group_comparison_csv(const GroupComparison& table, const std::string& path);
void write_ecdf_csv(const std::vector<double>& sensitive_values,
                    const std::vector<double>& insensitive_values,
                    const std::string& path);

} // namespace judgecal
