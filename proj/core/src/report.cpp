#include "judgecal/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "judgecal/errors.hpp"
#include "judgecal/text.hpp"

namespace fs = std::filesystem;

namespace judgecal {

std::string format_beta(double beta1) { return format_fixed(beta1, 4); }

std::string format_p(double p) {
    if (p < 1e-10) return "<1e-10";
    if (p < 1e-4) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.1e", p);
        return buf;
    }
    return format_fixed(p, 4);
}

std::string format_fraction(std::size_t num, std::size_t den) {
    const double pct = den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
    return std::to_string(num) + "/" + std::to_string(den) + " (" + format_fixed(pct, 1) + "%)";
}

namespace {

std::string decision_text(Decision d) {
    return d == Decision::sensitive ? "Reject H0" : "Fail to reject";
}

struct LoadedRun {
    std::string dir;
    CalibrationVerdict verdict;
    std::vector<TrialRecord> trials;
    TaskKind task = TaskKind::classification;
};

std::vector<LoadedRun> load_runs(const std::vector<std::string>& run_dirs) {
    if (run_dirs.empty()) throw NoRunsFound("no run directories given");
    std::vector<LoadedRun> runs;
    runs.reserve(run_dirs.size());
    for (const auto& dir : run_dirs) {
        LoadedRun run;
        run.dir = dir;
        run.verdict = load_verdict(dir);
        run.trials = load_trials(dir);
        if (run.trials.empty()) throw NoRunsFound(dir + " has an empty trials.jsonl");
        run.task = run.trials.front().metrics.task_kind;
        runs.push_back(std::move(run));
    }
    return runs;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
}

std::string percent_ci_row(double lo, double hi) {
    return "\"[" + format_double(lo) + ", " + format_double(hi) + "]\"";
}

} // namespace

std::string render_group_table(const GroupComparison& table) {
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"Metric", "Sensitive", "Insensitive", "Ratio", "Δ Median", "95% Bootstrap CI"});
    for (const auto& row : table.rows)
        cells.push_back({row.metric, format_fixed(row.median_sensitive, 4),
                         format_fixed(row.median_insensitive, 4), format_fixed(row.ratio, 4),
                         format_fixed(row.delta_median, 4),
                         "[" + format_fixed(row.ci_low, 4) + ", " + format_fixed(row.ci_high, 4) + "]"});

    std::vector<std::size_t> widths(cells.front().size(), 0);
    for (const auto& row : cells)
        for (std::size_t c = 0; c < row.size(); ++c) {
            // The delta header is 8 bytes of UTF-8 but 7 display columns.
            std::size_t width = row[c].size();
            if (row[c].rfind("Δ", 0) == 0) width -= 1;
            widths[c] = std::max(widths[c], width);
        }

    std::ostringstream out;
    out << "Group comparison over clean-baseline trials (" << table.n_sensitive << " sensitive, "
        << table.n_insensitive << " insensitive datasets; " << table.n_resamples
        << " bootstrap resamples)\n";
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::size_t width = row[c].size();
            if (row[c].rfind("Δ", 0) == 0) width -= 1;
            out << row[c] << std::string(widths[c] - width, ' ');
            out << (c + 1 == row.size() ? "\n" : "  ");
        }
    }
    return out.str();
}

void write_group_comparison_csv(const GroupComparison& table, const std::string& path) {
    std::ostringstream out;
    out << "Metric,Sensitive,Insensitive,Ratio,Δ Median,95% Bootstrap CI\n";
    for (const auto& row : table.rows)
        out << row.metric << ',' << format_double(row.median_sensitive) << ','
            << format_double(row.median_insensitive) << ',' << format_double(row.ratio) << ','
            << format_double(row.delta_median) << ',' << percent_ci_row(row.ci_low, row.ci_high)
            << '\n';
    write_text_file(path, out.str());
}

void write_ecdf_csv(const std::vector<double>& sensitive_values,
                    const std::vector<double>& insensitive_values,
                    const std::string& path) {
    std::ostringstream out;
    out << "x,y,group\n";
    const std::vector<std::pair<const std::vector<double>*, const char*>> groups{
        {&sensitive_values, "sensitive"}, {&insensitive_values, "insensitive"}};
    for (const auto& [values, name] : groups) {
        if (values->empty()) continue;
        for (const auto& [x, y] : ecdf(*values).points)
            out << format_double(x) << ',' << format_double(y) << ',' << name << '\n';
    }
    write_text_file(path, out.str());
}

namespace {

struct LevelStats {
    int level_index;
    double severity;
    double intensity;
    std::vector<double> values;
};

CurvePoint summarize_level(const std::string& dataset_id, const std::string& kind,
                           const LevelStats& level) {
    CurvePoint point;
    point.dataset_id = dataset_id;
    point.noise_kind = kind;
    point.level_index = level.level_index;
    point.severity = level.severity;
    point.intensity = level.intensity;
    point.n = level.values.size();
    double sum = 0.0;
    for (double v : level.values) sum += v;
    point.mean = sum / static_cast<double>(level.values.size());
    double half = 0.0;
    if (level.values.size() >= 2) {
        double ss = 0.0;
        for (double v : level.values) ss += (v - point.mean) * (v - point.mean);
        const double sd = std::sqrt(ss / static_cast<double>(level.values.size() - 1));
        const double t = student_t_quantile(0.975, static_cast<int>(level.values.size()) - 1);
        half = t * sd / std::sqrt(static_cast<double>(level.values.size()));
    }
    point.ci_low = point.mean - half;
    point.ci_high = point.mean + half;
    return point;
}

} // namespace

AnalysisArtifacts analyze(const std::vector<std::string>& run_dirs,
                          const std::string& out_dir,
                          CiMode ci_mode) {
    const auto runs = load_runs(run_dirs);
    fs::create_directories(out_dir);
    AnalysisArtifacts artifacts;

    std::ostringstream slope_csv;
    slope_csv << "dataset,noise_kind,beta1,p_one_sided,decision\n";
    for (const auto& run : runs)
        for (const auto& [kind, result] : run.verdict.per_kind) {
            SlopeTableRow row;
            row.dataset_id = run.verdict.dataset_id;
            row.noise_kind = kind;
            row.beta1 = result.fit.beta1;
            row.p_one_sided = result.fit.p_one_sided;
            row.decision = result.decision;
            slope_csv << row.dataset_id << ',' << row.noise_kind << ',' << format_beta(row.beta1)
                      << ',' << format_p(row.p_one_sided) << ',' << decision_text(row.decision)
                      << '\n';
            artifacts.slope_table.push_back(std::move(row));
        }
    write_text_file((fs::path(out_dir) / "slope_table.csv").string(), slope_csv.str());

    // Per run and noise kind, collect the primary metric per level.
    using LevelKey = int;
    std::vector<CurvePoint> curves;
    std::map<std::pair<std::string, std::string>, std::map<LevelKey, LevelStats>> per_run;
    for (const auto& run : runs)
        for (const auto& t : run.trials) {
            if (t.noise_kind == "clean") continue;
            auto& level = per_run[{run.verdict.dataset_id, t.noise_kind}][t.level_index];
            level.level_index = t.level_index;
            level.severity = t.severity;
            level.intensity = t.intensity;
            level.values.push_back(t.metrics.primary);
        }
    if (ci_mode == CiMode::within_run) {
        for (const auto& [key, levels] : per_run)
            for (const auto& [idx, level] : levels)
                curves.push_back(summarize_level(key.first, key.second, level));
    } else {
        // Across datasets: the CI spread is over per-dataset level means.
        std::map<std::pair<std::string, LevelKey>, LevelStats> pooled;
        for (const auto& [key, levels] : per_run)
            for (const auto& [idx, level] : levels) {
                auto& slot = pooled[{key.second, idx}];
                slot.level_index = level.level_index;
                slot.severity = level.severity;
                slot.intensity = level.intensity;
                double sum = 0.0;
                for (double v : level.values) sum += v;
                slot.values.push_back(sum / static_cast<double>(level.values.size()));
            }
        for (const auto& [key, level] : pooled)
            curves.push_back(summarize_level("all", key.first, level));
    }
    std::ostringstream curves_csv;
    curves_csv << "dataset,noise_kind,level_index,severity,intensity,n,mean,ci_low,ci_high\n";
    for (const auto& p : curves)
        curves_csv << p.dataset_id << ',' << p.noise_kind << ',' << p.level_index << ','
                   << format_double(p.severity) << ',' << format_double(p.intensity) << ',' << p.n
                   << ',' << format_double(p.mean) << ',' << format_double(p.ci_low) << ','
                   << format_double(p.ci_high) << '\n';
    write_text_file((fs::path(out_dir) / "curves.csv").string(), curves_csv.str());
    artifacts.curves = std::move(curves);

    std::vector<std::string> sensitive_dirs, insensitive_dirs;
    for (const auto& run : runs)
        (run.verdict.combined == Decision::sensitive ? sensitive_dirs : insensitive_dirs)
            .push_back(run.dir);
    const std::string comparison_path = (fs::path(out_dir) / "group_comparison.csv").string();
    const std::string ecdf_path = (fs::path(out_dir) / "ecdf.csv").string();
    if (!sensitive_dirs.empty() && !insensitive_dirs.empty()) {
        try {
            const auto data = compare_groups(sensitive_dirs, insensitive_dirs, 10000, 0);
            write_group_comparison_csv(data.table, comparison_path);
            write_ecdf_csv(data.sensitive_primary, data.insensitive_primary, ecdf_path);
            artifacts.group_comparison_written = true;
        } catch (const InsufficientData&) {
            // Runs without repeated clean baselines cannot feed the group study.
        }
    }
    if (!artifacts.group_comparison_written) {
        write_text_file(comparison_path, "Metric,Sensitive,Insensitive,Ratio,Δ Median,95% Bootstrap CI\n");
        write_text_file(ecdf_path, "x,y,group\n");
    }
    return artifacts;
}

std::string render_report(const std::vector<std::string>& run_dirs) {
    const auto runs = load_runs(run_dirs);
    std::ostringstream out;
    std::size_t class_total = 0, class_sensitive = 0;
    std::size_t reg_total = 0, reg_sensitive = 0;
    for (const auto& run : runs) {
        const bool sensitive = run.verdict.combined == Decision::sensitive;
        if (run.task == TaskKind::classification) {
            ++class_total;
            class_sensitive += sensitive ? 1 : 0;
        } else {
            ++reg_total;
            reg_sensitive += sensitive ? 1 : 0;
        }
        out << run.verdict.dataset_id << " [" << task_kind_name(run.task) << ", run "
            << run.verdict.run_id << "]: " << decision_name(run.verdict.combined) << "\n";
        for (const auto& [kind, result] : run.verdict.per_kind) {
            const std::string p = format_p(result.fit.p_one_sided);
            out << "  " << kind << ": beta1=" << format_beta(result.fit.beta1) << ", "
                << (p[0] == '<' ? "p" + p : "p=" + p) << ", " << decision_text(result.decision)
                << "\n";
        }
        out << "  trials: " << run.verdict.n_trials << "/" << run.verdict.expected_trials << "\n";
    }
    out << "\n";
    if (class_total > 0)
        out << "Sensitive (classification): " << format_fraction(class_sensitive, class_total) << "\n";
    if (reg_total > 0)
        out << "Sensitive (regression): " << format_fraction(reg_sensitive, reg_total) << "\n";
    out << "Sensitive (overall): "
        << format_fraction(class_sensitive + reg_sensitive, class_total + reg_total) << "\n";
    return out.str();
}

} // namespace judgecal
