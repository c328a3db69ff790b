#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace judgecal {

enum class FeatureKind { numeric, categorical, text };
enum class TaskKind { classification, regression };
enum class PrimaryMetric { accuracy, r_squared };

std::string feature_kind_name(FeatureKind k);
std::string task_kind_name(TaskKind k);
TaskKind parse_task_kind(const std::string& name);

struct FeatureDescriptor {
    std::string name;
    FeatureKind kind = FeatureKind::categorical;
    double observed_min = 0.0; // numeric only
    double observed_max = 0.0; // numeric only
    double variance = 0.0;     // numeric only, sample variance over non-missing cells
    std::size_t distinct_count = 0;
    std::size_t column = 0; // position within Table rows
};

// Missing cells are nullopt, never empty strings.
using Cell = std::optional<std::string>;
using Row = std::vector<Cell>;

struct Table {
    std::vector<FeatureDescriptor> descriptors;
    std::vector<Row> rows;
};

struct TaskSpec {
    TaskKind task_kind = TaskKind::classification;
    std::vector<std::string> label_space; // classification: distinct, ordered
    double value_min = 0.0;               // regression: observed label range
    double value_max = 0.0;
    PrimaryMetric primary_metric = PrimaryMetric::accuracy;
};

struct SplitSet {
    std::vector<std::size_t> train;
    std::vector<std::size_t> valid;
    std::vector<std::size_t> test;
    bool stratified = false;
};

struct EligibilityReport {
    double numeric_fraction = 0.0;
    std::size_t rows_dropped_missing = 0;
    std::size_t rows_retained = 0;
    bool eligible = false;
    std::string reason;
};

struct DatasetManifest {
    std::string dataset_id;
    std::string path; // resolved against the manifest's directory when relative
    std::string format; // "csv" or "jsonl"
    TaskKind task_kind = TaskKind::classification;
    std::string label_field;
    std::string text_field;               // empty when the dataset has no text input
    std::vector<std::string> label_space; // optional override; empty means inferred
    std::string description;              // optional, surfaced in prompts
};

struct Dataset {
    DatasetManifest manifest;
    Table table;
    std::size_t label_column = 0;
    std::optional<std::size_t> text_column;
    TaskSpec task;
};

DatasetManifest load_manifest(const std::string& manifest_path);

// Parses the file and profiles every column: a column is numeric when all of
// its non-missing cells parse as decimals. CSV requires a header row; JSONL
// takes its columns from the first object's keys.
Table load_table(const std::string& path, const std::string& format);

// load_table plus label/text column resolution and TaskSpec construction.
Dataset load_dataset(const DatasetManifest& manifest);

// Indices of rows with no missing cell in any column.
std::vector<std::size_t> complete_row_indices(const Table& table);

// Numeric fraction is computed over all non-label columns; rows with any
// missing value count as dropped. Always returns a report, never throws.
EligibilityReport check_eligibility(const Table& table,
                                    std::size_t label_column,
                                    std::size_t min_rows);

// 0.70/0.15/0.15 partition of `rows`, deterministic in `seed`. Classification
// stratifies the train split per label; valid/test are drawn uniformly from
// the remainder.
SplitSet split(const Table& table,
               const std::vector<std::size_t>& rows,
               std::size_t label_column,
               const TaskSpec& task,
               std::uint64_t seed);

// Keeps at most `cap` numeric features, preferring higher variance (ties by
// column order); the result is returned in column order.
std::vector<FeatureDescriptor> select_features(const std::vector<FeatureDescriptor>& features,
                                               std::size_t cap);

} // namespace judgecal
