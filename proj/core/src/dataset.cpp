#include "judgecal/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "judgecal/errors.hpp"
#include "judgecal/rng.hpp"
#include "judgecal/text.hpp"

namespace judgecal {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// RFC-4180 style: quoted fields may contain commas, newlines, and doubled
// quotes. Records end at LF or CRLF outside quotes.
std::vector<std::vector<std::string>> parse_csv(const std::string& content, const std::string& path) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started_quoted = false;
    std::size_t i = 0;
    const std::size_t n = content.size();
    auto end_field = [&] {
        record.push_back(field);
        field.clear();
        field_started_quoted = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };
    while (i < n) {
        const char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < n && content[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            ++i;
            continue;
        }
        switch (c) {
        case '"':
            if (field.empty() && !field_started_quoted) {
                in_quotes = true;
                field_started_quoted = true;
            } else {
                throw ParseError(path + ": stray quote in unquoted field at byte " + std::to_string(i));
            }
            break;
        case ',':
            end_field();
            break;
        case '\r':
            if (i + 1 < n && content[i + 1] == '\n') break; // consumed with the LF
            throw ParseError(path + ": bare CR at byte " + std::to_string(i));
        case '\n':
            end_record();
            break;
        default:
            field.push_back(c);
            break;
        }
        ++i;
    }
    if (in_quotes) throw ParseError(path + ": unterminated quoted field");
    if (!field.empty() || field_started_quoted || !record.empty()) end_record();
    return records;
}

Table table_from_csv(const std::string& path) {
    const auto records = parse_csv(read_file(path), path);
    if (records.empty()) throw ParseError(path + ": empty file, header row required");
    Table t;
    const auto& header = records[0];
    t.descriptors.resize(header.size());
    for (std::size_t j = 0; j < header.size(); ++j) {
        t.descriptors[j].name = trim(header[j]);
        t.descriptors[j].column = j;
    }
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() != header.size())
            throw SchemaError(path + ": row " + std::to_string(r) + " has " + std::to_string(rec.size()) +
                              " fields, header has " + std::to_string(header.size()));
        Row row(rec.size());
        for (std::size_t j = 0; j < rec.size(); ++j) {
            if (!rec[j].empty()) row[j] = rec[j];
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::optional<std::string> cell_from_json(const nlohmann::json& v, const std::string& context) {
    if (v.is_null()) return std::nullopt;
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    if (v.is_number_float()) return format_double(v.get<double>());
    throw ParseError(context + ": nested arrays/objects are not supported as cell values");
}

Table table_from_jsonl(const std::string& path) {
    const std::string content = read_file(path);
    Table t;
    std::unordered_map<std::string, std::size_t> column_of;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        const std::size_t eol = content.find('\n', pos);
        std::string line = content.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
        pos = eol == std::string::npos ? content.size() + 1 : eol + 1;
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!obj.is_object())
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected a JSON object");
        if (t.descriptors.empty()) {
            for (const auto& item : obj.items()) {
                FeatureDescriptor d;
                d.name = item.key();
                d.column = t.descriptors.size();
                column_of[d.name] = d.column;
                t.descriptors.push_back(std::move(d));
            }
        }
        Row row(t.descriptors.size());
        for (const auto& item : obj.items()) {
            const auto it = column_of.find(item.key());
            if (it == column_of.end())
                throw SchemaError(path + ":" + std::to_string(line_no) + ": unexpected field \"" + item.key() + "\"");
            row[it->second] = cell_from_json(item.value(), path + ":" + std::to_string(line_no));
        }
        t.rows.push_back(std::move(row));
    }
    if (t.descriptors.empty()) throw ParseError(path + ": no records");
    return t;
}

void profile_columns(Table& t) {
    for (auto& d : t.descriptors) {
        std::unordered_set<std::string> distinct;
        std::vector<double> numeric;
        bool all_numeric = true;
        for (const auto& row : t.rows) {
            const auto& cell = row[d.column];
            if (!cell) continue;
            distinct.insert(*cell);
            if (!all_numeric) continue;
            if (const auto v = parse_number(*cell))
                numeric.push_back(*v);
            else
                all_numeric = false;
        }
        d.distinct_count = distinct.size();
        if (all_numeric && !numeric.empty()) {
            d.kind = FeatureKind::numeric;
            d.observed_min = *std::min_element(numeric.begin(), numeric.end());
            d.observed_max = *std::max_element(numeric.begin(), numeric.end());
            if (numeric.size() >= 2) {
                double mean = 0.0;
                for (double v : numeric) mean += v;
                mean /= static_cast<double>(numeric.size());
                double ss = 0.0;
                for (double v : numeric) ss += (v - mean) * (v - mean);
                d.variance = ss / static_cast<double>(numeric.size() - 1);
            }
        } else {
            d.kind = FeatureKind::categorical;
        }
    }
}

std::size_t column_index(const Table& t, const std::string& name, const std::string& role) {
    for (const auto& d : t.descriptors)
        if (d.name == name) return d.column;
    throw SchemaError(role + " column \"" + name + "\" not found in dataset");
}

} // namespace

std::string feature_kind_name(FeatureKind k) {
    switch (k) {
    case FeatureKind::numeric: return "numeric";
    case FeatureKind::categorical: return "categorical";
    case FeatureKind::text: return "text";
    }
    return "categorical";
}

std::string task_kind_name(TaskKind k) {
    return k == TaskKind::classification ? "classification" : "regression";
}

TaskKind parse_task_kind(const std::string& name) {
    if (name == "classification") return TaskKind::classification;
    if (name == "regression") return TaskKind::regression;
    throw ConfigError("unknown task_kind: " + name);
}

DatasetManifest load_manifest(const std::string& manifest_path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(manifest_path + ": " + e.what());
    }
    if (!j.is_object()) throw ParseError(manifest_path + ": manifest must be a JSON object");
    DatasetManifest m;
    for (const char* key : {"path", "format", "task_kind", "label_field"})
        if (!j.contains(key)) throw SchemaError(manifest_path + ": missing required field \"" + std::string(key) + "\"");
    m.path = j.at("path").get<std::string>();
    m.format = j.at("format").get<std::string>();
    if (m.format != "csv" && m.format != "jsonl")
        throw ConfigError(manifest_path + ": format must be \"csv\" or \"jsonl\"");
    m.task_kind = parse_task_kind(j.at("task_kind").get<std::string>());
    m.label_field = j.at("label_field").get<std::string>();
    if (j.contains("text_field")) m.text_field = j.at("text_field").get<std::string>();
    if (j.contains("label_space")) m.label_space = j.at("label_space").get<std::vector<std::string>>();
    if (j.contains("description")) m.description = j.at("description").get<std::string>();

    std::filesystem::path data_path(m.path);
    if (data_path.is_relative())
        data_path = std::filesystem::path(manifest_path).parent_path() / data_path;
    m.path = data_path.string();
    if (j.contains("dataset_id"))
        m.dataset_id = j.at("dataset_id").get<std::string>();
    else
        m.dataset_id = data_path.stem().string();
    return m;
}

Table load_table(const std::string& path, const std::string& format) {
    Table t;
    if (format == "csv")
        t = table_from_csv(path);
    else if (format == "jsonl")
        t = table_from_jsonl(path);
    else
        throw ConfigError("unknown dataset format: " + format);
    profile_columns(t);
    return t;
}

Dataset load_dataset(const DatasetManifest& manifest) {
    Dataset ds;
    ds.manifest = manifest;
    ds.table = load_table(manifest.path, manifest.format);
    ds.label_column = column_index(ds.table, manifest.label_field, "label");
    if (!manifest.text_field.empty()) {
        ds.text_column = column_index(ds.table, manifest.text_field, "text");
        ds.table.descriptors[*ds.text_column].kind = FeatureKind::text;
    }

    ds.task.task_kind = manifest.task_kind;
    if (manifest.task_kind == TaskKind::classification) {
        ds.task.primary_metric = PrimaryMetric::accuracy;
        std::vector<std::string> observed;
        std::unordered_set<std::string> seen;
        for (const auto& row : ds.table.rows) {
            const auto& cell = row[ds.label_column];
            if (cell && seen.insert(*cell).second) observed.push_back(*cell);
        }
        if (observed.empty()) throw InsufficientData(manifest.dataset_id + ": no labeled rows");
        if (manifest.label_space.empty()) {
            ds.task.label_space = observed;
        } else {
            std::unordered_set<std::string> allowed(manifest.label_space.begin(), manifest.label_space.end());
            for (const auto& label : observed)
                if (!allowed.count(label))
                    throw SchemaError(manifest.dataset_id + ": observed label \"" + label +
                                      "\" not in the declared label_space");
            ds.task.label_space = manifest.label_space;
        }
    } else {
        ds.task.primary_metric = PrimaryMetric::r_squared;
        bool any = false;
        for (const auto& row : ds.table.rows) {
            const auto& cell = row[ds.label_column];
            if (!cell) continue;
            const auto v = parse_number(*cell);
            if (!v) throw SchemaError(manifest.dataset_id + ": regression label \"" + *cell + "\" is not numeric");
            if (!any) {
                ds.task.value_min = ds.task.value_max = *v;
                any = true;
            } else {
                ds.task.value_min = std::min(ds.task.value_min, *v);
                ds.task.value_max = std::max(ds.task.value_max, *v);
            }
        }
        if (!any) throw InsufficientData(manifest.dataset_id + ": no labeled rows");
    }
    return ds;
}

std::vector<std::size_t> complete_row_indices(const Table& table) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        if (std::all_of(row.begin(), row.end(), [](const Cell& c) { return c.has_value(); }))
            out.push_back(i);
    }
    return out;
}

EligibilityReport check_eligibility(const Table& table,
                                    std::size_t label_column,
                                    std::size_t min_rows) {
    EligibilityReport report;
    std::size_t features = 0;
    std::size_t numeric = 0;
    for (const auto& d : table.descriptors) {
        if (d.column == label_column) continue;
        ++features;
        if (d.kind == FeatureKind::numeric) ++numeric;
    }
    report.numeric_fraction = features == 0 ? 0.0 : static_cast<double>(numeric) / static_cast<double>(features);
    const auto complete = complete_row_indices(table);
    report.rows_retained = complete.size();
    report.rows_dropped_missing = table.rows.size() - complete.size();

    std::vector<std::string> reasons;
    if (!(report.numeric_fraction > 0.5))
        reasons.push_back("numeric feature fraction " + format_fixed(report.numeric_fraction, 2) +
                          " is not above 0.50");
    if (report.rows_retained < min_rows)
        reasons.push_back(std::to_string(report.rows_retained) + " rows retained after dropping " +
                          std::to_string(report.rows_dropped_missing) +
                          " rows with missing values; minimum is " + std::to_string(min_rows));
    report.eligible = reasons.empty();
    if (report.eligible) {
        report.reason = "eligible";
    } else {
        report.reason = reasons[0];
        for (std::size_t i = 1; i < reasons.size(); ++i) report.reason += "; " + reasons[i];
    }
    return report;
}

SplitSet split(const Table& table,
               const std::vector<std::size_t>& rows,
               std::size_t label_column,
               const TaskSpec& task,
               std::uint64_t seed) {
    const auto n = static_cast<long long>(rows.size());
    const long long n_train = std::llround(0.70 * static_cast<double>(n));
    const long long n_valid = std::llround(0.15 * static_cast<double>(n));
    const long long n_test = n - n_train - n_valid;
    if (n_train < 1 || n_valid < 1 || n_test < 1)
        throw DegenerateSplit("cannot form a 0.70/0.15/0.15 split from " + std::to_string(n) + " rows");

    SplitSet out;
    if (task.task_kind == TaskKind::classification) {
        out.stratified = true;
        std::unordered_map<std::string, std::vector<std::size_t>> by_label;
        for (std::size_t idx : rows) {
            const auto& cell = table.rows[idx][label_column];
            if (!cell) throw SchemaError("split row " + std::to_string(idx) + " has no label");
            if (std::find(task.label_space.begin(), task.label_space.end(), *cell) == task.label_space.end())
                throw SchemaError("label \"" + *cell + "\" outside the task label space");
            by_label[*cell].push_back(idx);
        }

        // Largest-remainder allocation of train slots across classes keeps
        // every per-class train proportion within one row of its global share.
        const std::size_t n_classes = task.label_space.size();
        std::vector<long long> quota(n_classes, 0);
        std::vector<double> remainder(n_classes, 0.0);
        long long assigned = 0;
        for (std::size_t c = 0; c < n_classes; ++c) {
            const auto it = by_label.find(task.label_space[c]);
            if (it == by_label.end() || it->second.empty())
                throw InsufficientData("class \"" + task.label_space[c] + "\" has no rows");
            const double exact = static_cast<double>(n_train) * static_cast<double>(it->second.size()) /
                                 static_cast<double>(n);
            quota[c] = static_cast<long long>(std::floor(exact));
            remainder[c] = exact - std::floor(exact);
            assigned += quota[c];
        }
        std::vector<std::size_t> order(n_classes);
        for (std::size_t c = 0; c < n_classes; ++c) order[c] = c;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
        for (std::size_t i = 0; assigned < n_train; ++i) {
            quota[order[i % n_classes]] += 1;
            ++assigned;
        }

        std::vector<std::size_t> pool;
        for (std::size_t c = 0; c < n_classes; ++c) {
            auto members = by_label[task.label_space[c]];
            RngStream rng(derive_seed(seed, {"split", "class", task.label_space[c]}));
            rng.shuffle(members);
            for (std::size_t i = 0; i < members.size(); ++i) {
                if (i < static_cast<std::size_t>(quota[c]))
                    out.train.push_back(members[i]);
                else
                    pool.push_back(members[i]);
            }
        }
        RngStream rng(derive_seed(seed, {"split", "rest"}));
        rng.shuffle(pool);
        out.valid.assign(pool.begin(), pool.begin() + n_valid);
        out.test.assign(pool.begin() + n_valid, pool.end());
    } else {
        out.stratified = false;
        std::vector<std::size_t> pool = rows;
        RngStream rng(derive_seed(seed, {"split", "plain"}));
        rng.shuffle(pool);
        out.train.assign(pool.begin(), pool.begin() + n_train);
        out.valid.assign(pool.begin() + n_train, pool.begin() + n_train + n_valid);
        out.test.assign(pool.begin() + n_train + n_valid, pool.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.valid.begin(), out.valid.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

std::vector<FeatureDescriptor> select_features(const std::vector<FeatureDescriptor>& features,
                                               std::size_t cap) {
    if (cap < 1) throw ConfigError("feature cap must be at least 1");
    std::vector<FeatureDescriptor> numeric;
    for (const auto& d : features)
        if (d.kind == FeatureKind::numeric) numeric.push_back(d);
    if (numeric.empty()) throw NoNumericFeatures("no numeric features available for selection");
    std::stable_sort(numeric.begin(), numeric.end(), [](const FeatureDescriptor& a, const FeatureDescriptor& b) {
        if (a.variance != b.variance) return a.variance > b.variance;
        return a.column < b.column;
    });
    if (numeric.size() > cap) numeric.resize(cap);
    std::sort(numeric.begin(), numeric.end(),
              [](const FeatureDescriptor& a, const FeatureDescriptor& b) { return a.column < b.column; });
    return numeric;
}

} // namespace judgecal
