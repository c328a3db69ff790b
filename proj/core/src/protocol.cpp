#include "judgecal/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "judgecal/errors.hpp"
#include "judgecal/text.hpp"

namespace fs = std::filesystem;

namespace judgecal {

namespace {

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<std::string> resolve_noise_kinds(const std::string& kind) {
    if (kind == "uncorrelated" || kind == "correlated" || kind == "lexical") return {kind};
    if (kind == "both") return {"uncorrelated", "correlated"};
    throw ConfigError("noise kind must be uncorrelated, correlated, lexical, or both; got \"" + kind + "\"");
}

struct Cell {
    std::string kind; // "clean" or a noise kind
    int k = -1;
    int r = 0;
    double severity = 0.0;
    double intensity = 0.0;
};

std::string cell_name(const Cell& c) {
    return c.kind + "_k" + std::to_string(c.k) + "_r" + std::to_string(c.r);
}

class Engine {
public:
    Engine(RunConfig config, std::string run_dir) : config_(std::move(config)), run_dir_(std::move(run_dir)) {
        if (!config_.manifest_path.empty() && fs::path(config_.manifest_path).is_relative())
            config_.manifest_path = fs::absolute(config_.manifest_path).string();
        config_.validate();
        hash_ = config_hash(config_);
    }

    RunOutcome run(bool baseline_only);

private:
    void prepare();
    void open_run_dir();
    std::vector<Cell> plan(bool baseline_only) const;
    TrialRecord execute_cell(const Cell& cell);
    std::vector<Row> materialize_rows(const Cell& cell, RngStream& noise_rng) const;
    std::vector<JudgePrediction> query_remote(const Cell& cell, const std::vector<Row>& rows);
    std::vector<JudgePrediction> query_sim(const Cell& cell, const std::vector<Row>& rows);
    MetricReport score(const std::vector<JudgePrediction>& preds) const;
    void persist(const TrialRecord& rec);
    std::size_t batch_size() const;
    const GaussianNoiseSampler& sampler(const std::string& kind) const;

    RunConfig config_;
    std::string run_dir_;
    std::string hash_;

    Dataset ds_;
    std::vector<std::string> kinds_;
    bool tabular_ = false;
    SplitSet splits_;
    std::vector<FeatureDescriptor> selected_;
    SignalStats stats_;
    std::unique_ptr<GaussianNoiseSampler> sampler_unc_;
    std::unique_ptr<GaussianNoiseSampler> sampler_corr_;
    std::vector<std::size_t> few_shot_;
    std::vector<std::string> fs_bodies_;
    std::vector<std::string> fs_labels_;
    std::string system_text_;
    std::vector<std::size_t> eval_rows_;
    std::vector<std::string> eval_ids_;
    std::vector<std::string> truth_labels_;
    std::vector<double> truth_values_;
    CentroidModel centroid_;
    bool have_centroid_ = false;

    std::ofstream trials_out_;
    std::mutex io_mutex_;
    std::map<std::string, TrialRecord> done_; // keyed by cell_name
};

void Engine::prepare() {
    ds_ = load_dataset(load_manifest(config_.manifest_path));
    kinds_ = resolve_noise_kinds(config_.noise.kind);
    tabular_ = kinds_[0] != "lexical";

    const auto min_rows = static_cast<std::size_t>(config_.min_rows);
    if (tabular_) {
        const auto report = check_eligibility(ds_.table, ds_.label_column, min_rows);
        if (!report.eligible) throw EligibilityError(ds_.manifest.dataset_id + ": " + report.reason);
        config_.noise.snr_schedule.validate();
    } else {
        if (!ds_.text_column)
            throw ConfigError(ds_.manifest.dataset_id + ": lexical noise needs a text field in the manifest");
        config_.noise.severity_schedule.validate();
        config_.noise.corruption.validate();
    }

    const auto complete = complete_row_indices(ds_.table);
    if (complete.size() < min_rows)
        throw EligibilityError(ds_.manifest.dataset_id + ": only " + std::to_string(complete.size()) +
                               " complete rows, minimum is " + std::to_string(min_rows));
    splits_ = split(ds_.table, complete, ds_.label_column, ds_.task,
                    derive_seed(config_.master_seed, {ds_.manifest.dataset_id, "split"}));

    const bool need_features = tabular_ || config_.judge.kind == JudgeKind::sim_centroid;
    if (need_features) {
        std::vector<FeatureDescriptor> candidates;
        for (const auto& d : ds_.table.descriptors)
            if (d.column != ds_.label_column) candidates.push_back(d);
        selected_ = select_features(candidates, static_cast<std::size_t>(config_.feature_cap));
    }
    if (tabular_) {
        stats_ = estimate_signal_stats(ds_.table, splits_.train, selected_);
        sampler_unc_ = std::make_unique<GaussianNoiseSampler>(stats_, NoiseKind::uncorrelated);
        sampler_corr_ = std::make_unique<GaussianNoiseSampler>(stats_, NoiseKind::correlated);
    }

    few_shot_ = splits_.train;
    RngStream fs_rng(derive_seed(config_.master_seed, {ds_.manifest.dataset_id, "fewshot"}));
    fs_rng.shuffle(few_shot_);
    if (few_shot_.size() > static_cast<std::size_t>(config_.n_context))
        few_shot_.resize(static_cast<std::size_t>(config_.n_context));

    // The few-shot block is serialized once from clean rows and reused by
    // every cell, so the context is byte-identical across the whole run.
    const auto text_col = tabular_ ? std::nullopt : ds_.text_column;
    for (std::size_t idx : few_shot_) {
        fs_bodies_.push_back(serialize_example(ds_.table.rows[idx], selected_, text_col));
        const auto& label = ds_.table.rows[idx][ds_.label_column];
        if (!label) throw SchemaError("few-shot row without a label");
        fs_labels_.push_back(*label);
    }
    system_text_ = build_system_prompt(ds_.task, ds_.manifest);

    eval_rows_ = config_.perturb_split == "train" ? splits_.train : splits_.test;
    for (std::size_t idx : eval_rows_) {
        eval_ids_.push_back(std::to_string(idx));
        const auto& label = ds_.table.rows[idx][ds_.label_column];
        if (!label) throw SchemaError("evaluation row without a label");
        if (ds_.task.task_kind == TaskKind::classification) {
            truth_labels_.push_back(*label);
        } else {
            const auto v = parse_number(*label);
            if (!v) throw SchemaError("regression label \"" + *label + "\" is not numeric");
            truth_values_.push_back(*v);
        }
    }

    if (config_.judge.kind == JudgeKind::sim_centroid) {
        centroid_ = fit_centroids(ds_.table, few_shot_, ds_.label_column, selected_, ds_.task);
        have_centroid_ = true;
    }
}

void Engine::open_run_dir() {
    if (run_dir_.empty()) return;
    fs::create_directories(run_dir_);
    fs::create_directories(fs::path(run_dir_) / "transcripts");

    const fs::path config_path = fs::path(run_dir_) / "config.json";
    if (fs::exists(config_path)) {
        std::ifstream in(config_path);
        nlohmann::json stored;
        try {
            in >> stored;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(config_path.string() + ": " + e.what());
        }
        const std::string stored_hash = stored.value("config_hash", "");
        stored.erase("config_hash");
        const std::string recomputed = hash_hex(fnv1a64(stored.dump()));
        if (recomputed != stored_hash)
            throw ConfigMismatch(config_path.string() + " was edited after the run started");
        if (stored_hash != hash_)
            throw ConfigMismatch("run directory belongs to a different configuration (stored " +
                                 stored_hash + ", requested " + hash_ + ")");
    } else {
        nlohmann::json j = canonical_config_json(config_);
        j["config_hash"] = hash_;
        std::ofstream out(config_path);
        if (!out) throw IoError("cannot write " + config_path.string());
        out << j.dump(2) << "\n";
    }

    const fs::path trials_path = fs::path(run_dir_) / "trials.jsonl";
    if (fs::exists(trials_path)) {
        std::ifstream in(trials_path);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            TrialRecord rec;
            try {
                from_json(nlohmann::json::parse(line), rec);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(trials_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
            }
            Cell cell{rec.noise_kind, rec.level_index, rec.rep, 0.0, 0.0};
            done_[cell_name(cell)] = std::move(rec);
        }
    }
    trials_out_.open(trials_path, std::ios::app);
    if (!trials_out_) throw IoError("cannot append to " + trials_path.string());
}

std::vector<Cell> Engine::plan(bool baseline_only) const {
    std::vector<Cell> cells;
    for (int r = 0; r < config_.clean_trials; ++r) cells.push_back(Cell{"clean", -1, r, 0.0, 0.0});
    if (baseline_only) return cells;
    for (const auto& kind : kinds_) {
        const std::size_t n_levels =
            tabular_ ? config_.noise.snr_schedule.size() : config_.noise.severity_schedule.size();
        for (std::size_t k = 0; k < n_levels; ++k) {
            const double severity = tabular_ ? config_.noise.snr_schedule.levels_db[k]
                                             : config_.noise.severity_schedule.levels[k];
            const double intensity = tabular_ ? config_.noise.snr_schedule.intensity(k)
                                              : config_.noise.severity_schedule.intensity(k);
            for (int r = 0; r < config_.repetitions; ++r)
                cells.push_back(Cell{kind, static_cast<int>(k), r, severity, intensity});
        }
    }
    return cells;
}

std::size_t Engine::batch_size() const {
    if (config_.batch_size > 0) return static_cast<std::size_t>(config_.batch_size);
    return ds_.text_column ? 50 : 500;
}

const GaussianNoiseSampler& Engine::sampler(const std::string& kind) const {
    return kind == "correlated" ? *sampler_corr_ : *sampler_unc_;
}

std::vector<Row> Engine::materialize_rows(const Cell& cell, RngStream& noise_rng) const {
    std::vector<Row> rows;
    rows.reserve(eval_rows_.size());
    if (cell.kind == "clean") {
        for (std::size_t idx : eval_rows_) rows.push_back(ds_.table.rows[idx]);
        return rows;
    }
    if (cell.kind == "lexical") {
        const double alpha = cell.severity;
        for (std::size_t idx : eval_rows_) {
            Row row = ds_.table.rows[idx];
            auto& cell_text = row[*ds_.text_column];
            if (!cell_text) throw SchemaError("evaluation row without text");
            cell_text = corrupt_text(*cell_text, alpha, config_.noise.corruption, noise_rng);
            rows.push_back(std::move(row));
        }
        return rows;
    }
    const double alpha = snr_to_alpha(cell.severity);
    const auto& s = sampler(cell.kind);
    for (std::size_t idx : eval_rows_)
        rows.push_back(perturb_row(ds_.table.rows[idx], stats_, s, alpha, noise_rng));
    return rows;
}

std::vector<JudgePrediction> Engine::query_remote(const Cell& cell, const std::vector<Row>& rows) {
    TranscriptFn transcript = nullptr;
    std::shared_ptr<std::ofstream> out;
    if (!run_dir_.empty()) {
        const fs::path path = fs::path(run_dir_) / "transcripts" / (cell_name(cell) + ".jsonl");
        out = std::make_shared<std::ofstream>(path, std::ios::trunc);
        if (!*out) throw IoError("cannot write " + path.string());
        transcript = [out](const nlohmann::json& j) { *out << j.dump() << "\n"; };
    }

    // JUDGECAL_BACKOFF_MS overrides the initial transport backoff (test hook).
    int backoff_ms = 1000;
    if (const char* env = std::getenv("JUDGECAL_BACKOFF_MS")) {
        const auto v = parse_number(env);
        if (v && *v >= 0) backoff_ms = static_cast<int>(*v);
    }
    RemoteJudgeClient client(config_.judge, 5, backoff_ms, transcript);
    const QueryFn query = [&client](const PromptBundle& b) { return client.query(b); };
    const auto text_col = tabular_ ? std::nullopt : ds_.text_column;
    const std::size_t step = batch_size();

    std::vector<JudgePrediction> preds;
    preds.reserve(rows.size());
    for (std::size_t start = 0; start < rows.size(); start += step) {
        const std::size_t stop = std::min(start + step, rows.size());
        std::vector<std::string> bodies, ids;
        bodies.reserve(stop - start);
        ids.reserve(stop - start);
        for (std::size_t i = start; i < stop; ++i) {
            bodies.push_back(serialize_example(rows[i], selected_, text_col));
            ids.push_back(eval_ids_[i]);
        }
        const auto bundle = build_user_prompt(system_text_, fs_bodies_, fs_labels_, bodies, ids,
                                              config_.char_budget);
        auto batch = execute_batch(query, bundle, ds_.task, transcript);
        preds.insert(preds.end(), std::make_move_iterator(batch.begin()),
                     std::make_move_iterator(batch.end()));
    }
    return preds;
}

std::vector<JudgePrediction> Engine::query_sim(const Cell& cell, const std::vector<Row>& rows) {
    std::vector<SimEvalExample> examples;
    examples.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        SimEvalExample ex;
        ex.id = eval_ids_[i];
        if (ds_.task.task_kind == TaskKind::classification)
            ex.true_label = truth_labels_[i];
        else
            ex.true_value = truth_values_[i];
        if (have_centroid_) {
            ex.features.reserve(selected_.size());
            for (const auto& feature : selected_) {
                const auto& c = rows[i][feature.column];
                if (!c) throw SchemaError("evaluation row misses feature \"" + feature.name + "\"");
                const auto v = parse_number(*c);
                if (!v) throw SchemaError("feature \"" + feature.name + "\" is not numeric");
                ex.features.push_back(*v);
            }
        }
        examples.push_back(std::move(ex));
    }
    const std::uint64_t seed = derive_seed(cell_seed(config_.master_seed, ds_.manifest.dataset_id,
                                                     cell.kind, cell.k, cell.r),
                                           {"judge", std::to_string(config_.judge.seed)});
    RngStream judge_rng(seed);
    return sim_predict(config_.judge, have_centroid_ ? &centroid_ : nullptr, examples, ds_.task,
                       cell.intensity, judge_rng);
}

MetricReport Engine::score(const std::vector<JudgePrediction>& preds) const {
    if (ds_.task.task_kind == TaskKind::classification)
        return score_classification(preds, truth_labels_, ds_.task.label_space);
    return score_regression(preds, truth_values_);
}

TrialRecord Engine::execute_cell(const Cell& cell) {
    TrialRecord rec;
    rec.dataset_id = ds_.manifest.dataset_id;
    rec.noise_kind = cell.kind;
    rec.level_index = cell.k;
    rec.severity = cell.severity;
    rec.intensity = cell.intensity;
    rec.rep = cell.r;
    rec.rng_seed = cell_seed(config_.master_seed, ds_.manifest.dataset_id, cell.kind, cell.k, cell.r);
    rec.judge_fingerprint = config_.judge.fingerprint();
    rec.started_at = iso8601_utc_now();

    RngStream noise_rng(derive_seed(rec.rng_seed, {"noise"}));
    const auto rows = materialize_rows(cell, noise_rng);
    const auto preds = config_.judge.kind == JudgeKind::remote ? query_remote(cell, rows)
                                                               : query_sim(cell, rows);
    rec.metrics = score(preds);
    rec.finished_at = iso8601_utc_now();
    persist(rec);
    return rec;
}

void Engine::persist(const TrialRecord& rec) {
    if (run_dir_.empty()) return;
    const nlohmann::json j = rec;
    std::lock_guard<std::mutex> lock(io_mutex_);
    trials_out_ << j.dump() << "\n";
    trials_out_.flush();
}

RunOutcome Engine::run(bool baseline_only) {
    prepare();
    open_run_dir();

    const auto cells = plan(baseline_only);
    std::vector<TrialRecord> records(cells.size());
    std::vector<bool> present(cells.size(), false);
    std::vector<std::string> failures;

    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto it = done_.find(cell_name(cells[i]));
        if (it != done_.end()) {
            records[i] = it->second;
            present[i] = true;
        } else {
            pending.push_back(i);
        }
    }

    // Transport-class failures mark the cell failed and the run continues;
    // anything else (auth, config, schema) aborts the whole run.
    auto record_failure = [&](std::size_t i, const char* what) {
        std::lock_guard<std::mutex> lock(io_mutex_);
        failures.push_back(cell_name(cells[i]) + ": " + what);
    };
    auto run_one = [&](std::size_t i) {
        try {
            records[i] = execute_cell(cells[i]);
            present[i] = true;
        } catch (const TransportError& e) {
            record_failure(i, e.what());
        } catch (const RateLimited& e) {
            record_failure(i, e.what());
        } catch (const NoScoredPredictions& e) {
            record_failure(i, e.what());
        }
    };

    const bool concurrent = config_.judge.kind == JudgeKind::remote && config_.max_in_flight > 1 &&
                            pending.size() > 1;
    if (concurrent) {
        std::atomic<std::size_t> next{0};
        std::atomic<bool> abort{false};
        std::exception_ptr fatal;
        std::mutex fatal_mutex;
        const std::size_t n_workers =
            std::min<std::size_t>(static_cast<std::size_t>(config_.max_in_flight), pending.size());
        std::vector<std::thread> workers;
        workers.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w)
            workers.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < pending.size() && !abort.load();
                     i = next.fetch_add(1)) {
                    try {
                        run_one(pending[i]);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(fatal_mutex);
                        if (!fatal) fatal = std::current_exception();
                        abort.store(true);
                    }
                }
            });
        for (auto& t : workers) t.join();
        if (fatal) std::rethrow_exception(fatal);
    } else {
        for (std::size_t i : pending) run_one(i);
    }

    RunOutcome outcome;
    outcome.run_dir = run_dir_;
    for (std::size_t i = 0; i < cells.size(); ++i)
        if (present[i]) outcome.trials.push_back(records[i]);

    if (baseline_only) {
        if (outcome.trials.empty())
            throw PartialRun("baseline failed: " + (failures.empty() ? "no trials" : failures.front()));
        return outcome;
    }

    std::size_t expected = 0, got = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].kind == "clean") continue;
        ++expected;
        if (present[i]) ++got;
    }
    if (expected > 0 && static_cast<double>(got) < 0.8 * static_cast<double>(expected)) {
        std::string msg = "only " + std::to_string(got) + " of " + std::to_string(expected) +
                          " noise trials completed";
        if (!failures.empty()) msg += "; first failure: " + failures.front();
        throw PartialRun(msg);
    }

    CalibrationVerdict& verdict = outcome.verdict;
    verdict.dataset_id = ds_.manifest.dataset_id;
    verdict.config_hash = hash_;
    verdict.run_id = ds_.manifest.dataset_id + "-" + hash_.substr(0, 8);
    verdict.expected_trials = expected;
    verdict.n_trials = got;
    bool any_sensitive = false;
    for (const auto& kind : kinds_) {
        std::vector<std::pair<double, double>> observations;
        for (std::size_t i = 0; i < cells.size(); ++i)
            if (present[i] && cells[i].kind == kind)
                observations.emplace_back(cells[i].intensity, records[i].metrics.primary);
        const auto result = slope_test(ols_fit(observations), config_.alpha_level);
        any_sensitive = any_sensitive || result.decision == Decision::sensitive;
        verdict.per_kind[kind] = result;
    }
    verdict.combined = any_sensitive ? Decision::sensitive : Decision::insensitive;

    if (!run_dir_.empty()) {
        const fs::path path = fs::path(run_dir_) / "verdict.json";
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw IoError("cannot write " + path.string());
        const nlohmann::json j = verdict;
        out << j.dump(2) << "\n";
    }
    return outcome;
}

} // namespace

void RunConfig::validate() const {
    if (manifest_path.empty()) throw ConfigError("missing dataset manifest path");
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (n_context < 0) throw ConfigError("n_context must be >= 0");
    if (feature_cap < 1) throw ConfigError("feature_cap must be >= 1");
    if (batch_size < 0) throw ConfigError("batch_size must be >= 0");
    if (!(alpha_level > 0.0 && alpha_level < 1.0)) throw ConfigError("alpha_level must lie in (0, 1)");
    if (min_rows < 1) throw ConfigError("min_rows must be >= 1");
    if (clean_trials < 1) throw ConfigError("clean_trials must be >= 1");
    if (perturb_split != "test" && perturb_split != "train")
        throw ConfigError("perturb_split must be \"test\" or \"train\"");
    if (char_budget < 1) throw ConfigError("char_budget must be >= 1");
    if (max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
    resolve_noise_kinds(noise.kind);
    judge.validate();
}

std::uint64_t cell_seed(std::uint64_t master_seed,
                        const std::string& dataset_id,
                        const std::string& noise_kind,
                        int level_index,
                        int rep) {
    return derive_seed(master_seed,
                       {dataset_id, noise_kind, std::to_string(level_index), std::to_string(rep)});
}

void to_json(nlohmann::json& j, const NoiseConfig& c) {
    j = nlohmann::json{{"kind", c.kind},
                       {"snr_schedule_db", c.snr_schedule.levels_db},
                       {"severity_schedule", c.severity_schedule.levels},
                       {"corruption", c.corruption}};
}

void from_json(const nlohmann::json& j, NoiseConfig& c) {
    c = NoiseConfig{};
    if (j.contains("kind")) j.at("kind").get_to(c.kind);
    if (j.contains("snr_schedule_db")) j.at("snr_schedule_db").get_to(c.snr_schedule.levels_db);
    if (j.contains("severity_schedule")) j.at("severity_schedule").get_to(c.severity_schedule.levels);
    if (j.contains("corruption")) j.at("corruption").get_to(c.corruption);
}

void to_json(nlohmann::json& j, const RunConfig& c) {
    j = nlohmann::json{{"manifest", c.manifest_path},
                       {"noise", c.noise},
                       {"repetitions", c.repetitions},
                       {"n_context", c.n_context},
                       {"feature_cap", c.feature_cap},
                       {"batch_size", c.batch_size},
                       {"judge", c.judge},
                       {"alpha_level", c.alpha_level},
                       {"master_seed", c.master_seed},
                       {"output_dir", c.output_dir},
                       {"min_rows", c.min_rows},
                       {"clean_trials", c.clean_trials},
                       {"perturb_split", c.perturb_split},
                       {"char_budget", c.char_budget},
                       {"max_in_flight", c.max_in_flight}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig c;
    if (!j.contains("manifest")) throw ConfigError("config is missing the required field \"manifest\"");
    j.at("manifest").get_to(c.manifest_path);
    if (j.contains("noise")) j.at("noise").get_to(c.noise);
    if (j.contains("repetitions")) j.at("repetitions").get_to(c.repetitions);
    if (j.contains("n_context")) j.at("n_context").get_to(c.n_context);
    if (j.contains("feature_cap")) j.at("feature_cap").get_to(c.feature_cap);
    if (j.contains("batch_size")) j.at("batch_size").get_to(c.batch_size);
    if (j.contains("judge")) j.at("judge").get_to(c.judge);
    if (j.contains("alpha_level")) j.at("alpha_level").get_to(c.alpha_level);
    if (j.contains("master_seed")) j.at("master_seed").get_to(c.master_seed);
    if (j.contains("output_dir")) j.at("output_dir").get_to(c.output_dir);
    if (j.contains("min_rows")) j.at("min_rows").get_to(c.min_rows);
    if (j.contains("clean_trials")) j.at("clean_trials").get_to(c.clean_trials);
    if (j.contains("perturb_split")) j.at("perturb_split").get_to(c.perturb_split);
    if (j.contains("char_budget")) j.at("char_budget").get_to(c.char_budget);
    if (j.contains("max_in_flight")) j.at("max_in_flight").get_to(c.max_in_flight);
    return c;
}

namespace {

// key=value lines with dotted keys; '#' starts a comment. The judge value is
// the same string form the CLI accepts.
nlohmann::json config_json_from_kv(const std::string& content, const std::string& path) {
    nlohmann::json j = nlohmann::json::object();
    std::istringstream in(content);
    std::string line;
    std::size_t line_no = 0;
    auto parse_list = [](const std::string& text) {
        std::vector<double> values;
        for (const auto& part : split(text, ',')) {
            const auto v = parse_number(part);
            if (!v) throw ConfigError("expected a comma-separated list of numbers, got \"" + text + "\"");
            values.push_back(*v);
        }
        return values;
    };
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.resize(hash_pos);
        const auto trimmed = trim(line);
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key(trim(trimmed.substr(0, eq)));
        const std::string value(trim(trimmed.substr(eq + 1)));

        if (key == "manifest" || key == "output_dir" || key == "perturb_split") {
            j[key] = value;
        } else if (key == "judge") {
            j["judge"] = parse_judge_spec(value);
        } else if (key == "noise.kind") {
            j["noise"]["kind"] = value;
        } else if (key == "noise.snr_schedule_db") {
            j["noise"]["snr_schedule_db"] = parse_list(value);
        } else if (key == "noise.severity_schedule") {
            j["noise"]["severity_schedule"] = parse_list(value);
        } else if (key == "noise.p_max") {
            j["noise"]["corruption"]["p_max"] = parse_number(value).value_or(-1.0);
        } else if (key == "noise.mask_token") {
            j["noise"]["corruption"]["mask_token"] = value;
        } else if (key.rfind("noise.op_weights.", 0) == 0) {
            const auto v = parse_number(value);
            if (!v) throw ConfigError(path + ": invalid weight for " + key);
            j["noise"]["corruption"]["op_weights"][key.substr(17)] = *v;
        } else if (key == "alpha_level") {
            const auto v = parse_number(value);
            if (!v) throw ConfigError(path + ": invalid number for " + key);
            j[key] = *v;
        } else if (key == "repetitions" || key == "n_context" || key == "feature_cap" ||
                   key == "batch_size" || key == "min_rows" || key == "clean_trials" ||
                   key == "max_in_flight") {
            const auto v = parse_number(value);
            if (!v) throw ConfigError(path + ": invalid integer for " + key);
            j[key] = static_cast<long long>(*v);
        } else if (key == "master_seed" || key == "char_budget") {
            const auto v = parse_number(value);
            if (!v || *v < 0) throw ConfigError(path + ": invalid value for " + key);
            j[key] = static_cast<std::uint64_t>(*v);
        } else {
            throw ConfigError(path + ": unknown config key \"" + key + "\"");
        }
    }
    return j;
}

} // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string content = buf.str();

    nlohmann::json j;
    const auto first = content.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && content[first] == '{') {
        try {
            j = nlohmann::json::parse(content);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + ": " + e.what());
        }
        j.erase("config_hash"); // harmless when reading back a persisted run config
    } else {
        j = config_json_from_kv(content, path);
    }
    RunConfig config = run_config_from_json(j);
    if (!config.manifest_path.empty() && fs::path(config.manifest_path).is_relative())
        config.manifest_path = (fs::absolute(fs::path(path)).parent_path() / config.manifest_path).string();
    return config;
}

nlohmann::json canonical_config_json(const RunConfig& config) {
    return nlohmann::json(config); // nlohmann objects keep keys sorted
}

std::string config_hash(const RunConfig& config) {
    return hash_hex(fnv1a64(canonical_config_json(config).dump()));
}

void to_json(nlohmann::json& j, const TrialRecord& t) {
    j = nlohmann::json{{"dataset_id", t.dataset_id},
                       {"noise_kind", t.noise_kind},
                       {"level_index", t.level_index},
                       {"severity", t.severity},
                       {"intensity", t.intensity},
                       {"rep", t.rep},
                       {"metrics", t.metrics},
                       {"started_at", t.started_at},
                       {"finished_at", t.finished_at},
                       {"rng_seed", t.rng_seed},
                       {"judge_fingerprint", t.judge_fingerprint}};
}

void from_json(const nlohmann::json& j, TrialRecord& t) {
    j.at("dataset_id").get_to(t.dataset_id);
    j.at("noise_kind").get_to(t.noise_kind);
    j.at("level_index").get_to(t.level_index);
    j.at("severity").get_to(t.severity);
    j.at("intensity").get_to(t.intensity);
    j.at("rep").get_to(t.rep);
    j.at("metrics").get_to(t.metrics);
    j.at("started_at").get_to(t.started_at);
    j.at("finished_at").get_to(t.finished_at);
    j.at("rng_seed").get_to(t.rng_seed);
    j.at("judge_fingerprint").get_to(t.judge_fingerprint);
}

void to_json(nlohmann::json& j, const CalibrationVerdict& v) {
    j = nlohmann::json{{"dataset_id", v.dataset_id},
                       {"run_id", v.run_id},
                       {"config_hash", v.config_hash},
                       {"per_kind", v.per_kind},
                       {"combined", decision_name(v.combined)},
                       {"n_trials", v.n_trials},
                       {"expected_trials", v.expected_trials}};
}

void from_json(const nlohmann::json& j, CalibrationVerdict& v) {
    j.at("dataset_id").get_to(v.dataset_id);
    j.at("run_id").get_to(v.run_id);
    j.at("config_hash").get_to(v.config_hash);
    j.at("per_kind").get_to(v.per_kind);
    v.combined = j.at("combined").get<std::string>() == "sensitive" ? Decision::sensitive
                                                                    : Decision::insensitive;
    j.at("n_trials").get_to(v.n_trials);
    j.at("expected_trials").get_to(v.expected_trials);
}

MetricReport run_baseline(const RunConfig& config) {
    Engine engine(config, config.output_dir);
    const auto outcome = engine.run(true);
    return outcome.trials.front().metrics;
}

RunOutcome run_calibration(const RunConfig& config) {
    Engine engine(config, config.output_dir);
    return engine.run(false);
}

RunOutcome resume(const std::string& run_dir) {
    const fs::path config_path = fs::path(run_dir) / "config.json";
    if (!fs::exists(config_path)) throw NoRunsFound(run_dir + " has no config.json");
    RunConfig config = load_run_config(config_path.string());
    Engine engine(config, run_dir);
    return engine.run(false);
}

std::vector<TrialRecord> load_trials(const std::string& run_dir) {
    const fs::path path = fs::path(run_dir) / "trials.jsonl";
    std::ifstream in(path);
    if (!in) throw NoRunsFound(run_dir + " has no trials.jsonl");
    std::vector<TrialRecord> trials;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            trials.push_back(nlohmann::json::parse(line).get<TrialRecord>());
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return trials;
}

CalibrationVerdict load_verdict(const std::string& run_dir) {
    const fs::path path = fs::path(run_dir) / "verdict.json";
    std::ifstream in(path);
    if (!in) throw NoRunsFound(run_dir + " has no verdict.json");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return j.get<CalibrationVerdict>();
}

GroupComparisonData compare_groups(const std::vector<std::string>& sensitive_dirs,
                                   const std::vector<std::string>& insensitive_dirs,
                                   int n_resamples,
                                   std::uint64_t seed) {
    if (sensitive_dirs.empty() || insensitive_dirs.empty())
        throw EmptyGroup("both groups need at least one run directory");

    struct PerDataset {
        double median_primary, std_dev, iqr, range;
        TaskKind kind;
    };
    auto summarize = [](const std::string& dir) {
        const auto trials = load_trials(dir);
        std::vector<double> clean;
        TaskKind kind = TaskKind::classification;
        for (const auto& t : trials) {
            if (t.noise_kind != "clean") continue;
            clean.push_back(t.metrics.primary);
            kind = t.metrics.task_kind;
        }
        if (clean.size() < 2)
            throw InsufficientData(dir + " has " + std::to_string(clean.size()) +
                                   " clean-baseline trials, the group study needs at least 2");
        const auto d = dispersion(clean);
        return PerDataset{d.median, d.std_dev, d.iqr, d.range, kind};
    };

    std::vector<PerDataset> sens, insens;
    for (const auto& dir : sensitive_dirs) sens.push_back(summarize(dir));
    for (const auto& dir : insensitive_dirs) insens.push_back(summarize(dir));

    bool all_classification = true, all_regression = true;
    for (const auto* group : {&sens, &insens})
        for (const auto& p : *group) {
            all_classification = all_classification && p.kind == TaskKind::classification;
            all_regression = all_regression && p.kind == TaskKind::regression;
        }
    const std::string primary_name = all_classification ? "Accuracy" : (all_regression ? "R^2" : "Primary");

    GroupComparisonData data;
    data.table.n_sensitive = sens.size();
    data.table.n_insensitive = insens.size();
    data.table.n_resamples = n_resamples;
    for (const auto& p : sens) data.sensitive_primary.push_back(p.median_primary);
    for (const auto& p : insens) data.insensitive_primary.push_back(p.median_primary);

    const std::vector<std::pair<std::string, double PerDataset::*>> rows{
        {primary_name, &PerDataset::median_primary},
        {"Std Dev", &PerDataset::std_dev},
        {"IQR", &PerDataset::iqr},
        {"Range", &PerDataset::range},
    };
    for (const auto& [name, member] : rows) {
        std::vector<double> a, b;
        for (const auto& p : sens) a.push_back(p.*member);
        for (const auto& p : insens) b.push_back(p.*member);
        const auto ci = bootstrap_median_diff(a, b, n_resamples, derive_seed(seed, {"compare", name}));
        GroupComparisonRow row;
        row.metric = name;
        row.median_sensitive = median(a);
        row.median_insensitive = median(b);
        row.ratio = row.median_sensitive / row.median_insensitive;
        row.delta_median = ci.delta_median;
        row.ci_low = ci.ci_low;
        row.ci_high = ci.ci_high;
        data.table.rows.push_back(std::move(row));
    }
    return data;
}

} // namespace judgecal
