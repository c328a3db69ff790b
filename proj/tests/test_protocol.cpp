#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "judgecal/errors.hpp"
#include "judgecal/protocol.hpp"
#include "judgecal/rng.hpp"
#include "judgecal/text.hpp"

using namespace judgecal;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "judgecal_protocol_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    REQUIRE(out.good());
    out << content;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> file_lines(const fs::path& path) {
    std::vector<std::string> lines;
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

// 60 rows, f1 separates the classes, f2/f3 carry independent noise.
std::string write_tabular_fixture(const fs::path& dir, std::size_t n_rows = 60) {
    RngStream rng(424242);
    std::string csv = "f1,f2,f3,label\n";
    for (std::size_t i = 0; i < n_rows; ++i) {
        const bool pos = i % 2 == 0;
        csv += format_double((pos ? 3.0 : -3.0) + rng.normal()) + ",";
        csv += format_double(rng.normal() * 2.0) + ",";
        csv += format_double(rng.normal() * 0.5) + ",";
        csv += pos ? "pos\n" : "neg\n";
    }
    write_file(dir / "data.csv", csv);
    const nlohmann::json manifest{{"dataset_id", "synth"},
                                  {"path", "data.csv"},
                                  {"format", "csv"},
                                  {"task_kind", "classification"},
                                  {"label_field", "label"}};
    write_file(dir / "manifest.json", manifest.dump(2));
    return (dir / "manifest.json").string();
}

std::string write_text_fixture(const fs::path& dir, std::size_t n_rows = 60) {
    std::string jsonl;
    for (std::size_t i = 0; i < n_rows; ++i) {
        const bool spam = i % 2 == 0;
        const nlohmann::json row{
            {"text", std::string(spam ? "win a free prize today number " : "meeting notes for project number ") +
                         std::to_string(i)},
            {"label", spam ? "spam" : "ham"}};
        jsonl += row.dump() + "\n";
    }
    write_file(dir / "data.jsonl", jsonl);
    const nlohmann::json manifest{{"dataset_id", "textset"},
                                  {"path", "data.jsonl"},
                                  {"format", "jsonl"},
                                  {"task_kind", "classification"},
                                  {"label_field", "label"},
                                  {"text_field", "text"}};
    write_file(dir / "manifest.json", manifest.dump(2));
    return (dir / "manifest.json").string();
}

RunConfig tabular_config(const std::string& manifest) {
    RunConfig c;
    c.manifest_path = manifest;
    c.noise.kind = "uncorrelated";
    c.repetitions = 5;
    c.n_context = 10;
    c.judge = parse_judge_spec("sim:scripted:base=0.95,slope=-0.012,jitter=0.01");
    c.master_seed = 7;
    return c;
}

nlohmann::json metrics_by_cell(const std::vector<TrialRecord>& trials) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& t : trials) {
        const std::string key =
            t.noise_kind + "/" + std::to_string(t.level_index) + "/" + std::to_string(t.rep);
        out[key] = t.metrics;
    }
    return out;
}

std::string completion_body(const std::string& content) {
    nlohmann::json msg{{"content", content}};
    nlohmann::json choice{{"message", msg}};
    nlohmann::json body;
    body["choices"] = nlohmann::json::array({choice});
    return body.dump();
}

// Parses the user message and answers "pos" for every numbered evaluation row.
std::string count_and_answer(const std::string& request_body) {
    const auto parsed = nlohmann::json::parse(request_body);
    const std::string user = parsed["messages"][1]["content"];
    const auto pos = user.find("Evaluation rows:\n");
    REQUIRE(pos != std::string::npos);
    std::string answers;
    for (const auto& line : split(user.substr(pos + 17), '\n'))
        if (!trim(line).empty()) answers += "pos\n";
    return answers;
}

struct MockServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;

    explicit MockServer(httplib::Server::Handler handler) {
        server.Post("/v1/chat/completions", std::move(handler));
        port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~MockServer() {
        server.stop();
        thread.join();
    }
    JudgeSpec spec() const {
        JudgeSpec s;
        s.kind = JudgeKind::remote;
        s.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
        s.model_name = "mock";
        s.timeout_s = 5.0;
        s.api_key_env = "";
        return s;
    }
};

} // namespace

TEST_CASE("config validation rejects out-of-range settings") {
    RunConfig c = tabular_config("manifest.json");
    CHECK_NOTHROW(c.validate());

    auto broken = c;
    broken.repetitions = 0;
    CHECK_THROWS_AS(broken.validate(), ConfigError);
    broken = c;
    broken.manifest_path.clear();
    CHECK_THROWS_AS(broken.validate(), ConfigError);
    broken = c;
    broken.alpha_level = 0.0;
    CHECK_THROWS_AS(broken.validate(), ConfigError);
    broken = c;
    broken.alpha_level = 1.0;
    CHECK_THROWS_AS(broken.validate(), ConfigError);
    broken = c;
    broken.perturb_split = "validation";
    CHECK_THROWS_AS(broken.validate(), ConfigError);
    broken = c;
    broken.noise.kind = "spicy";
    CHECK_THROWS_AS(broken.validate(), ConfigError);
    broken = c;
    broken.clean_trials = 0;
    CHECK_THROWS_AS(broken.validate(), ConfigError);
    broken = c;
    broken.feature_cap = 0;
    CHECK_THROWS_AS(broken.validate(), ConfigError);
    broken = c;
    broken.max_in_flight = 0;
    CHECK_THROWS_AS(broken.validate(), ConfigError);
}

TEST_CASE("JSON and key=value config files hash identically") {
    const auto dir = fresh_dir("config_forms");
    write_tabular_fixture(dir);

    RunConfig cfg = tabular_config("manifest.json");
    cfg.noise.snr_schedule = SnrSchedule{{20.0, 10.0, 0.0}};
    cfg.repetitions = 4;
    cfg.judge = parse_judge_spec("sim:scripted:base=0.9,slope=-0.05,jitter=0.01,seed=3");
    cfg.master_seed = 11;
    cfg.n_context = 8;
    write_file(dir / "run.json", nlohmann::json(cfg).dump(2));

    write_file(dir / "run.cfg",
               "# the same run, spelled as key=value lines\n"
               "manifest=manifest.json\n"
               "noise.kind=uncorrelated\n"
               "noise.snr_schedule_db=20,10,0\n"
               "repetitions=4\n"
               "judge=sim:scripted:base=0.9,slope=-0.05,jitter=0.01,seed=3\n"
               "master_seed=11\n"
               "n_context=8\n");

    const auto from_json_file = load_run_config((dir / "run.json").string());
    const auto from_kv_file = load_run_config((dir / "run.cfg").string());

    CHECK(config_hash(from_json_file) == config_hash(from_kv_file));
    CHECK(from_json_file.manifest_path == from_kv_file.manifest_path);
    CHECK(fs::path(from_kv_file.manifest_path).is_absolute());
    CHECK(from_kv_file.noise.snr_schedule.levels_db == std::vector<double>{20.0, 10.0, 0.0});
    CHECK(from_kv_file.judge.slope_per_intensity == -0.05);
    CHECK(from_kv_file.master_seed == 11);
    CHECK(config_hash(from_json_file).size() == 16);

    // Any settings change moves the hash.
    auto other = from_json_file;
    other.repetitions = 5;
    CHECK(config_hash(other) != config_hash(from_json_file));
}

TEST_CASE("config files reject unknown keys and malformed JSON") {
    const auto dir = fresh_dir("config_bad");
    write_file(dir / "bad.cfg", "manifest=m.json\nwibble=1\n");
    CHECK_THROWS_AS(load_run_config((dir / "bad.cfg").string()), ConfigError);

    write_file(dir / "noeq.cfg", "manifest m.json\n");
    CHECK_THROWS_AS(load_run_config((dir / "noeq.cfg").string()), ParseError);

    write_file(dir / "broken.json", "{\"manifest\": ");
    CHECK_THROWS_AS(load_run_config((dir / "broken.json").string()), ParseError);

    write_file(dir / "hollow.json", "{}");
    CHECK_THROWS_AS(load_run_config((dir / "hollow.json").string()), ConfigError);

    CHECK_THROWS_AS(load_run_config((dir / "absent.cfg").string()), IoError);
}

TEST_CASE("a full run produces one record per cell") {
    const auto dir = fresh_dir("structure");
    const auto cfg = tabular_config(write_tabular_fixture(dir));

    const auto outcome = run_calibration(cfg);
    REQUIRE(outcome.trials.size() == 31); // 1 clean + 6 levels x 5 reps
    CHECK(outcome.run_dir.empty());

    CHECK(outcome.trials[0].noise_kind == "clean");
    CHECK(outcome.trials[0].level_index == -1);
    CHECK(outcome.trials[0].severity == 0.0);

    const auto& schedule = cfg.noise.snr_schedule.levels_db;
    for (int k = 0; k < 6; ++k)
        for (int r = 0; r < 5; ++r) {
            const auto& t = outcome.trials[static_cast<std::size_t>(1 + k * 5 + r)];
            CHECK(t.noise_kind == "uncorrelated");
            CHECK(t.level_index == k);
            CHECK(t.rep == r);
            CHECK(t.severity == schedule[static_cast<std::size_t>(k)]);
            CHECK(t.intensity == 20.0 - t.severity);
            CHECK(t.dataset_id == "synth");
            CHECK(t.metrics.n_scored > 0);
            CHECK(t.rng_seed == cell_seed(cfg.master_seed, "synth", "uncorrelated", k, r));
            CHECK_FALSE(t.judge_fingerprint.empty());
        }

    const auto& v = outcome.verdict;
    CHECK(v.dataset_id == "synth");
    CHECK(v.expected_trials == 30);
    CHECK(v.n_trials == 30);
    CHECK(v.config_hash.size() == 16);
    CHECK(v.run_id == "synth-" + v.config_hash.substr(0, 8));
    REQUIRE(v.per_kind.count("uncorrelated") == 1);
    const auto& fit = v.per_kind.at("uncorrelated").fit;
    CHECK(fit.n_obs == 30);
    CHECK(fit.df == 28);
}

TEST_CASE("cell seeds separate kinds, levels and reps") {
    const auto a = cell_seed(1, "ds", "uncorrelated", 0, 0);
    CHECK(a == cell_seed(1, "ds", "uncorrelated", 0, 0));
    CHECK(a != cell_seed(1, "ds", "uncorrelated", 0, 1));
    CHECK(a != cell_seed(1, "ds", "uncorrelated", 1, 0));
    CHECK(a != cell_seed(1, "ds", "correlated", 0, 0));
    CHECK(a != cell_seed(1, "other", "uncorrelated", 0, 0));
    CHECK(a != cell_seed(2, "ds", "uncorrelated", 0, 0));
}

TEST_CASE("runs are deterministic in the master seed") {
    const auto dir = fresh_dir("determinism");
    auto cfg = tabular_config(write_tabular_fixture(dir));
    cfg.repetitions = 2;

    const auto first = run_calibration(cfg);
    const auto second = run_calibration(cfg);
    CHECK(metrics_by_cell(first.trials).dump() == metrics_by_cell(second.trials).dump());
    CHECK(first.verdict.per_kind.at("uncorrelated").fit.p_one_sided ==
          second.verdict.per_kind.at("uncorrelated").fit.p_one_sided);

    auto moved = cfg;
    moved.master_seed = 8;
    const auto third = run_calibration(moved);
    CHECK(metrics_by_cell(first.trials).dump() != metrics_by_cell(third.trials).dump());
}

TEST_CASE("adding repetitions never reshuffles earlier cells") {
    const auto dir = fresh_dir("cell_isolation");
    auto cfg = tabular_config(write_tabular_fixture(dir));
    cfg.repetitions = 5;
    const auto big = run_calibration(cfg);
    cfg.repetitions = 3;
    const auto small = run_calibration(cfg);

    const auto big_map = metrics_by_cell(big.trials);
    const auto small_map = metrics_by_cell(small.trials);
    for (const auto& [key, value] : small_map.items())
        CHECK(big_map.at(key).dump() == value.dump());
}

TEST_CASE("the baseline of a perfect judge is a perfect score") {
    const auto dir = fresh_dir("baseline");
    auto cfg = tabular_config(write_tabular_fixture(dir));
    cfg.judge = parse_judge_spec("sim:scripted:base=1,slope=0,jitter=0");
    const auto m = run_baseline(cfg);
    CHECK(m.primary == 1.0);
    CHECK(m.accuracy == 1.0);
    CHECK(m.coverage == 1.0);
    CHECK(m.n_scored > 0);
}

TEST_CASE("the combined kind runs both tabular noise families") {
    const auto dir = fresh_dir("both_kinds");
    auto cfg = tabular_config(write_tabular_fixture(dir));
    cfg.noise.kind = "both";
    cfg.repetitions = 2;

    const auto outcome = run_calibration(cfg);
    CHECK(outcome.verdict.expected_trials == 24); // 2 kinds x 6 levels x 2 reps
    CHECK(outcome.verdict.per_kind.size() == 2);
    CHECK(outcome.verdict.per_kind.count("uncorrelated") == 1);
    CHECK(outcome.verdict.per_kind.count("correlated") == 1);

    std::size_t uncorr = 0, corr = 0;
    for (const auto& t : outcome.trials) {
        if (t.noise_kind == "uncorrelated") ++uncorr;
        if (t.noise_kind == "correlated") ++corr;
    }
    CHECK(uncorr == 12);
    CHECK(corr == 12);
}

TEST_CASE("lexical noise drives text datasets end to end") {
    const auto dir = fresh_dir("lexical");
    RunConfig cfg;
    cfg.manifest_path = write_text_fixture(dir);
    cfg.noise.kind = "lexical";
    cfg.repetitions = 2;
    cfg.n_context = 6;
    cfg.judge = parse_judge_spec("sim:scripted:base=0.9,slope=-0.4,jitter=0.02");
    cfg.master_seed = 3;

    const auto outcome = run_calibration(cfg);
    CHECK(outcome.verdict.expected_trials == 12);
    REQUIRE(outcome.trials.size() == 13);
    const auto& levels = cfg.noise.severity_schedule.levels;
    for (const auto& t : outcome.trials) {
        if (t.noise_kind == "clean") continue;
        CHECK(t.noise_kind == "lexical");
        CHECK(t.severity == levels[static_cast<std::size_t>(t.level_index)]);
        CHECK(t.intensity == t.severity); // lexical intensity is the severity itself
    }
}

TEST_CASE("interrupted runs resume without recomputing finished cells") {
    const auto fixture = fresh_dir("resume_fixture");
    auto cfg = tabular_config(write_tabular_fixture(fixture));
    cfg.repetitions = 3;
    cfg.output_dir = (fresh_dir("resume_full")).string();

    const auto full = run_calibration(cfg);
    REQUIRE(full.trials.size() == 19); // 1 clean + 18 noise

    // Simulate an interrupt: keep the config and the first 11 trial records.
    const auto partial_dir = fresh_dir("resume_partial");
    fs::copy_file(fs::path(cfg.output_dir) / "config.json", partial_dir / "config.json");
    const auto lines = file_lines(fs::path(cfg.output_dir) / "trials.jsonl");
    REQUIRE(lines.size() == 19);
    std::string head;
    for (std::size_t i = 0; i < 11; ++i) head += lines[i] + "\n";
    write_file(partial_dir / "trials.jsonl", head);

    const auto resumed = resume(partial_dir.string());
    CHECK(resumed.trials.size() == 19);
    CHECK(metrics_by_cell(resumed.trials).dump() == metrics_by_cell(full.trials).dump());
    CHECK(file_lines(partial_dir / "trials.jsonl").size() == 19);
    CHECK(resumed.verdict.n_trials == full.verdict.n_trials);
    CHECK(nlohmann::json(resumed.verdict).dump() == nlohmann::json(full.verdict).dump());
}

TEST_CASE("resuming a complete run changes nothing") {
    const auto fixture = fresh_dir("noop_fixture");
    auto cfg = tabular_config(write_tabular_fixture(fixture));
    cfg.repetitions = 2;
    cfg.output_dir = (fresh_dir("noop_run")).string();
    run_calibration(cfg);

    const auto verdict_before = read_file(fs::path(cfg.output_dir) / "verdict.json");
    const auto trials_before = read_file(fs::path(cfg.output_dir) / "trials.jsonl");
    resume(cfg.output_dir);
    CHECK(read_file(fs::path(cfg.output_dir) / "verdict.json") == verdict_before);
    CHECK(read_file(fs::path(cfg.output_dir) / "trials.jsonl") == trials_before);
}

TEST_CASE("an edited config refuses to resume") {
    const auto fixture = fresh_dir("edited_fixture");
    auto cfg = tabular_config(write_tabular_fixture(fixture));
    cfg.repetitions = 2;
    cfg.output_dir = (fresh_dir("edited_run")).string();
    run_calibration(cfg);

    const auto config_path = fs::path(cfg.output_dir) / "config.json";
    auto stored = nlohmann::json::parse(read_file(config_path));
    stored["repetitions"] = 4; // silently edited, hash now stale
    write_file(config_path, stored.dump(2));

    CHECK_THROWS_AS(resume(cfg.output_dir), ConfigMismatch);
}

TEST_CASE("resume and the run readers demand a run directory") {
    const auto empty = fresh_dir("no_run_here");
    CHECK_THROWS_AS(resume((empty / "missing").string()), NoRunsFound);
    CHECK_THROWS_AS(load_trials((empty / "missing").string()), NoRunsFound);
    CHECK_THROWS_AS(load_verdict((empty / "missing").string()), NoRunsFound);
}

TEST_CASE("ineligible datasets are rejected before any trial") {
    const auto small = fresh_dir("too_small");
    auto cfg = tabular_config(write_tabular_fixture(small, 10));
    CHECK_THROWS_AS(run_calibration(cfg), EligibilityError); // 10 rows < min_rows 30

    const auto tab = fresh_dir("no_text");
    auto lexical_on_tabular = tabular_config(write_tabular_fixture(tab));
    lexical_on_tabular.noise.kind = "lexical";
    CHECK_THROWS_AS(run_calibration(lexical_on_tabular), ConfigError);
}

TEST_CASE("remote judges see one frozen few-shot context") {
    std::atomic<int> calls{0};
    MockServer server([&](const httplib::Request& req, httplib::Response& res) {
        ++calls;
        res.set_content(completion_body(count_and_answer(req.body)), "application/json");
    });

    const auto fixture = fresh_dir("remote_fixture");
    auto cfg = tabular_config(write_tabular_fixture(fixture));
    cfg.judge = server.spec();
    cfg.noise.snr_schedule = SnrSchedule{{20.0, 10.0, 0.0}};
    cfg.repetitions = 2;
    cfg.batch_size = 4; // several batches per cell
    cfg.max_in_flight = 2;
    cfg.output_dir = (fresh_dir("remote_run")).string();

    const auto outcome = run_calibration(cfg);
    CHECK(outcome.verdict.expected_trials == 6);
    CHECK(outcome.verdict.n_trials == 6);
    CHECK(calls.load() >= 7); // every cell needs at least one batch

    // The few-shot block must be byte-identical in every request of every cell.
    std::vector<std::string> contexts;
    for (const auto& entry : fs::directory_iterator(fs::path(cfg.output_dir) / "transcripts")) {
        for (const auto& line : file_lines(entry.path())) {
            const auto event = nlohmann::json::parse(line);
            if (event["event"] != "request" || !event.contains("user_text")) continue;
            const std::string user = event["user_text"];
            const auto cut = user.find("Evaluation rows:");
            REQUIRE(cut != std::string::npos);
            contexts.push_back(user.substr(0, cut));
        }
    }
    REQUIRE(contexts.size() >= 7);
    for (const auto& c : contexts) CHECK(c == contexts.front());
    CHECK(contexts.front().find("Labeled examples:\n") == 0);
}

TEST_CASE("a run with no scoreable trials is partial") {
    MockServer server([&](const httplib::Request&, httplib::Response& res) {
        res.set_content(completion_body("zzz"), "application/json"); // never parses
    });

    const auto fixture = fresh_dir("partial_fixture");
    auto cfg = tabular_config(write_tabular_fixture(fixture));
    cfg.judge = server.spec();
    cfg.noise.snr_schedule = SnrSchedule{{20.0, 0.0}};
    cfg.repetitions = 1;
    cfg.max_in_flight = 1;
    CHECK_THROWS_AS(run_calibration(cfg), PartialRun);
}

TEST_CASE("one lost cell above the completeness floor still yields a verdict") {
    setenv("JUDGECAL_BACKOFF_MS", "1", 1);
    std::atomic<int> calls{0};
    MockServer server([&](const httplib::Request& req, httplib::Response& res) {
        const int n = ++calls;
        if (n >= 2 && n <= 7) {
            res.status = 500; // the first noise cell burns its whole transport budget
        } else {
            res.set_content(completion_body(count_and_answer(req.body)), "application/json");
        }
    });

    const auto fixture = fresh_dir("lost_cell_fixture");
    auto cfg = tabular_config(write_tabular_fixture(fixture));
    cfg.judge = server.spec();
    cfg.repetitions = 1;
    cfg.batch_size = 500; // one call per cell
    cfg.max_in_flight = 1;

    const auto outcome = run_calibration(cfg);
    CHECK(outcome.verdict.expected_trials == 6);
    CHECK(outcome.verdict.n_trials == 5); // 5/6 >= 80%
    CHECK(outcome.verdict.per_kind.at("uncorrelated").fit.n_obs == 5);
    for (const auto& t : outcome.trials)
        CHECK_FALSE((t.noise_kind == "uncorrelated" && t.level_index == 0));
    unsetenv("JUDGECAL_BACKOFF_MS");
}

TEST_CASE("group comparison of a run against itself is exactly neutral") {
    const auto fixture = fresh_dir("groups_fixture");
    auto cfg = tabular_config(write_tabular_fixture(fixture));
    cfg.noise.snr_schedule = SnrSchedule{{20.0, 10.0, 0.0}};
    cfg.repetitions = 1;
    cfg.clean_trials = 3;
    cfg.judge = parse_judge_spec("sim:scripted:base=0.9,slope=-0.01,jitter=0.05");
    cfg.output_dir = (fresh_dir("groups_run")).string();
    run_calibration(cfg);

    const auto data = compare_groups({cfg.output_dir}, {cfg.output_dir}, 1000, 1);
    CHECK(data.table.n_sensitive == 1);
    CHECK(data.table.n_insensitive == 1);
    REQUIRE(data.table.rows.size() == 4);
    CHECK(data.table.rows[0].metric == "Accuracy");
    for (const auto& row : data.table.rows) {
        CHECK(row.delta_median == 0.0);
        CHECK(row.ci_low == 0.0);
        CHECK(row.ci_high == 0.0);
    }
    CHECK(data.table.rows[0].ratio == 1.0);
    REQUIRE(data.sensitive_primary.size() == 1);
    CHECK(data.sensitive_primary == data.insensitive_primary);
}

TEST_CASE("group comparison rejects unusable inputs") {
    const auto fixture = fresh_dir("groups_bad_fixture");
    auto cfg = tabular_config(write_tabular_fixture(fixture));
    cfg.noise.snr_schedule = SnrSchedule{{20.0, 10.0, 0.0}};
    cfg.repetitions = 1; // clean_trials stays 1: too few for a dispersion estimate
    cfg.output_dir = (fresh_dir("groups_bad_run")).string();
    run_calibration(cfg);

    CHECK_THROWS_AS(compare_groups({}, {cfg.output_dir}, 100, 1), EmptyGroup);
    CHECK_THROWS_AS(compare_groups({cfg.output_dir}, {}, 100, 1), EmptyGroup);
    CHECK_THROWS_AS(compare_groups({cfg.output_dir}, {cfg.output_dir}, 100, 1), InsufficientData);
}
