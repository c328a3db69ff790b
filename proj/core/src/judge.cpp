#include "judgecal/judge.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <thread>
#include <unordered_map>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "judgecal/errors.hpp"
#include "judgecal/text.hpp"

namespace judgecal {

namespace {

std::uint64_t parse_seed(const std::string& s) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ConfigError("invalid seed value: " + s);
    return v;
}

double parse_real(const std::string& s, const std::string& key) {
    const auto v = parse_number(s);
    if (!v) throw ConfigError("invalid numeric value for " + key + ": " + s);
    return *v;
}

std::unordered_map<std::string, std::string> parse_kv(const std::string& text) {
    std::unordered_map<std::string, std::string> kv;
    if (trim(text).empty()) return kv;
    for (const auto& part : split(text, ',')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key=value, got \"" + part + "\"");
        kv[std::string(trim(part.substr(0, eq)))] = std::string(trim(part.substr(eq + 1)));
    }
    return kv;
}

} // namespace

std::string judge_kind_name(JudgeKind k) {
    switch (k) {
    case JudgeKind::remote: return "remote";
    case JudgeKind::sim_centroid: return "sim_centroid";
    case JudgeKind::sim_scripted: return "sim_scripted";
    }
    return "sim_scripted";
}

void JudgeSpec::validate() const {
    if (kind == JudgeKind::remote) {
        if (endpoint_url.empty()) throw InvalidJudgeConfig("remote judge requires an endpoint url");
        if (model_name.empty()) throw InvalidJudgeConfig("remote judge requires a model name");
        if (!(temperature >= 0.0)) throw InvalidJudgeConfig("temperature must be >= 0");
        if (!(timeout_s > 0.0)) throw InvalidJudgeConfig("timeout must be positive");
    } else if (kind == JudgeKind::sim_scripted) {
        if (!(base_accuracy >= 0.0 && base_accuracy <= 1.0))
            throw InvalidJudgeConfig("base_accuracy must lie in [0, 1]");
        if (!(response_jitter >= 0.0)) throw InvalidJudgeConfig("response_jitter must be >= 0");
        if (!std::isfinite(slope_per_intensity)) throw InvalidJudgeConfig("slope must be finite");
    }
}

std::string JudgeSpec::fingerprint() const {
    switch (kind) {
    case JudgeKind::remote:
        return "remote model=" + model_name + " url=" + endpoint_url +
               " temperature=" + format_double(temperature);
    case JudgeKind::sim_scripted:
        return "sim_scripted base=" + format_double(base_accuracy) +
               " slope=" + format_double(slope_per_intensity) +
               " jitter=" + format_double(response_jitter) + " seed=" + std::to_string(seed);
    case JudgeKind::sim_centroid:
        return "sim_centroid seed=" + std::to_string(seed);
    }
    return "unknown";
}

JudgeSpec parse_judge_spec(const std::string& text) {
    JudgeSpec spec;
    const auto first = text.find(':');
    const std::string head = text.substr(0, first);
    if (head == "remote") {
        spec.kind = JudgeKind::remote;
        const auto kv = parse_kv(first == std::string::npos ? "" : text.substr(first + 1));
        for (const auto& [key, value] : kv) {
            if (key == "url")
                spec.endpoint_url = value;
            else if (key == "model")
                spec.model_name = value;
            else if (key == "temperature")
                spec.temperature = parse_real(value, key);
            else if (key == "timeout")
                spec.timeout_s = parse_real(value, key);
            else if (key == "key_env")
                spec.api_key_env = value;
            else if (key == "seed")
                spec.seed = parse_seed(value);
            else
                throw ConfigError("unknown remote judge option: " + key);
        }
    } else if (head == "sim") {
        if (first == std::string::npos) throw ConfigError("sim judge needs a kind, e.g. sim:scripted");
        const auto second = text.find(':', first + 1);
        const std::string sim_kind = text.substr(first + 1, second == std::string::npos
                                                                ? std::string::npos
                                                                : second - first - 1);
        const auto kv = parse_kv(second == std::string::npos ? "" : text.substr(second + 1));
        if (sim_kind == "scripted")
            spec.kind = JudgeKind::sim_scripted;
        else if (sim_kind == "centroid")
            spec.kind = JudgeKind::sim_centroid;
        else
            throw ConfigError("unknown sim judge kind: " + sim_kind);
        for (const auto& [key, value] : kv) {
            if (key == "base")
                spec.base_accuracy = parse_real(value, key);
            else if (key == "slope")
                spec.slope_per_intensity = parse_real(value, key);
            else if (key == "jitter")
                spec.response_jitter = parse_real(value, key);
            else if (key == "seed")
                spec.seed = parse_seed(value);
            else
                throw ConfigError("unknown sim judge option: " + key);
        }
    } else {
        throw ConfigError("judge spec must start with \"remote:\" or \"sim:\", got \"" + text + "\"");
    }
    spec.validate();
    return spec;
}

std::string serialize_example(const Row& row,
                              const std::vector<FeatureDescriptor>& features,
                              std::optional<std::size_t> text_column) {
    if (text_column) {
        const auto& cell = row[*text_column];
        if (!cell) throw SchemaError("text cell missing in an example row");
        return *cell;
    }
    std::string out;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto& cell = row[features[i].column];
        if (!cell) throw SchemaError("feature \"" + features[i].name + "\" missing in an example row");
        if (i > 0) out += ", ";
        out += features[i].name + "=" + *cell;
    }
    return out;
}

std::string build_system_prompt(const TaskSpec& task, const DatasetManifest& meta) {
    std::string s = "You are evaluating rows from the dataset \"" + meta.dataset_id + "\".";
    if (!meta.description.empty()) s += " " + meta.description;
    s += "\n";
    if (task.task_kind == TaskKind::classification) {
        s += "Task: assign exactly one label to each evaluation row.\n";
        s += "Permitted labels: ";
        for (std::size_t i = 0; i < task.label_space.size(); ++i) {
            if (i > 0) s += ", ";
            s += "\"" + task.label_space[i] + "\"";
        }
        s += ".\n";
        s += "Answer with exactly one permitted label per evaluation row, one per line, "
             "in the given order. Output nothing else.";
    } else {
        s += "Task: predict the numeric target for each evaluation row.\n";
        s += "The target is a decimal number; the observed range is roughly " +
             format_double(task.value_min) + " to " + format_double(task.value_max) + ".\n";
        s += "Answer with exactly one decimal number per evaluation row, one per line, "
             "in the given order. Output nothing else.";
    }
    return s;
}

PromptBundle build_user_prompt(const std::string& system_text,
                               const std::vector<std::string>& few_shot_bodies,
                               const std::vector<std::string>& few_shot_labels,
                               const std::vector<std::string>& eval_bodies,
                               const std::vector<std::string>& eval_ids,
                               std::size_t char_budget) {
    if (few_shot_bodies.size() != few_shot_labels.size())
        throw ConfigError("few-shot bodies and labels differ in length");
    if (eval_bodies.size() != eval_ids.size())
        throw ConfigError("evaluation bodies and ids differ in length");
    if (eval_bodies.empty()) throw ConfigError("a prompt needs at least one evaluation row");

    PromptBundle bundle;
    bundle.system_text = system_text;
    bundle.n_context = few_shot_bodies.size();
    bundle.eval_ids = eval_ids;

    std::string& u = bundle.user_text;
    if (!few_shot_bodies.empty()) {
        u += "Labeled examples:\n";
        for (std::size_t i = 0; i < few_shot_bodies.size(); ++i)
            u += few_shot_bodies[i] + " -> " + few_shot_labels[i] + "\n";
        u += "\n";
    }
    u += "Evaluation rows:\n";
    for (std::size_t i = 0; i < eval_bodies.size(); ++i)
        u += std::to_string(i + 1) + ". " + eval_bodies[i] + "\n";

    if (bundle.system_text.size() + u.size() > char_budget)
        throw ContextOverflow("prompt of " + std::to_string(bundle.system_text.size() + u.size()) +
                              " characters exceeds the budget of " + std::to_string(char_budget));
    return bundle;
}

std::optional<std::vector<JudgePrediction>> try_parse_response(const std::string& raw,
                                                               const TaskSpec& task,
                                                               const std::vector<std::string>& eval_ids) {
    std::vector<std::string> answers;
    for (const auto& line : split(raw, '\n')) {
        const auto t = trim(line);
        if (!t.empty()) answers.emplace_back(t);
    }
    if (answers.size() != eval_ids.size()) return std::nullopt;

    std::vector<JudgePrediction> out;
    out.reserve(eval_ids.size());
    if (task.task_kind == TaskKind::classification) {
        for (std::size_t i = 0; i < answers.size(); ++i) {
            const std::string folded = to_lower_ascii(answers[i]);
            const auto it = std::find_if(task.label_space.begin(), task.label_space.end(),
                                         [&](const std::string& l) { return to_lower_ascii(l) == folded; });
            if (it == task.label_space.end()) return std::nullopt;
            JudgePrediction p;
            p.example_id = eval_ids[i];
            p.raw_text = answers[i];
            p.missing = false;
            p.label = *it;
            out.push_back(std::move(p));
        }
    } else {
        for (std::size_t i = 0; i < answers.size(); ++i) {
            const auto v = parse_number(answers[i]);
            if (!v || !std::isfinite(*v)) return std::nullopt;
            JudgePrediction p;
            p.example_id = eval_ids[i];
            p.raw_text = answers[i];
            p.missing = false;
            p.value = *v;
            out.push_back(std::move(p));
        }
    }
    return out;
}

std::vector<JudgePrediction> execute_batch(const QueryFn& query,
                                           const PromptBundle& bundle,
                                           const TaskSpec& task,
                                           const TranscriptFn& transcript,
                                           int max_schema_retries) {
    if (!query) throw ConfigError("execute_batch requires a query function");
    if (max_schema_retries < 0) throw ConfigError("max_schema_retries must be >= 0");
    std::string last_raw;
    for (int attempt = 0; attempt <= max_schema_retries; ++attempt) {
        if (transcript) {
            nlohmann::json req{{"ts", iso8601_utc_now()},
                               {"event", "request"},
                               {"attempt", attempt},
                               {"n_eval", bundle.eval_ids.size()}};
            if (attempt == 0) {
                req["system_text"] = bundle.system_text;
                req["user_text"] = bundle.user_text;
            } else {
                req["note"] = "schema retry, identical prompt";
            }
            transcript(req);
        }
        last_raw = query(bundle);
        auto parsed = try_parse_response(last_raw, task, bundle.eval_ids);
        if (transcript)
            transcript(nlohmann::json{{"ts", iso8601_utc_now()},
                                      {"event", "response"},
                                      {"attempt", attempt},
                                      {"raw", last_raw},
                                      {"valid", parsed.has_value()}});
        if (parsed) {
            for (auto& p : *parsed) p.retries_used = attempt;
            return std::move(*parsed);
        }
    }
    std::vector<JudgePrediction> out;
    out.reserve(bundle.eval_ids.size());
    for (const auto& id : bundle.eval_ids) {
        JudgePrediction p;
        p.example_id = id;
        p.raw_text = last_raw;
        p.missing = true;
        p.retries_used = max_schema_retries;
        out.push_back(std::move(p));
    }
    return out;
}

struct RemoteJudgeClient::Impl {
    JudgeSpec spec;
    int max_transport_retries;
    int initial_backoff_ms;
    TranscriptFn transcript;
    std::string base; // scheme://host[:port]
    std::string path;

    Impl(const JudgeSpec& s, int retries, int backoff_ms, TranscriptFn t)
        : spec(s), max_transport_retries(retries), initial_backoff_ms(backoff_ms), transcript(std::move(t)) {
        if (spec.kind != JudgeKind::remote)
            throw InvalidJudgeConfig("RemoteJudgeClient requires a remote judge spec");
        spec.validate();
        const auto& url = spec.endpoint_url;
        const auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos)
            throw ConfigError("endpoint url must start with http:// or https://");
        const auto path_start = url.find('/', scheme_end + 3);
        if (path_start == std::string::npos) {
            base = url;
            path = "/";
        } else {
            base = url.substr(0, path_start);
            path = url.substr(path_start);
        }
    }

    void log(nlohmann::json j) {
        if (transcript) {
            j["ts"] = iso8601_utc_now();
            transcript(std::move(j));
        }
    }

    std::string attempt_once(const std::string& body) {
        httplib::Client cli(base);
        const auto timeout_us = static_cast<time_t>(spec.timeout_s * 1e6);
        cli.set_connection_timeout(timeout_us / 1000000, timeout_us % 1000000);
        cli.set_read_timeout(timeout_us / 1000000, timeout_us % 1000000);
        cli.set_write_timeout(timeout_us / 1000000, timeout_us % 1000000);
        httplib::Headers headers;
        if (!spec.api_key_env.empty()) {
            if (const char* key = std::getenv(spec.api_key_env.c_str()))
                headers.emplace("Authorization", std::string("Bearer ") + key);
        }
        auto result = cli.Post(path, headers, body, "application/json");
        if (!result)
            throw TransportError("request to " + base + path + " failed: " + httplib::to_string(result.error()));
        log({{"event", "transport"}, {"status", result->status}});
        if (result->status == 401 || result->status == 403)
            throw AuthError("endpoint rejected the credential with HTTP " + std::to_string(result->status));
        if (result->status == 429)
            throw RateLimited("endpoint rate-limited the request (HTTP 429)");
        if (result->status < 200 || result->status >= 300)
            throw TransportError("endpoint returned HTTP " + std::to_string(result->status));
        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(result->body);
        } catch (const nlohmann::json::exception& e) {
            throw TransportError(std::string("response body is not JSON: ") + e.what());
        }
        try {
            return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            throw TransportError("response JSON lacks choices[0].message.content");
        }
    }

    std::string query(const PromptBundle& bundle) {
        const nlohmann::json body{{"model", spec.model_name},
                                  {"messages",
                                   {{{"role", "system"}, {"content", bundle.system_text}},
                                    {{"role", "user"}, {"content", bundle.user_text}}}},
                                  {"temperature", spec.temperature}};
        const std::string body_text = body.dump();

        int backoff_ms = initial_backoff_ms;
        for (int attempt = 0;; ++attempt) {
            try {
                return attempt_once(body_text);
            } catch (const AuthError&) {
                throw; // never retried
            } catch (const Error& e) {
                // TransportError and RateLimited share the backoff budget.
                log({{"event", "transport_error"}, {"attempt", attempt}, {"error", e.what()}});
                if (attempt >= max_transport_retries) throw;
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
                backoff_ms *= 2;
            }
        }
    }
};

RemoteJudgeClient::RemoteJudgeClient(const JudgeSpec& spec,
                                     int max_transport_retries,
                                     int initial_backoff_ms,
                                     TranscriptFn transcript)
    : impl_(std::make_unique<Impl>(spec, max_transport_retries, initial_backoff_ms, std::move(transcript))) {}

RemoteJudgeClient::~RemoteJudgeClient() = default;

std::string RemoteJudgeClient::query(const PromptBundle& bundle) {
    return impl_->query(bundle);
}

CentroidModel fit_centroids(const Table& table,
                            const std::vector<std::size_t>& few_shot_rows,
                            std::size_t label_column,
                            const std::vector<FeatureDescriptor>& features,
                            const TaskSpec& task) {
    if (task.task_kind != TaskKind::classification)
        throw ConfigError("the centroid judge supports classification tasks only");
    if (few_shot_rows.empty()) throw InsufficientData("centroid fitting needs at least one few-shot row");
    if (features.empty()) throw NoNumericFeatures("centroid fitting needs numeric features");

    std::unordered_map<std::string, std::pair<std::vector<double>, std::size_t>> acc;
    for (std::size_t idx : few_shot_rows) {
        const auto& row = table.rows[idx];
        const auto& label_cell = row[label_column];
        if (!label_cell) throw SchemaError("few-shot row " + std::to_string(idx) + " has no label");
        auto& [sum, count] = acc[*label_cell];
        if (sum.empty()) sum.assign(features.size(), 0.0);
        for (std::size_t j = 0; j < features.size(); ++j) {
            const auto& cell = row[features[j].column];
            if (!cell) throw SchemaError("few-shot row " + std::to_string(idx) + " misses a feature");
            const auto v = parse_number(*cell);
            if (!v) throw SchemaError("few-shot feature \"" + features[j].name + "\" is not numeric");
            sum[j] += *v;
        }
        ++count;
    }

    CentroidModel model;
    for (const auto& label : task.label_space) {
        const auto it = acc.find(label);
        if (it == acc.end()) continue; // class absent from the few-shot draw
        std::vector<double> centroid = it->second.first;
        for (double& v : centroid) v /= static_cast<double>(it->second.second);
        model.labels.push_back(label);
        model.centroids.push_back(std::move(centroid));
    }
    if (model.labels.empty()) throw InsufficientData("no labeled few-shot rows for centroid fitting");
    return model;
}

std::vector<JudgePrediction> sim_scripted_predict(const JudgeSpec& spec,
                                                  const std::vector<SimEvalExample>& examples,
                                                  const TaskSpec& task,
                                                  double intensity,
                                                  RngStream& rng) {
    spec.validate();
    const bool classify = task.task_kind == TaskKind::classification;
    const double floor = classify ? 1.0 / static_cast<double>(task.label_space.size()) : 0.0;
    // One jitter draw per call: repetitions at the same level stay i.i.d.
    // around the scripted mean, which is what the trend test assumes.
    const double jitter = spec.response_jitter * rng.normal();
    const double p = std::clamp(spec.base_accuracy + spec.slope_per_intensity * intensity + jitter,
                                floor, 1.0);

    std::vector<JudgePrediction> out;
    out.reserve(examples.size());
    for (const auto& ex : examples) {
        JudgePrediction pred;
        pred.example_id = ex.id;
        pred.missing = false;
        const bool correct = rng.bernoulli(p);
        if (classify) {
            if (correct || task.label_space.size() == 1) {
                pred.label = ex.true_label;
            } else {
                // Uniform draw over the wrong labels.
                auto pick = rng.uniform_below(task.label_space.size() - 1);
                for (std::size_t i = 0; i < task.label_space.size(); ++i) {
                    if (task.label_space[i] == ex.true_label) continue;
                    if (pick == 0) {
                        pred.label = task.label_space[i];
                        break;
                    }
                    --pick;
                }
            }
            pred.raw_text = pred.label;
        } else {
            pred.value = correct ? ex.true_value
                                 : task.value_min + rng.uniform() * (task.value_max - task.value_min);
            pred.raw_text = format_double(pred.value);
        }
        out.push_back(std::move(pred));
    }
    return out;
}

std::vector<JudgePrediction> sim_centroid_predict(const CentroidModel& model,
                                                  const std::vector<SimEvalExample>& examples) {
    if (model.labels.empty()) throw InsufficientData("centroid model is empty");
    std::vector<JudgePrediction> out;
    out.reserve(examples.size());
    for (const auto& ex : examples) {
        std::size_t best = 0;
        double best_d2 = 0.0;
        for (std::size_t c = 0; c < model.centroids.size(); ++c) {
            const auto& centroid = model.centroids[c];
            if (centroid.size() != ex.features.size())
                throw ConfigError("example feature dimension does not match the centroid model");
            double d2 = 0.0;
            for (std::size_t j = 0; j < centroid.size(); ++j) {
                const double d = ex.features[j] - centroid[j];
                d2 += d * d;
            }
            if (c == 0 || d2 < best_d2) {
                best = c;
                best_d2 = d2;
            }
        }
        JudgePrediction pred;
        pred.example_id = ex.id;
        pred.missing = false;
        pred.label = model.labels[best];
        pred.raw_text = pred.label;
        out.push_back(std::move(pred));
    }
    return out;
}

std::vector<JudgePrediction> sim_predict(const JudgeSpec& spec,
                                         const CentroidModel* model,
                                         const std::vector<SimEvalExample>& examples,
                                         const TaskSpec& task,
                                         double intensity,
                                         RngStream& rng) {
    switch (spec.kind) {
    case JudgeKind::sim_scripted:
        return sim_scripted_predict(spec, examples, task, intensity, rng);
    case JudgeKind::sim_centroid:
        if (!model) throw ConfigError("sim_centroid requires a fitted centroid model");
        return sim_centroid_predict(*model, examples);
    case JudgeKind::remote:
        throw ConfigError("sim_predict cannot drive a remote judge");
    }
    throw ConfigError("unknown judge kind");
}

void to_json(nlohmann::json& j, const JudgeSpec& s) {
    j = nlohmann::json{{"kind", judge_kind_name(s.kind)},
                       {"endpoint_url", s.endpoint_url},
                       {"model_name", s.model_name},
                       {"temperature", s.temperature},
                       {"api_key_env", s.api_key_env},
                       {"timeout_s", s.timeout_s},
                       {"base_accuracy", s.base_accuracy},
                       {"slope_per_intensity", s.slope_per_intensity},
                       {"response_jitter", s.response_jitter},
                       {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, JudgeSpec& s) {
    s = JudgeSpec{};
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "remote")
        s.kind = JudgeKind::remote;
    else if (kind == "sim_centroid")
        s.kind = JudgeKind::sim_centroid;
    else if (kind == "sim_scripted")
        s.kind = JudgeKind::sim_scripted;
    else
        throw ConfigError("unknown judge kind: " + kind);
    if (j.contains("endpoint_url")) j.at("endpoint_url").get_to(s.endpoint_url);
    if (j.contains("model_name")) j.at("model_name").get_to(s.model_name);
    if (j.contains("temperature")) j.at("temperature").get_to(s.temperature);
    if (j.contains("api_key_env")) j.at("api_key_env").get_to(s.api_key_env);
    if (j.contains("timeout_s")) j.at("timeout_s").get_to(s.timeout_s);
    if (j.contains("base_accuracy")) j.at("base_accuracy").get_to(s.base_accuracy);
    if (j.contains("slope_per_intensity")) j.at("slope_per_intensity").get_to(s.slope_per_intensity);
    if (j.contains("response_jitter")) j.at("response_jitter").get_to(s.response_jitter);
    if (j.contains("seed")) j.at("seed").get_to(s.seed);
    s.validate();
}

} // namespace judgecal
