#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "judgecal/errors.hpp"
#include "judgecal/judge.hpp"
#include "judgecal/text.hpp"

using namespace judgecal;

namespace {

TaskSpec binary_task() {
    TaskSpec t;
    t.task_kind = TaskKind::classification;
    t.label_space = {"yes", "no"};
    return t;
}

TaskSpec regression_task(double lo, double hi) {
    TaskSpec t;
    t.task_kind = TaskKind::regression;
    t.value_min = lo;
    t.value_max = hi;
    t.primary_metric = PrimaryMetric::r_squared;
    return t;
}

PromptBundle bundle_for(std::vector<std::string> ids) {
    PromptBundle b;
    b.system_text = "system";
    b.user_text = "user";
    b.eval_ids = std::move(ids);
    return b;
}

std::string completion_body(const std::string& content) {
    nlohmann::json msg{{"content", content}};
    nlohmann::json choice{{"message", msg}};
    nlohmann::json body;
    body["choices"] = nlohmann::json::array({choice});
    return body.dump();
}

// Loopback chat-completion endpoint on an ephemeral port.
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
    std::string url() const {
        return "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    }
};

JudgeSpec remote_spec(const std::string& url) {
    JudgeSpec spec;
    spec.kind = JudgeKind::remote;
    spec.endpoint_url = url;
    spec.model_name = "m1";
    spec.temperature = 0.25;
    spec.timeout_s = 5.0;
    spec.api_key_env = "JUDGECAL_TEST_KEY";
    return spec;
}

} // namespace

TEST_CASE("serialize_example joins named features") {
    std::vector<FeatureDescriptor> feats(2);
    feats[0].name = "x";
    feats[0].column = 0;
    feats[1].name = "color";
    feats[1].column = 1;
    Row row{Cell{"1.5"}, Cell{"red"}, Cell{"hello world"}};

    CHECK(serialize_example(row, feats, std::nullopt) == "x=1.5, color=red");
    CHECK(serialize_example(row, {feats[0]}, std::nullopt) == "x=1.5");
    CHECK(serialize_example(row, feats, 2) == "hello world");

    Row holes{Cell{"1.5"}, std::nullopt, std::nullopt};
    CHECK_THROWS_AS(serialize_example(holes, feats, std::nullopt), SchemaError);
    CHECK_THROWS_AS(serialize_example(holes, feats, 2), SchemaError);
}

TEST_CASE("system prompt names the dataset and the answer format") {
    DatasetManifest meta;
    meta.dataset_id = "widgets";
    meta.description = "Widget quality control.";

    const auto cls = build_system_prompt(binary_task(), meta);
    CHECK(cls.find("widgets") != std::string::npos);
    CHECK(cls.find("Widget quality control.") != std::string::npos);
    CHECK(cls.find("\"yes\", \"no\"") != std::string::npos);
    CHECK(cls.find("one per line") != std::string::npos);

    const auto reg = build_system_prompt(regression_task(10, 20), meta);
    CHECK(reg.find("10 to 20") != std::string::npos);
    CHECK(reg.find("decimal number") != std::string::npos);
}

TEST_CASE("user prompt layout is exact") {
    const auto b = build_user_prompt("sys", {"a=1"}, {"x"}, {"a=2", "a=3"}, {"r1", "r2"}, 10000);
    CHECK(b.user_text == "Labeled examples:\na=1 -> x\n\nEvaluation rows:\n1. a=2\n2. a=3\n");
    CHECK(b.system_text == "sys");
    CHECK(b.n_context == 1);
    CHECK(b.eval_ids == std::vector<std::string>{"r1", "r2"});
}

TEST_CASE("user prompt omits the labeled block when there is no context") {
    const auto b = build_user_prompt("sys", {}, {}, {"a=2"}, {"r1"}, 10000);
    CHECK(b.user_text == "Evaluation rows:\n1. a=2\n");
    CHECK(b.n_context == 0);
}

TEST_CASE("user prompt enforces the character budget") {
    const auto b = build_user_prompt("sys", {"a=1"}, {"x"}, {"a=2"}, {"r1"}, 100000);
    const std::size_t total = b.system_text.size() + b.user_text.size();
    CHECK_NOTHROW(build_user_prompt("sys", {"a=1"}, {"x"}, {"a=2"}, {"r1"}, total));
    CHECK_THROWS_AS(build_user_prompt("sys", {"a=1"}, {"x"}, {"a=2"}, {"r1"}, total - 1),
                    ContextOverflow);
}

TEST_CASE("user prompt rejects malformed inputs") {
    CHECK_THROWS_AS(build_user_prompt("s", {"a"}, {}, {"b"}, {"1"}, 100), ConfigError);
    CHECK_THROWS_AS(build_user_prompt("s", {}, {}, {"b", "c"}, {"1"}, 100), ConfigError);
    CHECK_THROWS_AS(build_user_prompt("s", {}, {}, {}, {}, 100), ConfigError);
}

TEST_CASE("response parsing folds case and keeps canonical labels") {
    const auto task = binary_task();
    const auto parsed = try_parse_response("Yes\n  NO \n", task, {"e1", "e2"});
    REQUIRE(parsed.has_value());
    REQUIRE(parsed->size() == 2);
    CHECK((*parsed)[0].label == "yes");
    CHECK((*parsed)[0].raw_text == "Yes");
    CHECK((*parsed)[0].example_id == "e1");
    CHECK_FALSE((*parsed)[0].missing);
    CHECK((*parsed)[1].label == "no");
    CHECK((*parsed)[1].raw_text == "NO");
}

TEST_CASE("response parsing skips blank lines but rejects count mismatches") {
    const auto task = binary_task();
    CHECK(try_parse_response("yes\n\n\nno\n", task, {"a", "b"}).has_value());
    CHECK_FALSE(try_parse_response("yes", task, {"a", "b"}).has_value());
    CHECK_FALSE(try_parse_response("yes\nno\nyes", task, {"a", "b"}).has_value());
    CHECK_FALSE(try_parse_response("", task, {"a"}).has_value());
    CHECK_FALSE(try_parse_response("bogus\nno", task, {"a", "b"}).has_value());
}

TEST_CASE("regression answers must parse fully as finite decimals") {
    const auto task = regression_task(0, 10);
    const auto good = try_parse_response("1.5\n-2e3", task, {"a", "b"});
    REQUIRE(good.has_value());
    CHECK((*good)[0].value == 1.5);
    CHECK((*good)[1].value == -2000.0);
    CHECK_FALSE(try_parse_response("1.5x\n2", task, {"a", "b"}).has_value());
    CHECK_FALSE(try_parse_response("about 2\n3", task, {"a", "b"}).has_value());
    CHECK_FALSE(try_parse_response("inf\n3", task, {"a", "b"}).has_value());
}

TEST_CASE("batch execution retries the whole batch on schema failures") {
    const auto task = binary_task();
    const auto bundle = bundle_for({"1", "2"});
    int calls = 0;
    const std::vector<std::string> script{"garbage", "yes\nmaybe", "yes\nno"};
    const auto query = [&](const PromptBundle&) { return script[static_cast<std::size_t>(calls++)]; };

    const auto preds = execute_batch(query, bundle, task);
    CHECK(calls == 3);
    REQUIRE(preds.size() == 2);
    CHECK_FALSE(preds[0].missing);
    CHECK(preds[0].retries_used == 2);
    CHECK(preds[1].retries_used == 2);
    CHECK(preds[0].label == "yes");
    CHECK(preds[1].label == "no");
}

TEST_CASE("batch execution marks every slot missing after the retry budget") {
    const auto task = binary_task();
    const auto bundle = bundle_for({"1", "2", "3"});
    int calls = 0;
    const auto query = [&](const PromptBundle&) {
        ++calls;
        return std::string("nope");
    };

    const auto preds = execute_batch(query, bundle, task, nullptr, 3);
    CHECK(calls == 4); // initial call plus three retries
    REQUIRE(preds.size() == 3);
    for (const auto& p : preds) {
        CHECK(p.missing);
        CHECK(p.retries_used == 3);
        CHECK(p.raw_text == "nope");
        CHECK(p.label.empty());
    }

    calls = 0;
    const auto strict = execute_batch(query, bundle, task, nullptr, 0);
    CHECK(calls == 1);
    CHECK(strict[0].missing);
    CHECK(strict[0].retries_used == 0);
}

TEST_CASE("batch transcripts log the full prompt once and flag retries") {
    const auto task = binary_task();
    const auto bundle = bundle_for({"1"});
    int calls = 0;
    const auto query = [&](const PromptBundle&) { return calls++ == 0 ? "huh" : "no"; };
    std::vector<nlohmann::json> events;
    const auto transcript = [&](const nlohmann::json& j) { events.push_back(j); };

    const auto preds = execute_batch(query, bundle, task, transcript);
    CHECK(preds[0].retries_used == 1);
    REQUIRE(events.size() == 4); // request, response, request, response

    CHECK(events[0]["event"] == "request");
    CHECK(events[0]["attempt"] == 0);
    CHECK(events[0]["system_text"] == "system");
    CHECK(events[0]["user_text"] == "user");
    CHECK(events[1]["event"] == "response");
    CHECK(events[1]["valid"] == false);
    CHECK(events[1]["raw"] == "huh");
    CHECK(events[2]["event"] == "request");
    CHECK(events[2]["attempt"] == 1);
    CHECK_FALSE(events[2].contains("user_text"));
    CHECK(events[2]["note"] == "schema retry, identical prompt");
    CHECK(events[3]["valid"] == true);
}

TEST_CASE("batch execution rejects unusable arguments") {
    const auto task = binary_task();
    const auto bundle = bundle_for({"1"});
    CHECK_THROWS_AS(execute_batch(nullptr, bundle, task), ConfigError);
    const auto query = [](const PromptBundle&) { return std::string("yes"); };
    CHECK_THROWS_AS(execute_batch(query, bundle, task, nullptr, -1), ConfigError);
}

TEST_CASE("judge spec strings parse into full specs") {
    const auto s = parse_judge_spec("sim:scripted:base=0.9,slope=-0.1,jitter=0.02,seed=7");
    CHECK(s.kind == JudgeKind::sim_scripted);
    CHECK(s.base_accuracy == 0.9);
    CHECK(s.slope_per_intensity == -0.1);
    CHECK(s.response_jitter == 0.02);
    CHECK(s.seed == 7);

    const auto c = parse_judge_spec("sim:centroid");
    CHECK(c.kind == JudgeKind::sim_centroid);

    const auto r = parse_judge_spec("remote:url=http://host:8080/v1/chat/completions,model=m");
    CHECK(r.kind == JudgeKind::remote);
    CHECK(r.endpoint_url == "http://host:8080/v1/chat/completions");
    CHECK(r.model_name == "m");
    CHECK(r.api_key_env == "JUDGECAL_API_KEY");
    CHECK(r.temperature == 0.0);
}

TEST_CASE("judge spec strings reject unknown or invalid pieces") {
    CHECK_THROWS_AS(parse_judge_spec("sim"), ConfigError);
    CHECK_THROWS_AS(parse_judge_spec("sim:magic"), ConfigError);
    CHECK_THROWS_AS(parse_judge_spec("oracle:foo=1"), ConfigError);
    CHECK_THROWS_AS(parse_judge_spec("sim:scripted:frobnicate=1"), ConfigError);
    CHECK_THROWS_AS(parse_judge_spec("remote:banana=1"), ConfigError);
    CHECK_THROWS_AS(parse_judge_spec("sim:scripted:base"), ConfigError);
    CHECK_THROWS_AS(parse_judge_spec("remote:url=http://h/p"), InvalidJudgeConfig);
    CHECK_THROWS_AS(parse_judge_spec("sim:scripted:base=2"), InvalidJudgeConfig);
    CHECK_THROWS_AS(parse_judge_spec("sim:scripted:seed=-3"), ConfigError);
}

TEST_CASE("judge specs survive a JSON round trip") {
    const auto s = parse_judge_spec("sim:scripted:base=0.8,slope=-0.3,jitter=0.01,seed=42");
    const nlohmann::json j = s;
    const auto back = j.get<JudgeSpec>();
    CHECK(back.kind == s.kind);
    CHECK(back.base_accuracy == s.base_accuracy);
    CHECK(back.slope_per_intensity == s.slope_per_intensity);
    CHECK(back.response_jitter == s.response_jitter);
    CHECK(back.seed == s.seed);

    nlohmann::json bad = j;
    bad["kind"] = "psychic";
    CHECK_THROWS_AS(bad.get<JudgeSpec>(), ConfigError);

    const auto fp = s.fingerprint();
    CHECK(fp.find("sim_scripted") != std::string::npos);
    CHECK(fp.find("base=0.8") != std::string::npos);
    CHECK(fp.find("slope=-0.3") != std::string::npos);
}

TEST_CASE("scripted judge clamps accuracy at the chance floor") {
    // base 0.9 with slope -0.1 at intensity 5 would give 0.4; a binary task
    // floors the probability at 0.5.
    JudgeSpec spec;
    spec.base_accuracy = 0.9;
    spec.slope_per_intensity = -0.1;
    const auto task = binary_task();

    std::vector<SimEvalExample> examples(10000);
    for (std::size_t i = 0; i < examples.size(); ++i) {
        examples[i].id = std::to_string(i);
        examples[i].true_label = i % 2 == 0 ? "yes" : "no";
    }

    RngStream rng(99);
    const auto preds = sim_scripted_predict(spec, examples, task, 5.0, rng);
    REQUIRE(preds.size() == examples.size());
    std::size_t correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        CHECK_FALSE(preds[i].missing);
        if (preds[i].label == examples[i].true_label) ++correct;
    }
    const double acc = static_cast<double>(correct) / static_cast<double>(preds.size());
    CHECK(acc > 0.48);
    CHECK(acc < 0.52);
}

TEST_CASE("scripted judge with full accuracy echoes the truth") {
    JudgeSpec spec;
    spec.base_accuracy = 1.0;
    const auto task = binary_task();
    std::vector<SimEvalExample> examples(50);
    for (std::size_t i = 0; i < examples.size(); ++i) {
        examples[i].id = std::to_string(i);
        examples[i].true_label = i % 2 == 0 ? "yes" : "no";
    }
    RngStream rng(1);
    for (const auto& p : sim_scripted_predict(spec, examples, task, 0.0, rng)) {
        CHECK(p.label == examples[std::stoul(p.example_id)].true_label);
        CHECK(p.raw_text == p.label);
    }
}

TEST_CASE("scripted judge draws wrong regression answers from the label range") {
    JudgeSpec spec;
    spec.base_accuracy = 0.5;
    const auto task = regression_task(10.0, 20.0);
    std::vector<SimEvalExample> examples(1000);
    for (std::size_t i = 0; i < examples.size(); ++i) {
        examples[i].id = std::to_string(i);
        examples[i].true_value = 12.5;
    }
    RngStream rng(7);
    const auto preds = sim_scripted_predict(spec, examples, task, 0.0, rng);
    std::size_t exact = 0;
    for (const auto& p : preds) {
        if (p.value == 12.5) {
            ++exact;
        } else {
            CHECK(p.value >= 10.0);
            CHECK(p.value <= 20.0);
        }
    }
    CHECK(exact > 400);
    CHECK(exact < 600);

    // Regression has no chance floor: probability zero stays zero.
    JudgeSpec hopeless;
    hopeless.base_accuracy = 0.0;
    RngStream rng2(8);
    for (const auto& p : sim_scripted_predict(hopeless, examples, task, 0.0, rng2))
        CHECK(p.value != 12.5);
}

TEST_CASE("scripted judge draws its jitter once per call") {
    // With enormous jitter the per-call probability saturates at 1 or at the
    // chance floor, so whole calls come back all-correct or near-chance.
    JudgeSpec spec;
    spec.base_accuracy = 0.5;
    spec.response_jitter = 100.0;
    TaskSpec task;
    task.label_space = {"a", "b", "c"};

    std::vector<SimEvalExample> examples(30);
    for (std::size_t i = 0; i < examples.size(); ++i) {
        examples[i].id = std::to_string(i);
        examples[i].true_label = task.label_space[i % 3];
    }

    RngStream rng(1234);
    int saturated = 0;
    int floored = 0;
    for (int call = 0; call < 40; ++call) {
        const auto preds = sim_scripted_predict(spec, examples, task, 0.0, rng);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < preds.size(); ++i)
            if (preds[i].label == examples[i].true_label) ++correct;
        const double acc = static_cast<double>(correct) / 30.0;
        if (acc == 1.0)
            ++saturated;
        else if (acc < 0.8)
            ++floored;
    }
    CHECK(saturated + floored == 40);
    CHECK(saturated > 0);
    CHECK(floored > 0);
}

TEST_CASE("scripted judge is deterministic in the stream") {
    JudgeSpec spec;
    spec.base_accuracy = 0.7;
    spec.response_jitter = 0.1;
    const auto task = binary_task();
    std::vector<SimEvalExample> examples(200);
    for (std::size_t i = 0; i < examples.size(); ++i) {
        examples[i].id = std::to_string(i);
        examples[i].true_label = i % 2 == 0 ? "yes" : "no";
    }
    RngStream a(5), b(5), c(6);
    const auto pa = sim_scripted_predict(spec, examples, task, 1.0, a);
    const auto pb = sim_scripted_predict(spec, examples, task, 1.0, b);
    const auto pc = sim_scripted_predict(spec, examples, task, 1.0, c);
    bool same = true, diff = false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        same = same && pa[i].label == pb[i].label;
        diff = diff || pa[i].label != pc[i].label;
    }
    CHECK(same);
    CHECK(diff);
}

namespace {

Table centroid_table() {
    Table t;
    t.descriptors.resize(3);
    t.descriptors[0] = {"x", FeatureKind::numeric, 0, 10, 1, 3, 0};
    t.descriptors[1] = {"y", FeatureKind::numeric, 0, 4, 1, 2, 1};
    t.descriptors[2] = {"label", FeatureKind::categorical, 0, 0, 0, 2, 2};
    t.rows = {
        {Cell{"0"}, Cell{"0"}, Cell{"a"}},
        {Cell{"2"}, Cell{"0"}, Cell{"a"}},
        {Cell{"10"}, Cell{"4"}, Cell{"b"}},
    };
    return t;
}

} // namespace

TEST_CASE("centroid fitting averages the few-shot rows per class") {
    const auto t = centroid_table();
    TaskSpec task;
    task.label_space = {"a", "b"};
    const std::vector<FeatureDescriptor> feats{t.descriptors[0], t.descriptors[1]};

    const auto model = fit_centroids(t, {0, 1, 2}, 2, feats, task);
    REQUIRE(model.labels == std::vector<std::string>{"a", "b"});
    CHECK(model.centroids[0] == std::vector<double>{1.0, 0.0});
    CHECK(model.centroids[1] == std::vector<double>{10.0, 4.0});

    // A class absent from the few-shot draw is simply skipped.
    TaskSpec wider = task;
    wider.label_space = {"a", "b", "ghost"};
    const auto partial = fit_centroids(t, {0, 1, 2}, 2, feats, wider);
    CHECK(partial.labels == std::vector<std::string>{"a", "b"});
}

TEST_CASE("centroid fitting rejects unusable inputs") {
    const auto t = centroid_table();
    TaskSpec task;
    task.label_space = {"a", "b"};
    const std::vector<FeatureDescriptor> feats{t.descriptors[0], t.descriptors[1]};

    CHECK_THROWS_AS(fit_centroids(t, {0}, 2, feats, regression_task(0, 1)), ConfigError);
    CHECK_THROWS_AS(fit_centroids(t, {}, 2, feats, task), InsufficientData);
    CHECK_THROWS_AS(fit_centroids(t, {0}, 2, {}, task), NoNumericFeatures);

    Table broken = t;
    broken.rows[0][2] = std::nullopt;
    CHECK_THROWS_AS(fit_centroids(broken, {0}, 2, feats, task), SchemaError);
    broken = t;
    broken.rows[0][0] = Cell{"not-a-number"};
    CHECK_THROWS_AS(fit_centroids(broken, {0}, 2, feats, task), SchemaError);
}

TEST_CASE("centroid judge assigns the nearest class") {
    CentroidModel model;
    model.labels = {"a", "b"};
    model.centroids = {{1.0, 0.0}, {10.0, 4.0}};

    std::vector<SimEvalExample> examples(2);
    examples[0].id = "p";
    examples[0].features = {0.9, 0.1};
    examples[1].id = "q";
    examples[1].features = {9.0, 5.0};

    const auto preds = sim_centroid_predict(model, examples);
    CHECK(preds[0].label == "a");
    CHECK(preds[1].label == "b");
    CHECK_FALSE(preds[0].missing);

    examples[0].features = {1.0};
    CHECK_THROWS_AS(sim_centroid_predict(model, examples), ConfigError);
    CHECK_THROWS_AS(sim_centroid_predict(CentroidModel{}, examples), InsufficientData);
}

TEST_CASE("sim dispatch rejects impossible combinations") {
    std::vector<SimEvalExample> examples(1);
    examples[0].id = "x";
    examples[0].true_label = "yes";
    RngStream rng(1);
    const auto task = binary_task();

    JudgeSpec remote;
    remote.kind = JudgeKind::remote;
    CHECK_THROWS_AS(sim_predict(remote, nullptr, examples, task, 0.0, rng), ConfigError);

    JudgeSpec centroid;
    centroid.kind = JudgeKind::sim_centroid;
    CHECK_THROWS_AS(sim_predict(centroid, nullptr, examples, task, 0.0, rng), ConfigError);

    JudgeSpec scripted; // defaults to sim_scripted
    CHECK_NOTHROW(sim_predict(scripted, nullptr, examples, task, 0.0, rng));
}

TEST_CASE("remote client posts the chat payload and returns the content") {
    setenv("JUDGECAL_TEST_KEY", "sekrit", 1);
    std::atomic<int> calls{0};
    nlohmann::json seen_body;
    std::string seen_auth;
    std::mutex mu;
    MockServer server([&](const httplib::Request& req, httplib::Response& res) {
        ++calls;
        {
            std::lock_guard<std::mutex> lock(mu);
            seen_body = nlohmann::json::parse(req.body);
            seen_auth = req.get_header_value("Authorization");
        }
        res.set_content(completion_body("yes\nno"), "application/json");
    });

    RemoteJudgeClient client(remote_spec(server.url()), 0, 1);
    const auto raw = client.query(build_user_prompt("sys", {}, {}, {"a=1", "a=2"}, {"1", "2"}, 1000));
    CHECK(raw == "yes\nno");
    CHECK(calls == 1);

    std::lock_guard<std::mutex> lock(mu);
    CHECK(seen_auth == "Bearer sekrit");
    CHECK(seen_body["model"] == "m1");
    CHECK(seen_body["temperature"] == 0.25);
    REQUIRE(seen_body["messages"].size() == 2);
    CHECK(seen_body["messages"][0]["role"] == "system");
    CHECK(seen_body["messages"][0]["content"] == "sys");
    CHECK(seen_body["messages"][1]["role"] == "user");
}

TEST_CASE("remote client fails fast on a rejected credential") {
    std::atomic<int> calls{0};
    MockServer server([&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.status = 401;
    });
    RemoteJudgeClient client(remote_spec(server.url()), 5, 1);
    CHECK_THROWS_AS(client.query(bundle_for({"1"})), AuthError);
    CHECK(calls == 1); // never retried
}

TEST_CASE("remote client retries through rate limiting") {
    std::atomic<int> calls{0};
    MockServer server([&](const httplib::Request&, httplib::Response& res) {
        if (++calls <= 2) {
            res.status = 429;
        } else {
            res.set_content(completion_body("ok"), "application/json");
        }
    });
    RemoteJudgeClient client(remote_spec(server.url()), 5, 1);
    CHECK(client.query(bundle_for({"1"})) == "ok");
    CHECK(calls == 3);
}

TEST_CASE("remote client exhausts the transport budget on persistent failure") {
    std::atomic<int> calls{0};
    MockServer server([&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.status = 500;
    });
    RemoteJudgeClient client(remote_spec(server.url()), 2, 1);
    CHECK_THROWS_AS(client.query(bundle_for({"1"})), TransportError);
    CHECK(calls == 3); // initial attempt plus two retries
}

TEST_CASE("remote client rejects malformed response bodies") {
    MockServer garbage([&](const httplib::Request&, httplib::Response& res) {
        res.set_content("not json at all", "text/plain");
    });
    RemoteJudgeClient c1(remote_spec(garbage.url()), 0, 1);
    CHECK_THROWS_AS(c1.query(bundle_for({"1"})), TransportError);

    MockServer hollow([&](const httplib::Request&, httplib::Response& res) {
        res.set_content("{\"id\": \"x\"}", "application/json");
    });
    RemoteJudgeClient c2(remote_spec(hollow.url()), 0, 1);
    CHECK_THROWS_AS(c2.query(bundle_for({"1"})), TransportError);
}

TEST_CASE("remote client construction requires a remote spec") {
    JudgeSpec sim;
    CHECK_THROWS_AS(RemoteJudgeClient(sim, 0, 1), InvalidJudgeConfig);

    JudgeSpec no_scheme = remote_spec("localhost:9/x");
    no_scheme.endpoint_url = "localhost:9/x";
    CHECK_THROWS_AS(RemoteJudgeClient(no_scheme, 0, 1), ConfigError);
}
