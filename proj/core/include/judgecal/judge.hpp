#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "judgecal/dataset.hpp"
#include "judgecal/rng.hpp"

namespace judgecal {

enum class JudgeKind { remote, sim_centroid, sim_scripted };

std::string judge_kind_name(JudgeKind k);

struct JudgeSpec {
    JudgeKind kind = JudgeKind::sim_scripted;

    // remote
    std::string endpoint_url;
    std::string model_name;
    double temperature = 0.0;
    std::string api_key_env = "JUDGECAL_API_KEY";
    double timeout_s = 120.0;

    // sim_scripted: P(correct) = clamp(base + slope * intensity + jitter * N(0,1), floor, 1)
    double base_accuracy = 0.9;
    double slope_per_intensity = 0.0;
    double response_jitter = 0.0;

    std::uint64_t seed = 0;

    void validate() const;
    // Short description recorded with every trial (model/temperature or sim params).
    std::string fingerprint() const;
};

// Accepts "sim:scripted:base=0.9,slope=-0.1,jitter=0.02,seed=7",
// "sim:centroid", or "remote:url=http://host:8080/v1/chat/completions,model=m".
JudgeSpec parse_judge_spec(const std::string& text);

struct PromptBundle {
    std::string system_text;
    std::string user_text;
    std::size_t n_context = 0;
    std::vector<std::string> eval_ids; // input order
};

struct JudgePrediction {
    std::string example_id;
    std::string raw_text; // the answer line, or the last raw response when missing
    bool missing = true;
    std::string label; // classification, element of label_space
    double value = 0.0; // regression
    int retries_used = 0;
};

// One serialized example body: "name=value, name=value" over the selected
// features, or the raw text for text tasks.
std::string serialize_example(const Row& row,
                              const std::vector<FeatureDescriptor>& features,
                              std::optional<std::size_t> text_column);

std::string build_system_prompt(const TaskSpec& task, const DatasetManifest& meta);

// Few-shot block ("body -> label" lines) followed by numbered unlabeled
// evaluation rows. Throws ContextOverflow past char_budget total characters.
PromptBundle build_user_prompt(const std::string& system_text,
                               const std::vector<std::string>& few_shot_bodies,
                               const std::vector<std::string>& few_shot_labels,
                               const std::vector<std::string>& eval_bodies,
                               const std::vector<std::string>& eval_ids,
                               std::size_t char_budget);

// Validates one raw completion against the batch: answer count must equal
// |eval_ids|; classification answers must match label_space after trim and
// ASCII case-fold; regression answers must parse fully as decimals.
// nullopt means the whole batch gets retried.
std::optional<std::vector<JudgePrediction>> try_parse_response(const std::string& raw,
                                                               const TaskSpec& task,
                                                               const std::vector<std::string>& eval_ids);

using QueryFn = std::function<std::string(const PromptBundle&)>;
using TranscriptFn = std::function<void(const nlohmann::json&)>;

// Queries, validates, retries the whole batch up to max_schema_retries times
// (so at most max_schema_retries + 1 calls); after that every slot is MISSING
// with retries_used = max_schema_retries. Never returns fewer predictions
// than eval_ids.
std::vector<JudgePrediction> execute_batch(const QueryFn& query,
                                           const PromptBundle& bundle,
                                           const TaskSpec& task,
                                           const TranscriptFn& transcript = nullptr,
                                           int max_schema_retries = 3);

// Chat-completion client: POST {model, messages, temperature}, answer read
// from choices[0].message.content. 401/403 fail fast as AuthError; 429 and
// transport failures retry with exponential backoff.
class RemoteJudgeClient {
public:
    explicit RemoteJudgeClient(const JudgeSpec& spec,
                               int max_transport_retries = 5,
                               int initial_backoff_ms = 1000,
                               TranscriptFn transcript = nullptr);
    ~RemoteJudgeClient();
    RemoteJudgeClient(const RemoteJudgeClient&) = delete;
    RemoteJudgeClient& operator=(const RemoteJudgeClient&) = delete;

    std::string query(const PromptBundle& bundle);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct SimEvalExample {
    std::string id;
    std::string true_label;        // classification
    double true_value = 0.0;       // regression
    std::vector<double> features;  // centroid judge: possibly perturbed values
};

// Per-class means of the clean few-shot feature vectors.
struct CentroidModel {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> centroids;
};

CentroidModel fit_centroids(const Table& table,
                            const std::vector<std::size_t>& few_shot_rows,
                            std::size_t label_column,
                            const std::vector<FeatureDescriptor>& features,
                            const TaskSpec& task);

// Scripted judge: correct with probability clamp(base + slope * intensity +
// jitter_draw, floor, 1), where jitter_draw is sampled once per call and the
// floor is 1/|labels| (0 for regression). Wrong classification answers are
// uniform over the other labels; wrong regression answers are uniform over
// the observed label range.
std::vector<JudgePrediction> sim_scripted_predict(const JudgeSpec& spec,
                                                  const std::vector<SimEvalExample>& examples,
                                                  const TaskSpec& task,
                                                  double intensity,
                                                  RngStream& rng);

// Nearest-centroid judge: degradation emerges from the perturbed features.
std::vector<JudgePrediction> sim_centroid_predict(const CentroidModel& model,
                                                  const std::vector<SimEvalExample>& examples);

// Dispatch over sim kinds; `model` is required for sim_centroid.
std::vector<JudgePrediction> sim_predict(const JudgeSpec& spec,
                                         const CentroidModel* model,
                                         const std::vector<SimEvalExample>& examples,
                                         const TaskSpec& task,
                                         double intensity,
                                         RngStream& rng);

void to_json(nlohmann::json& j, const JudgeSpec& s);
void from_json(const nlohmann::json& j, JudgeSpec& s);

} // namespace judgecal
