#include "judgecal/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "judgecal/errors.hpp"

namespace judgecal {

MetricReport score_classification(const std::vector<JudgePrediction>& preds,
                                  const std::vector<std::string>& truths,
                                  const std::vector<std::string>& label_space) {
    if (preds.size() != truths.size())
        throw ConfigError("predictions and truths differ in length");
    if (label_space.empty()) throw ConfigError("empty label space");

    MetricReport m;
    m.task_kind = TaskKind::classification;
    std::size_t correct = 0;
    const std::size_t n_labels = label_space.size();
    std::vector<std::size_t> tp(n_labels, 0), fp(n_labels, 0), fn(n_labels, 0);
    auto label_index = [&](const std::string& label) {
        const auto it = std::find(label_space.begin(), label_space.end(), label);
        if (it == label_space.end()) throw SchemaError("label \"" + label + "\" outside the label space");
        return static_cast<std::size_t>(it - label_space.begin());
    };

    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i].missing) {
            ++m.n_missing;
            continue;
        }
        ++m.n_scored;
        const std::size_t t = label_index(truths[i]);
        const std::size_t p = label_index(preds[i].label);
        if (p == t) {
            ++correct;
            ++tp[t];
        } else {
            ++fp[p];
            ++fn[t];
        }
    }
    if (m.n_scored == 0) throw NoScoredPredictions("every prediction in the batch is MISSING");

    m.accuracy = static_cast<double>(correct) / static_cast<double>(m.n_scored);
    double precision_sum = 0.0, recall_sum = 0.0, f1_sum = 0.0;
    for (std::size_t c = 0; c < n_labels; ++c) {
        const double p_den = static_cast<double>(tp[c] + fp[c]);
        const double r_den = static_cast<double>(tp[c] + fn[c]);
        const double precision = p_den > 0.0 ? static_cast<double>(tp[c]) / p_den : 0.0;
        const double recall = r_den > 0.0 ? static_cast<double>(tp[c]) / r_den : 0.0;
        const double f1 = (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        precision_sum += precision;
        recall_sum += recall;
        f1_sum += f1;
    }
    m.precision_macro = precision_sum / static_cast<double>(n_labels);
    m.recall_macro = recall_sum / static_cast<double>(n_labels);
    m.f1_macro = f1_sum / static_cast<double>(n_labels);
    m.primary = m.accuracy;
    m.coverage = static_cast<double>(m.n_scored) / static_cast<double>(m.n_scored + m.n_missing);
    return m;
}

MetricReport score_regression(const std::vector<JudgePrediction>& preds,
                              const std::vector<double>& truths) {
    if (preds.size() != truths.size())
        throw ConfigError("predictions and truths differ in length");

    MetricReport m;
    m.task_kind = TaskKind::regression;
    std::vector<std::size_t> scored;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i].missing) {
            ++m.n_missing;
            continue;
        }
        if (!std::isfinite(truths[i])) throw NonFiniteValue("regression truth is not finite");
        scored.push_back(i);
    }
    m.n_scored = scored.size();
    if (scored.empty()) throw NoScoredPredictions("every prediction in the batch is MISSING");

    double mean_truth = 0.0;
    for (std::size_t i : scored) mean_truth += truths[i];
    mean_truth /= static_cast<double>(scored.size());

    double ss_res = 0.0, ss_tot = 0.0, abs_sum = 0.0;
    for (std::size_t i : scored) {
        const double err = truths[i] - preds[i].value;
        ss_res += err * err;
        abs_sum += std::fabs(err);
        ss_tot += (truths[i] - mean_truth) * (truths[i] - mean_truth);
    }
    if (ss_tot == 0.0)
        throw ZeroVariance("scored truths are constant, the R^2 baseline is undefined");

    m.r_squared = 1.0 - ss_res / ss_tot;
    m.mse = ss_res / static_cast<double>(scored.size());
    m.mae = abs_sum / static_cast<double>(scored.size());
    m.primary = m.r_squared;
    m.coverage = static_cast<double>(m.n_scored) / static_cast<double>(m.n_scored + m.n_missing);
    return m;
}

void to_json(nlohmann::json& j, const MetricReport& m) {
    j = nlohmann::json{{"task_kind", task_kind_name(m.task_kind)},
                       {"primary", m.primary},
                       {"n_scored", m.n_scored},
                       {"n_missing", m.n_missing},
                       {"coverage", m.coverage}};
    if (m.task_kind == TaskKind::classification) {
        j["accuracy"] = m.accuracy;
        j["precision_macro"] = m.precision_macro;
        j["recall_macro"] = m.recall_macro;
        j["f1_macro"] = m.f1_macro;
    } else {
        j["r_squared"] = m.r_squared;
        j["mse"] = m.mse;
        j["mae"] = m.mae;
    }
}

void from_json(const nlohmann::json& j, MetricReport& m) {
    m = MetricReport{};
    m.task_kind = parse_task_kind(j.at("task_kind").get<std::string>());
    j.at("primary").get_to(m.primary);
    j.at("n_scored").get_to(m.n_scored);
    j.at("n_missing").get_to(m.n_missing);
    j.at("coverage").get_to(m.coverage);
    if (m.task_kind == TaskKind::classification) {
        j.at("accuracy").get_to(m.accuracy);
        j.at("precision_macro").get_to(m.precision_macro);
        j.at("recall_macro").get_to(m.recall_macro);
        j.at("f1_macro").get_to(m.f1_macro);
    } else {
        j.at("r_squared").get_to(m.r_squared);
        j.at("mse").get_to(m.mse);
        j.at("mae").get_to(m.mae);
    }
}

} // namespace judgecal
