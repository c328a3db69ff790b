#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "judgecal/dataset.hpp"
#include "judgecal/judge.hpp"

namespace judgecal {

// MISSING predictions are excluded from every numerator and denominator;
// coverage records how much of the batch was scored.
struct MetricReport {
    TaskKind task_kind = TaskKind::classification;
    double primary = 0.0; // accuracy or r_squared per task
    // classification
    double accuracy = 0.0;
    double precision_macro = 0.0;
    double recall_macro = 0.0;
    double f1_macro = 0.0;
    // regression
    double r_squared = 0.0;
    double mse = 0.0;
    double mae = 0.0;
    std::size_t n_scored = 0;
    std::size_t n_missing = 0;
    double coverage = 0.0; // n_scored / (n_scored + n_missing)
};

MetricReport score_classification(const std::vector<JudgePrediction>& preds,
                                  const std::vector<std::string>& truths,
                                  const std::vector<std::string>& label_space);

MetricReport score_regression(const std::vector<JudgePrediction>& preds,
                              const std::vector<double>& truths);

void to_json(nlohmann::json& j, const MetricReport& m);
void from_json(const nlohmann::json& j, MetricReport& m);

} // namespace judgecal
