#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "judgecal/rng.hpp"

namespace judgecal {

enum class CorruptionOp : std::size_t {
    dropout_mask = 0,
    adjacent_swap = 1,
    keyboard_typo = 2,
    insert = 3,
    erase = 4, // "delete" in config files
};

constexpr std::array<const char*, 5> kCorruptionOpNames{
    "dropout_mask", "adjacent_swap", "keyboard_typo", "insert", "delete"};

std::map<char, std::string> default_keyboard_map();

// char -> string of neighbor chars, loaded from a JSON object of 1-char keys.
std::map<char, std::string> load_keyboard_map(const std::string& json_path);

struct CorruptionConfig {
    double p_max = 1.0;
    // dropout_mask, adjacent_swap, keyboard_typo, insert, delete
    std::array<double, 5> op_weights{0.25, 0.25, 0.25, 0.125, 0.125};
    std::string mask_token = "[MASK]";
    std::map<char, std::string> keyboard_map = default_keyboard_map();

    void validate() const; // p_max in [0,1]; weights >= 0 with positive sum
};

// Ordered mild-to-strong severities in [0,1]; level k is also the regressor
// value n_k of the trend fit.
struct SeveritySchedule {
    std::vector<double> levels;

    double intensity(std::size_t k) const { return levels[k]; }
    std::size_t size() const { return levels.size(); }
    void validate() const;

    static SeveritySchedule defaults() { return SeveritySchedule{{0.0, 0.2, 0.4, 0.6, 0.8, 1.0}}; }
    static SeveritySchedule four_point() { return SeveritySchedule{{0.0, 0.33, 0.67, 1.0}}; }
};

std::vector<std::string> tokenize(const std::string& text);

struct CorruptionResult {
    std::vector<std::string> tokens;
    std::size_t corrupted_count = 0;
};

// Each token is independently corrupted with probability alpha * p_max; a
// corrupted token receives exactly one operation drawn by op_weights. Tokens
// too short to swap or delete are masked instead. Token count is preserved.
CorruptionResult corrupt(const std::vector<std::string>& tokens,
                         double alpha,
                         const CorruptionConfig& config,
                         RngStream& rng);

// tokenize, corrupt, re-join with single spaces.
std::string corrupt_text(const std::string& text,
                         double alpha,
                         const CorruptionConfig& config,
                         RngStream& rng);

void to_json(nlohmann::json& j, const CorruptionConfig& c);
void from_json(const nlohmann::json& j, CorruptionConfig& c);

} // namespace judgecal
