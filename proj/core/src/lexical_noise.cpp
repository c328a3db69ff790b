#include "judgecal/lexical_noise.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "judgecal/errors.hpp"

namespace judgecal {

namespace {

constexpr std::array<const char*, 3> kQwertyRows{"qwertyuiop", "asdfghjkl", "zxcvbnm"};

char random_lowercase(RngStream& rng) {
    return static_cast<char>('a' + rng.uniform_below(26));
}

CorruptionOp pick_op(const CorruptionConfig& config, RngStream& rng) {
    double total = 0.0;
    for (double w : config.op_weights) total += w;
    const double r = rng.uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < config.op_weights.size(); ++i) {
        acc += config.op_weights[i];
        if (r < acc) return static_cast<CorruptionOp>(i);
    }
    return CorruptionOp::erase; // r == total can only happen by rounding
}

std::string apply_op(const std::string& token, CorruptionOp op, const CorruptionConfig& config, RngStream& rng) {
    // Swap needs a character pair and delete must leave a non-empty token;
    // fall back to masking when the token is too short.
    if (token.size() < 2 && (op == CorruptionOp::adjacent_swap || op == CorruptionOp::erase))
        op = CorruptionOp::dropout_mask;
    std::string out = token;
    switch (op) {
    case CorruptionOp::dropout_mask:
        return config.mask_token;
    case CorruptionOp::adjacent_swap: {
        const std::size_t pos = rng.uniform_below(out.size() - 1);
        std::swap(out[pos], out[pos + 1]);
        return out;
    }
    case CorruptionOp::keyboard_typo: {
        const std::size_t pos = rng.uniform_below(out.size());
        const auto it = config.keyboard_map.find(out[pos]);
        if (it == config.keyboard_map.end() || it->second.empty())
            out[pos] = random_lowercase(rng);
        else
            out[pos] = it->second[rng.uniform_below(it->second.size())];
        return out;
    }
    case CorruptionOp::insert: {
        const std::size_t pos = rng.uniform_below(out.size() + 1);
        out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), random_lowercase(rng));
        return out;
    }
    case CorruptionOp::erase: {
        const std::size_t pos = rng.uniform_below(out.size());
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(pos));
        return out;
    }
    }
    return out;
}

} // namespace

std::map<char, std::string> default_keyboard_map() {
    std::map<char, std::string> map;
    for (std::size_t r = 0; r < kQwertyRows.size(); ++r) {
        const std::string row = kQwertyRows[r];
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::string neighbors;
            if (i > 0) neighbors.push_back(row[i - 1]);
            if (i + 1 < row.size()) neighbors.push_back(row[i + 1]);
            if (r > 0) {
                const std::string above = kQwertyRows[r - 1];
                // Staggered layout: this key sits between above[i] and above[i+1].
                if (i < above.size()) neighbors.push_back(above[i]);
                if (i + 1 < above.size()) neighbors.push_back(above[i + 1]);
            }
            if (r + 1 < kQwertyRows.size()) {
                const std::string below = kQwertyRows[r + 1];
                if (i > 0 && i - 1 < below.size()) neighbors.push_back(below[i - 1]);
                if (i < below.size()) neighbors.push_back(below[i]);
            }
            map[row[i]] = neighbors;
        }
    }
    return map;
}

std::map<char, std::string> load_keyboard_map(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) throw IoError("cannot open " + json_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(json_path + ": " + e.what());
    }
    if (!j.is_object()) throw ParseError(json_path + ": keyboard map must be a JSON object");
    std::map<char, std::string> map;
    for (const auto& item : j.items()) {
        if (item.key().size() != 1)
            throw ConfigError(json_path + ": keyboard map key \"" + item.key() + "\" must be a single character");
        map[item.key()[0]] = item.value().get<std::string>();
    }
    return map;
}

void CorruptionConfig::validate() const {
    if (!(p_max >= 0.0 && p_max <= 1.0)) throw ConfigError("p_max must lie in [0, 1]");
    double total = 0.0;
    for (double w : op_weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("corruption op weights must be finite and >= 0");
        total += w;
    }
    if (!(total > 0.0)) throw ConfigError("corruption op weights must sum to a positive value");
    if (mask_token.empty()) throw ConfigError("mask_token must be non-empty");
}

void SeveritySchedule::validate() const {
    if (levels.empty()) throw ConfigError("severity schedule must be non-empty");
    for (double v : levels)
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("severity levels must lie in [0, 1]");
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (!(levels[i] > levels[i - 1]))
            throw ConfigError("severity schedule must be strictly increasing (mild to strong)");
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream in(text);
    std::string token;
    while (in >> token) tokens.push_back(token);
    return tokens;
}

CorruptionResult corrupt(const std::vector<std::string>& tokens,
                         double alpha,
                         const CorruptionConfig& config,
                         RngStream& rng) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("corruption severity must lie in [0, 1]");
    config.validate();
    CorruptionResult result;
    result.tokens.reserve(tokens.size());
    const double p = alpha * config.p_max;
    for (const auto& token : tokens) {
        if (p > 0.0 && rng.bernoulli(p)) {
            result.tokens.push_back(apply_op(token, pick_op(config, rng), config, rng));
            ++result.corrupted_count;
        } else {
            result.tokens.push_back(token);
        }
    }
    return result;
}

std::string corrupt_text(const std::string& text,
                         double alpha,
                         const CorruptionConfig& config,
                         RngStream& rng) {
    const auto result = corrupt(tokenize(text), alpha, config, rng);
    std::string out;
    for (std::size_t i = 0; i < result.tokens.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out += result.tokens[i];
    }
    return out;
}

void to_json(nlohmann::json& j, const CorruptionConfig& c) {
    nlohmann::json weights;
    for (std::size_t i = 0; i < c.op_weights.size(); ++i) weights[kCorruptionOpNames[i]] = c.op_weights[i];
    nlohmann::json keyboard;
    for (const auto& [key, neighbors] : c.keyboard_map) keyboard[std::string(1, key)] = neighbors;
    j = nlohmann::json{{"p_max", c.p_max},
                       {"op_weights", weights},
                       {"mask_token", c.mask_token},
                       {"keyboard_map", keyboard}};
}

void from_json(const nlohmann::json& j, CorruptionConfig& c) {
    c = CorruptionConfig{};
    if (j.contains("p_max")) j.at("p_max").get_to(c.p_max);
    if (j.contains("mask_token")) j.at("mask_token").get_to(c.mask_token);
    if (j.contains("op_weights")) {
        const auto& weights = j.at("op_weights");
        for (std::size_t i = 0; i < c.op_weights.size(); ++i)
            if (weights.contains(kCorruptionOpNames[i]))
                weights.at(kCorruptionOpNames[i]).get_to(c.op_weights[i]);
    }
    if (j.contains("keyboard_map")) {
        c.keyboard_map.clear();
        for (const auto& item : j.at("keyboard_map").items()) {
            if (item.key().size() != 1)
                throw ConfigError("keyboard map key \"" + item.key() + "\" must be a single character");
            c.keyboard_map[item.key()[0]] = item.value().get<std::string>();
        }
    }
    c.validate();
}

} // namespace judgecal
