#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "eecl/novelty.hpp"
#include "eecl/td3.hpp"

namespace eecl {

// Configuration problems exit with code 1; runtime problems with code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A full experiment description. `novelty` absent means baseline TD3.
struct RunConfig {
    std::string env = "pointmass";
    Td3Config td3;
    std::optional<NoveltyConfig> novelty;
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
    long long eval_every = 250;
    int eval_episodes = 10;
    std::string out_dir = "runs";

    void validate() const {
        if (env.empty()) throw ConfigError("config: env must not be empty");
        if (seeds.empty()) throw ConfigError("config: seeds must not be empty");
        if (eval_every < 1) throw ConfigError("config: eval_every must be positive (got " +
                                              std::to_string(eval_every) + ")");
        if (eval_episodes < 1) throw ConfigError("config: eval_episodes must be positive (got " +
                                                 std::to_string(eval_episodes) + ")");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& key, const std::string& value, int line) {
    std::size_t pos = 0;
    double x = 0;
    try {
        x = std::stod(value, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != value.size())
        throw ConfigError("config line " + std::to_string(line) + ": value for '" + key +
                          "' is not a number: '" + value + "'");
    return x;
}

inline long long parse_int(const std::string& key, const std::string& value, int line) {
    std::size_t pos = 0;
    long long x = 0;
    try {
        x = std::stoll(value, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != value.size())
        throw ConfigError("config line " + std::to_string(line) + ": value for '" + key +
                          "' is not an integer: '" + value + "'");
    return x;
}

inline bool parse_bool(const std::string& key, const std::string& value, int line) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw ConfigError("config line " + std::to_string(line) + ": value for '" + key +
                      "' must be 'true' or 'false': '" + value + "'");
}

inline std::vector<std::uint64_t> parse_seed_list(const std::string& key, const std::string& value,
                                                  int line) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            throw ConfigError("config line " + std::to_string(line) + ": empty entry in '" + key + "'");
        out.push_back(static_cast<std::uint64_t>(parse_int(key, item, line)));
    }
    if (out.empty())
        throw ConfigError("config line " + std::to_string(line) + ": '" + key + "' needs at least one seed");
    return out;
}

template <typename T>
void require_range(const std::string& key, T value, bool ok) {
    if (!ok) {
        std::ostringstream msg;
        msg << "config: " << key << " out of range (got " << value << ")";
        throw ConfigError(msg.str());
    }
}

}  // namespace detail

// Parses `key = value` lines ('#' starts a comment). Unspecified fields keep
// their defaults; unknown keys are an error so hyperparameter typos surface
// immediately. Any eecl.* key switches the novelty module on (eecl.enabled =
// false switches it back off); a file with no eecl keys describes baseline
// TD3.
inline RunConfig parse_config(std::istream& in) {
    using namespace detail;
    RunConfig cfg;
    NoveltyConfig novelty;
    bool eecl_seen = false;
    bool eecl_enabled = true;

    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected 'key = value', got '" + line + "'");

        if (key == "env") {
            cfg.env = value;
        } else if (key == "seeds") {
            cfg.seeds = parse_seed_list(key, value, lineno);
        } else if (key == "eval_every") {
            cfg.eval_every = parse_int(key, value, lineno);
        } else if (key == "eval_episodes") {
            cfg.eval_episodes = static_cast<int>(parse_int(key, value, lineno));
        } else if (key == "out") {
            cfg.out_dir = value;
        } else if (key == "td3.discount") {
            cfg.td3.discount = parse_real(key, value, lineno);
            require_range(key, cfg.td3.discount, cfg.td3.discount >= 0.0 && cfg.td3.discount < 1.0);
        } else if (key == "td3.tau") {
            cfg.td3.tau = parse_real(key, value, lineno);
            require_range(key, cfg.td3.tau, cfg.td3.tau > 0.0 && cfg.td3.tau <= 1.0);
        } else if (key == "td3.policy_delay") {
            cfg.td3.policy_delay = static_cast<int>(parse_int(key, value, lineno));
            require_range(key, cfg.td3.policy_delay, cfg.td3.policy_delay >= 1);
        } else if (key == "td3.batch_size") {
            cfg.td3.batch_size = static_cast<int>(parse_int(key, value, lineno));
            require_range(key, cfg.td3.batch_size, cfg.td3.batch_size >= 1);
        } else if (key == "td3.replay_capacity") {
            cfg.td3.replay_capacity = parse_int(key, value, lineno);
            require_range(key, cfg.td3.replay_capacity, cfg.td3.replay_capacity >= 1);
        } else if (key == "td3.actor_lr") {
            cfg.td3.actor_lr = parse_real(key, value, lineno);
            require_range(key, cfg.td3.actor_lr, cfg.td3.actor_lr > 0.0);
        } else if (key == "td3.critic_lr") {
            cfg.td3.critic_lr = parse_real(key, value, lineno);
            require_range(key, cfg.td3.critic_lr, cfg.td3.critic_lr > 0.0);
        } else if (key == "td3.critic_weight_decay") {
            cfg.td3.critic_weight_decay = parse_real(key, value, lineno);
            require_range(key, cfg.td3.critic_weight_decay, cfg.td3.critic_weight_decay >= 0.0);
        } else if (key == "td3.explore_sigma") {
            cfg.td3.explore_sigma = parse_real(key, value, lineno);
            require_range(key, cfg.td3.explore_sigma, cfg.td3.explore_sigma >= 0.0);
        } else if (key == "td3.smooth_sigma") {
            cfg.td3.smooth_sigma = parse_real(key, value, lineno);
            require_range(key, cfg.td3.smooth_sigma, cfg.td3.smooth_sigma >= 0.0);
        } else if (key == "td3.smooth_clip") {
            cfg.td3.smooth_clip = parse_real(key, value, lineno);
            require_range(key, cfg.td3.smooth_clip, cfg.td3.smooth_clip > 0.0);
        } else if (key == "td3.warmup_steps") {
            cfg.td3.warmup_steps = parse_int(key, value, lineno);
            require_range(key, cfg.td3.warmup_steps, cfg.td3.warmup_steps >= 0);
        } else if (key == "td3.total_steps") {
            cfg.td3.total_steps = parse_int(key, value, lineno);
            require_range(key, cfg.td3.total_steps, cfg.td3.total_steps >= 0);
        } else if (key == "eecl.enabled") {
            eecl_seen = true;
            eecl_enabled = parse_bool(key, value, lineno);
        } else if (key == "eecl.epsilon") {
            eecl_seen = true;
            novelty.epsilon = parse_real(key, value, lineno);
            require_range(key, novelty.epsilon, novelty.epsilon > 0.0);
        } else if (key == "eecl.r_max") {
            eecl_seen = true;
            novelty.r_max = parse_real(key, value, lineno);
            require_range(key, novelty.r_max, novelty.r_max >= 0.0);
        } else if (key == "eecl.decay") {
            eecl_seen = true;
            novelty.decay = parse_real(key, value, lineno);
            require_range(key, novelty.decay, novelty.decay > 0.0 && novelty.decay <= 1.0);
        } else if (key == "eecl.max_states") {
            eecl_seen = true;
            novelty.max_states = static_cast<int>(parse_int(key, value, lineno));
            require_range(key, novelty.max_states, novelty.max_states >= 1);
        } else {
            throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }

    if (eecl_seen && eecl_enabled) cfg.novelty = novelty;
    cfg.validate();
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_config(in);
}

}  // namespace eecl
